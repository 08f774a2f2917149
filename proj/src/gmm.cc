// patstd/src/gmm.cc

// Copyright 2026  The patstd Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "patstd/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patstd/common.h"

namespace patstd {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogZero = -std::numeric_limits<double>::infinity();
}  // namespace

void GmmState::Prepare() {
  const int nc = NumComponents();
  gconsts.resize(nc);
  for (int c = 0; c < nc; c++) {
    if (weights[c] <= 0.0) {
      gconsts[c] = kLogZero;
      continue;
    }
    double g = std::log(weights[c]) - 0.5 * dim * kLog2Pi;
    const double *v = Var(c);
    for (int d = 0; d < dim; d++) g -= 0.5 * std::log(v[d]);
    gconsts[c] = g;
  }
}

double GmmState::ComponentLogLikelihood(int c, const float *frame) const {
  if (gconsts[c] == kLogZero) return kLogZero;
  const double *mu = Mean(c);
  const double *v = Var(c);
  double q = 0.0;
  for (int d = 0; d < dim; d++) {
    double diff = frame[d] - mu[d];
    q += diff * diff / v[d];
  }
  return gconsts[c] - 0.5 * q;
}

double GmmState::LogLikelihood(const float *frame) const {
  const int nc = NumComponents();
  if (nc == 1) return ComponentLogLikelihood(0, frame);
  double best = kLogZero;
  double ll[64];
  if (nc > 64) throw InternalError("too many mixture components");
  for (int c = 0; c < nc; c++) {
    ll[c] = ComponentLogLikelihood(c, frame);
    if (ll[c] > best) best = ll[c];
  }
  if (best == kLogZero) throw InternalError("all mixture components empty");
  double sum = 0.0;
  for (int c = 0; c < nc; c++)
    if (ll[c] != kLogZero) sum += std::exp(ll[c] - best);
  return best + std::log(sum);
}

GmmState MakeSingleGaussian(int dim, const std::vector<double> &mean,
                            const std::vector<double> &var) {
  GmmState s;
  s.dim = dim;
  s.weights = {1.0};
  s.means = mean;
  s.vars = var;
  s.Prepare();
  return s;
}

void SplitLargestComponent(GmmState *state) {
  const int nc = state->NumComponents();
  int best = 0;
  for (int c = 1; c < nc; c++)
    if (state->weights[c] > state->weights[best]) best = c;

  const int dim = state->dim;
  std::vector<double> mean(state->Mean(best), state->Mean(best) + dim);
  std::vector<double> var(state->Var(best), state->Var(best) + dim);
  state->weights[best] *= 0.5;
  state->weights.push_back(state->weights[best]);
  for (int d = 0; d < dim; d++) {
    double sigma = std::sqrt(var[d]);
    state->means[(size_t)best * dim + d] = mean[d] - 0.2 * sigma;
    state->means.push_back(mean[d] + 0.2 * sigma);
    state->vars.push_back(var[d]);
  }
  state->Prepare();
}

}  // namespace patstd
