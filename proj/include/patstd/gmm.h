// patstd/include/patstd/gmm.h

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

#ifndef PATSTD_GMM_H_
#define PATSTD_GMM_H_

#include <vector>

namespace patstd {

// Diagonal-covariance Gaussian mixture serving as one HMM emission state.
// Parameters are stored in double precision; call Prepare() after any
// mutation to refresh the cached per-component log constants.
struct GmmState {
  int dim = 0;
  std::vector<double> weights;  // one per component, sums to 1
  std::vector<double> means;    // component-major, num_components * dim
  std::vector<double> vars;     // diagonal variances, same layout
  std::vector<double> gconsts;  // cached: log w_c - 0.5*(dim*log(2pi)+sum log var)

  int NumComponents() const { return static_cast<int>(weights.size()); }
  const double *Mean(int c) const { return &means[(size_t)c * dim]; }
  const double *Var(int c) const { return &vars[(size_t)c * dim]; }

  void Prepare();

  // Log density of the mixture at `frame` (log-sum-exp over components).
  // Components with zero weight are skipped.
  double LogLikelihood(const float *frame) const;

  // Log of w_c * N(frame; mean_c, var_c); -inf for zero-weight components.
  double ComponentLogLikelihood(int c, const float *frame) const;
};

// A single Gaussian with unit weight; building block for initialization.
GmmState MakeSingleGaussian(int dim, const std::vector<double> &mean,
                            const std::vector<double> &var);

// Splits the largest-weight component in two: weight halved, means moved
// +/- 0.2 standard deviations. Leaves other components untouched.
void SplitLargestComponent(GmmState *state);

}  // namespace patstd

#endif  // PATSTD_GMM_H_
