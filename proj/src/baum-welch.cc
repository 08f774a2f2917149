// patstd/src/baum-welch.cc

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

#include "patstd/baum-welch.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patstd/common.h"

namespace patstd {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();
constexpr double kMinOccupancy = 1e-8;  // below this a component keeps old params
constexpr double kTransFloor = 1e-6;    // self-loop clamp, keeps log finite

double LogSumExp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Sufficient statistics for one pattern set, accumulated in a fixed order.
struct Accumulator {
  int n, m, l, dim;
  // occupancy[((p*m+s)*l+c)]; moments laid out per component * dim
  std::vector<double> occ, mean_acc, var_acc;
  std::vector<double> self_count, adv_count;  // n*m each
  double log_likelihood = 0.0;

  Accumulator(int n_in, int m_in, int l_in, int dim_in)
      : n(n_in), m(m_in), l(l_in), dim(dim_in) {
    occ.assign((size_t)n * m * l, 0.0);
    mean_acc.assign((size_t)n * m * l * dim, 0.0);
    var_acc.assign((size_t)n * m * l * dim, 0.0);
    self_count.assign((size_t)n * m, 0.0);
    adv_count.assign((size_t)n * m, 0.0);
  }

  void MergeFrom(const Accumulator &o) {
    for (size_t i = 0; i < occ.size(); i++) occ[i] += o.occ[i];
    for (size_t i = 0; i < mean_acc.size(); i++) mean_acc[i] += o.mean_acc[i];
    for (size_t i = 0; i < var_acc.size(); i++) var_acc[i] += o.var_acc[i];
    for (size_t i = 0; i < self_count.size(); i++)
      self_count[i] += o.self_count[i];
    for (size_t i = 0; i < adv_count.size(); i++)
      adv_count[i] += o.adv_count[i];
    log_likelihood += o.log_likelihood;
  }
};

// Forward-backward over one labeled segment: enter state 0 on the first
// frame, take the advance transition out of state m-1 on the last frame.
void AccumulateSegment(const PatternSet &set, const FeatureSequence &feats,
                       const Token &tok, Accumulator *acc) {
  const PatternHmm &h = set.hmms[tok.pattern];
  const int m = set.config.m, l = set.config.l, dim = set.dim;
  const int L = tok.Length();

  std::vector<double> log_self(m), log_adv(m);
  for (int s = 0; s < m; s++) {
    log_self[s] = std::log(h.self_loop[s]);
    log_adv[s] = std::log(1.0 - h.self_loop[s]);
  }

  // Emission log-likelihoods, per frame and state.
  std::vector<double> emis((size_t)L * m);
  for (int t = 0; t < L; t++)
    for (int s = 0; s < m; s++)
      emis[(size_t)t * m + s] =
          h.states[s].LogLikelihood(feats.Frame(tok.start + t));

  std::vector<double> alpha((size_t)L * m, kLogZero);
  alpha[0] = emis[0];
  for (int t = 1; t < L; t++) {
    for (int s = 0; s < m; s++) {
      double stay = alpha[(size_t)(t - 1) * m + s];
      if (stay != kLogZero) stay += log_self[s];
      double adv = s > 0 ? alpha[(size_t)(t - 1) * m + s - 1] : kLogZero;
      if (adv != kLogZero) adv += log_adv[s - 1];
      double in = LogSumExp(stay, adv);
      alpha[(size_t)t * m + s] =
          in == kLogZero ? kLogZero : in + emis[(size_t)t * m + s];
    }
  }
  double seg_ll = alpha[(size_t)(L - 1) * m + (m - 1)] + log_adv[m - 1];
  if (seg_ll == kLogZero || std::isnan(seg_ll))
    throw InternalError(StringPrintf(
        "infeasible segment [%d,%d] pattern %d in %s", tok.start, tok.end,
        tok.pattern, feats.utterance_id.c_str()));
  acc->log_likelihood += seg_ll - std::log(static_cast<double>(set.config.n));

  std::vector<double> beta((size_t)L * m, kLogZero);
  beta[(size_t)(L - 1) * m + (m - 1)] = log_adv[m - 1];
  for (int t = L - 2; t >= 0; t--) {
    for (int s = 0; s < m; s++) {
      double stay = beta[(size_t)(t + 1) * m + s];
      if (stay != kLogZero) stay += log_self[s] + emis[(size_t)(t + 1) * m + s];
      double adv = s + 1 < m ? beta[(size_t)(t + 1) * m + s + 1] : kLogZero;
      if (adv != kLogZero) adv += log_adv[s] + emis[(size_t)(t + 1) * m + s + 1];
      beta[(size_t)t * m + s] = LogSumExp(stay, adv);
    }
  }

  std::vector<double> comp_ll(l);
  for (int t = 0; t < L; t++) {
    const float *x = feats.Frame(tok.start + t);
    for (int s = 0; s < m; s++) {
      double a = alpha[(size_t)t * m + s], b = beta[(size_t)t * m + s];
      if (a == kLogZero || b == kLogZero) continue;
      double gamma = std::exp(a + b - seg_ll);
      if (gamma <= 0.0) continue;

      // Split state occupancy across mixture components.
      const GmmState &st = h.states[s];
      double state_ll = emis[(size_t)t * m + s];
      for (int c = 0; c < l; c++) comp_ll[c] = st.ComponentLogLikelihood(c, x);
      for (int c = 0; c < l; c++) {
        if (comp_ll[c] == kLogZero) continue;
        double g = gamma * std::exp(comp_ll[c] - state_ll);
        size_t ci = ((size_t)tok.pattern * m + s) * l + c;
        acc->occ[ci] += g;
        double *ma = &acc->mean_acc[ci * dim];
        double *va = &acc->var_acc[ci * dim];
        for (int d = 0; d < dim; d++) {
          ma[d] += g * x[d];
          va[d] += g * x[d] * x[d];
        }
      }

      // Transition posteriors out of (t, s).
      size_t ti = (size_t)tok.pattern * m + s;
      if (t + 1 < L) {
        double bs = beta[(size_t)(t + 1) * m + s];
        if (bs != kLogZero)
          acc->self_count[ti] += std::exp(
              a + log_self[s] + emis[(size_t)(t + 1) * m + s] + bs - seg_ll);
        if (s + 1 < m) {
          double bn = beta[(size_t)(t + 1) * m + s + 1];
          if (bn != kLogZero)
            acc->adv_count[ti] += std::exp(a + log_adv[s] +
                                           emis[(size_t)(t + 1) * m + s + 1] +
                                           bn - seg_ll);
        }
      }
    }
  }
  // The exit advance out of state m-1 happens exactly once per segment.
  acc->adv_count[(size_t)tok.pattern * m + (m - 1)] += 1.0;
}

}  // namespace

BaumWelchResult BaumWelchStep(const PatternSet &set,
                              const std::vector<FeatureSequence> &corpus,
                              const std::vector<Transcription> &labels,
                              int num_workers) {
  if (corpus.size() != labels.size())
    throw UsageError("corpus and labels differ in size");
  const int n = set.config.n, m = set.config.m, l = set.config.l;
  const int dim = set.dim;

  // Per-utterance accumulators merged in utterance order: results do not
  // depend on worker scheduling.
  std::vector<Accumulator> partials(
      corpus.size(), Accumulator(n, m, l, dim));
  ParallelFor(num_workers, static_cast<int>(corpus.size()), [&](int i) {
    CheckTranscription(labels[i], corpus[i].NumFrames(), m);
    for (const Token &tok : labels[i].tokens)
      AccumulateSegment(set, corpus[i], tok, &partials[i]);
  });
  Accumulator acc(n, m, l, dim);
  for (const auto &p : partials) acc.MergeFrom(p);

  for (double v : acc.occ)
    if (std::isnan(v)) throw InternalError("NaN in Baum-Welch accumulation");

  BaumWelchResult result;
  result.input_log_likelihood = acc.log_likelihood;
  result.set = set;
  PatternSet &out = result.set;

  for (int p = 0; p < n; p++) {
    // Zero assigned frames: keep the old parameters; re-seeding is a
    // separate, explicit step in the discovery loop.
    double total_p = 0.0;
    for (int s = 0; s < m; s++)
      for (int c = 0; c < l; c++) total_p += acc.occ[((size_t)p * m + s) * l + c];
    if (total_p <= 0.0) continue;

    PatternHmm &h = out.hmms[p];
    for (int s = 0; s < m; s++) {
      GmmState &st = h.states[s];
      double state_occ = 0.0;
      for (int c = 0; c < l; c++) state_occ += acc.occ[((size_t)p * m + s) * l + c];
      if (state_occ <= 0.0)
        throw InternalError(StringPrintf(
            "state %d of labeled pattern %d has zero occupancy", s, p));
      for (int c = 0; c < l; c++) {
        size_t ci = ((size_t)p * m + s) * l + c;
        double g = acc.occ[ci];
        st.weights[c] = g / state_occ;
        if (g < kMinOccupancy) continue;  // keep old mean/variance
        for (int d = 0; d < dim; d++) {
          double mean = acc.mean_acc[ci * dim + d] / g;
          double var = acc.var_acc[ci * dim + d] / g - mean * mean;
          st.means[(size_t)c * dim + d] = mean;
          st.vars[(size_t)c * dim + d] =
              std::max(var, set.variance_floor.empty()
                                ? 1e-6
                                : set.variance_floor[d]);
        }
      }
      st.Prepare();

      size_t ti = (size_t)p * m + s;
      double denom = acc.self_count[ti] + acc.adv_count[ti];
      if (denom > 0.0) {
        double sl = acc.self_count[ti] / denom;
        h.self_loop[s] = std::min(1.0 - kTransFloor, std::max(kTransFloor, sl));
      }
    }
  }
  out.Check();
  return result;
}

int ReseedDeadPatterns(PatternSet *set,
                       const std::vector<Transcription> &labels) {
  const int n = set->config.n;
  std::vector<double> frames(n, 0.0);
  for (const auto &t : labels)
    for (const auto &tok : t.tokens) frames[tok.pattern] += tok.Length();

  int reseeded = 0;
  for (int p = 0; p < n; p++) {
    if (frames[p] > 0.0) continue;
    int donor = 0;
    for (int q = 1; q < n; q++)
      if (frames[q] > frames[donor]) donor = q;
    if (frames[donor] <= 0.0) break;  // nothing left to split

    PatternHmm &dead = set->hmms[p];
    PatternHmm &src = set->hmms[donor];
    dead.self_loop = src.self_loop;
    dead.states = src.states;
    for (int s = 0; s < set->config.m; s++) {
      GmmState &a = src.states[s];
      GmmState &b = dead.states[s];
      for (size_t i = 0; i < a.means.size(); i++) {
        double sigma = std::sqrt(a.vars[i]);
        b.means[i] = a.means[i] + 0.2 * sigma;
        a.means[i] = a.means[i] - 0.2 * sigma;
      }
      a.Prepare();
      b.Prepare();
    }
    frames[p] = frames[donor] * 0.5;
    frames[donor] *= 0.5;
    reseeded++;
  }
  return reseeded;
}

}  // namespace patstd
