// patstd/include/patstd/discovery.h

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

#ifndef PATSTD_DISCOVERY_H_
#define PATSTD_DISCOVERY_H_

#include <map>
#include <string>
#include <vector>

#include "patstd/baum-welch.h"
#include "patstd/feature.h"
#include "patstd/pattern-hmm.h"

namespace patstd {

struct DiscoveryConfig {
  std::vector<GranularityConfig> grid;
  int max_iterations = 10;
  // Training stops once the fraction of changed frame labels is <= this.
  double convergence_threshold = 0.01;
  int em_steps = 3;  // Baum-Welch steps per label update
  uint64_t seed = 0;
  int num_workers = 1;

  void Validate() const;
};

struct GridResult {
  std::map<GranularityConfig, PatternSet> sets;
  std::map<GranularityConfig, std::string> errors;  // per-psi failures
};

// Per-dimension variance floor: 1e-3 of the global per-dimension variance
// of the corpus (with a tiny absolute floor for degenerate data).
std::vector<double> ComputeVarianceFloor(
    const std::vector<FeatureSequence> &corpus);

// Initial labels: every utterance tiled into segments of target length 3m
// frames (the last segment absorbs the remainder), segment mean vectors
// clustered into n groups by seeded k-means with 10 restarts.
std::vector<Transcription> InitializeLabels(
    const std::vector<FeatureSequence> &corpus, const GranularityConfig &psi,
    uint64_t seed);

// Flat-start parameters from labels: each token is chunked evenly into m
// state bins, per-state Gaussians estimated from the hard assignment, then
// split up to l components. Self-loops start at 0.5.
PatternSet InitialModelFromLabels(const std::vector<FeatureSequence> &corpus,
                                  const std::vector<Transcription> &labels,
                                  const GranularityConfig &psi,
                                  const std::vector<double> &variance_floor);

// Fraction of corpus frames whose pattern label differs between a and b.
double LabelChangeFraction(const std::vector<Transcription> &a,
                           const std::vector<Transcription> &b);

// The discovery loop: initial labels, then alternating re-estimation and
// free-pattern decoding until the label-change fraction reaches the
// threshold or max_iterations.
PatternSet Discover(const std::vector<FeatureSequence> &corpus,
                    const GranularityConfig &psi,
                    const DiscoveryConfig &config);

// Continuation training: split the largest-weight component of every state
// of the converged base set, then rerun the training loop starting from the
// base set's own decoded labels. Result has l+1 Gaussians per state.
PatternSet GrowGaussians(const PatternSet &base,
                         const std::vector<FeatureSequence> &corpus,
                         const DiscoveryConfig &config);

// Full granularity grid: per (m,n) cell, discover at l=1 and chain
// grow_gaussians upward; cells run independently (identical results under
// any worker count or grid order). Failures are recorded per psi.
GridResult RunGrid(const std::vector<FeatureSequence> &corpus,
                   const DiscoveryConfig &config);

// All (m,n,l) combinations of the given value lists, sorted.
std::vector<GranularityConfig> ExpandGrid(const std::vector<int> &m_values,
                                          const std::vector<int> &n_values,
                                          const std::vector<int> &l_values);

}  // namespace patstd

#endif  // PATSTD_DISCOVERY_H_
