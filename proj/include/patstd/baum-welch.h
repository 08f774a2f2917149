// patstd/include/patstd/baum-welch.h

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

#ifndef PATSTD_BAUM_WELCH_H_
#define PATSTD_BAUM_WELCH_H_

#include <vector>

#include "patstd/decode.h"
#include "patstd/feature.h"
#include "patstd/pattern-hmm.h"

namespace patstd {

struct BaumWelchResult {
  PatternSet set;                      // re-estimated parameters
  double input_log_likelihood = 0.0;   // corpus LL of the INPUT set under labels
};

// One EM step: forward-backward over every labeled segment, per-pattern
// re-estimation of mixtures and transitions. Patterns without any labeled
// segment keep their parameters. The fixed-label corpus log-likelihood of
// the returned set is never below input_log_likelihood (up to the variance
// floor and the 1e-6 transition clamp). labels[i] must belong to corpus[i].
BaumWelchResult BaumWelchStep(const PatternSet &set,
                              const std::vector<FeatureSequence> &corpus,
                              const std::vector<Transcription> &labels,
                              int num_workers = 1);

// Re-seeds every pattern with zero labeled frames by splitting the pattern
// currently holding the most frames: the dead pattern becomes a copy with
// means moved +0.2 sigma, the donor's means move -0.2 sigma. Returns the
// number of patterns re-seeded. Deterministic.
int ReseedDeadPatterns(PatternSet *set,
                       const std::vector<Transcription> &labels);

}  // namespace patstd

#endif  // PATSTD_BAUM_WELCH_H_
