// patstd/include/patstd/decode.h

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

#ifndef PATSTD_DECODE_H_
#define PATSTD_DECODE_H_

#include "patstd/feature.h"
#include "patstd/pattern-hmm.h"

namespace patstd {

// Free-pattern Viterbi decoding: maximum-likelihood tiling of the utterance
// by pattern HMMs under a uniform 1/n pattern-transition prior. Each token
// enters its first state on its first frame and takes the final advance out
// of its last state on its last frame. Deterministic tie-breaks: lower
// pattern index, then shorter self-loop continuation (fixed scan order).
// Throws DataError when the utterance is shorter than m frames.
Transcription ViterbiFreeDecode(const PatternSet &set,
                                const FeatureSequence &features);

// Exact N-best token sequences: per-cell beams of distinct token histories,
// merged by best state path. Entry 1 equals ViterbiFreeDecode; entries are
// distinct as token sequences, sorted by descending score then lexicographic
// token sequence.
NBestList NBestDecode(const PatternSet &set, const FeatureSequence &features,
                      int N);

// Log-likelihood of the utterance under fixed labels: per token, the
// forward (sum over state paths) probability of its segment through its
// pattern HMM, plus the log 1/n entry prior. This is the quantity that one
// Baum-Welch step cannot decrease.
double LabeledLogLikelihood(const PatternSet &set,
                            const FeatureSequence &features,
                            const Transcription &labels);

}  // namespace patstd

#endif  // PATSTD_DECODE_H_
