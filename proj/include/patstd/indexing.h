// patstd/include/patstd/indexing.h

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

#ifndef PATSTD_INDEXING_H_
#define PATSTD_INDEXING_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "patstd/binary-io.h"
#include "patstd/decode.h"
#include "patstd/feature.h"
#include "patstd/pattern-hmm.h"

namespace patstd {

// Per-position probability vectors over the pattern inventory, one vector
// per 1-best token, stored sparse as (pattern, mass) pairs sorted by
// pattern. Every position sums to 1.
struct PosteriorgramSequence {
  std::string utterance_id;
  GranularityConfig psi;
  std::vector<std::vector<std::pair<int, double>>> positions;

  int NumPositions() const { return static_cast<int>(positions.size()); }
};

// Offline decoding results for a whole corpus under one granularity.
struct ArchiveIndex {
  GranularityConfig psi;
  int nbest_n = 0;
  std::map<std::string, Transcription> transcriptions;
  std::map<std::string, NBestList> nbest;
  std::map<std::string, PosteriorgramSequence> posteriorgrams;
  std::map<std::string, std::string> failures;  // utterance id -> error
};

// Accumulates frame-label durations within each 1-best token span across
// all N-best entries, uniformly weighted, normalized by span length times
// entry count. With a single entry every vector is one-hot.
PosteriorgramSequence BuildPosteriorgram(const NBestList &nbest,
                                         const Transcription &boundaries,
                                         int n);

// Decodes every utterance (1-best, N-best, posteriorgrams). Per-utterance
// failures are recorded and the rest of the index is still built.
ArchiveIndex BuildIndex(const PatternSet &set,
                        const std::vector<FeatureSequence> &corpus, int N,
                        int num_workers = 1);

void WriteArchiveIndex(const std::string &path, const ArchiveIndex &index,
                       const Provenance &prov);
ArchiveIndex ReadArchiveIndex(const std::string &path,
                              Provenance *prov = nullptr);

// 1-best transcriptions as line-delimited text, in utterance id order.
void WriteIndexTranscripts(const std::string &path, const ArchiveIndex &index);

}  // namespace patstd

#endif  // PATSTD_INDEXING_H_
