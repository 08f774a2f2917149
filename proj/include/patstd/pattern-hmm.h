// patstd/include/patstd/pattern-hmm.h

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

#ifndef PATSTD_PATTERN_HMM_H_
#define PATSTD_PATTERN_HMM_H_

#include <string>
#include <tuple>
#include <vector>

#include "patstd/binary-io.h"
#include "patstd/gmm.h"

namespace patstd {

// Model granularity: m states per pattern HMM (temporal), n patterns
// (phonetic), l Gaussians per state (acoustic).
struct GranularityConfig {
  int m = 3;
  int n = 2;
  int l = 1;

  std::string Tag() const;  // "m3_n2_l1"
  static GranularityConfig FromTag(const std::string &tag);

  bool operator==(const GranularityConfig &o) const {
    return m == o.m && n == o.n && l == o.l;
  }
  bool operator!=(const GranularityConfig &o) const { return !(*this == o); }
  bool operator<(const GranularityConfig &o) const {
    return std::tie(m, n, l) < std::tie(o.m, o.n, o.l);
  }
};

// Strict left-to-right HMM over one acoustic pattern: self-loop or advance
// at each state, no skips. Every token therefore spans >= m frames.
struct PatternHmm {
  int pattern_index = 0;
  std::vector<GmmState> states;   // m emission states
  std::vector<double> self_loop;  // per state; advance prob = 1 - self_loop

  int NumStates() const { return static_cast<int>(states.size()); }
};

// Per-iteration record of the discovery loop.
struct IterationLog {
  int iteration = 0;
  double log_likelihood = 0.0;  // corpus decode log-likelihood
  double label_change = 0.0;    // fraction of frames whose label changed
};

// A converged set of n pattern HMMs at one granularity.
struct PatternSet {
  GranularityConfig config;
  int dim = 0;
  std::vector<PatternHmm> hmms;  // n entries, all sharing m and l
  std::vector<double> variance_floor;  // per-dimension absolute floor
  std::vector<IterationLog> training_log;
  std::string derived_from;  // tag of the parent set when grown, else ""

  // Throws InternalError when a structural invariant is violated.
  void Check() const;
};

// One decoded pattern token over frames [start, end], end inclusive.
struct Token {
  int pattern = 0;
  int start = 0;
  int end = 0;

  int Length() const { return end - start + 1; }
  bool operator==(const Token &o) const {
    return pattern == o.pattern && start == o.start && end == o.end;
  }
  bool operator<(const Token &o) const {
    return std::tie(start, pattern, end) < std::tie(o.start, o.pattern, o.end);
  }
};

// Decoded tiling of one utterance: tokens cover [0, num_frames) exactly.
struct Transcription {
  std::string utterance_id;
  std::vector<Token> tokens;
  double log_likelihood = 0.0;

  int NumFrames() const { return tokens.empty() ? 0 : tokens.back().end + 1; }
  // Expands tokens to one pattern label per frame.
  std::vector<int> FrameLabels() const;
};

// Up to N transcriptions in non-increasing score order; ties broken by
// lexicographic token sequence.
struct NBestList {
  std::string utterance_id;
  std::vector<Transcription> entries;
};

// Verifies the tiling invariants (coverage, spans >= m) for `num_frames`.
void CheckTranscription(const Transcription &t, int num_frames, int m);

// Pattern-set bundle: binary parameters plus a short text summary.
void WritePatternSet(const std::string &path, const PatternSet &set,
                     const Provenance &prov);
PatternSet ReadPatternSet(const std::string &path,
                          Provenance *prov = nullptr);
void WritePatternSetSummary(const std::string &path, const PatternSet &set);

// Line-delimited transcription records: id, then token triplets.
void WriteTranscriptions(const std::string &path,
                         const std::vector<Transcription> &transcriptions);
std::vector<Transcription> ReadTranscriptions(const std::string &path);

}  // namespace patstd

#endif  // PATSTD_PATTERN_HMM_H_
