// patstd/src/decode.cc

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

#include "patstd/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "patstd/common.h"

namespace patstd {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

double LogSumExp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// One in-progress decoding hypothesis: an interned token-history id plus the
// best state-path score leading here under that history.
struct Hyp {
  int32_t hist;
  double score;
};

// Token histories are interned as (parent, pattern, start) nodes so that
// hypotheses with identical token sequences can be merged by max score.
// Token end frames are implied: each token ends where its successor starts.
struct HistoryArena {
  struct Node {
    int32_t parent;
    int32_t pattern;
    int32_t start;
  };
  std::vector<Node> nodes;
  std::unordered_map<uint64_t, int32_t> intern;

  int32_t Add(int32_t parent, int pattern, int start) {
    if (start >= (1 << 20) || pattern >= (1 << 16) ||
        parent + 1 >= (1 << 27))
      throw InternalError("utterance too large for n-best interning");
    uint64_t key = (static_cast<uint64_t>(parent + 1) << 36) |
                   (static_cast<uint64_t>(pattern) << 20) |
                   static_cast<uint64_t>(start);
    auto it = intern.find(key);
    if (it != intern.end()) return it->second;
    int32_t id = static_cast<int32_t>(nodes.size());
    nodes.push_back({parent, static_cast<int32_t>(pattern),
                     static_cast<int32_t>(start)});
    intern.emplace(key, id);
    return id;
  }

  std::vector<Token> Materialize(int32_t hist, int last_frame) const {
    std::vector<Token> tokens;
    int end = last_frame;
    for (int32_t h = hist; h >= 0; h = nodes[h].parent) {
      tokens.push_back({static_cast<int>(nodes[h].pattern),
                        static_cast<int>(nodes[h].start), end});
      end = nodes[h].start - 1;
    }
    std::reverse(tokens.begin(), tokens.end());
    return tokens;
  }
};

// A per-cell beam: at most N hypotheses with distinct histories, sorted by
// descending score with history-creation order breaking ties.
class Beam {
 public:
  explicit Beam(int capacity) : capacity_(capacity) {}

  void Clear() { hyps_.clear(); }
  bool Empty() const { return hyps_.empty(); }
  const std::vector<Hyp> &hyps() const { return hyps_; }

  // Merges sorted candidate lists already gathered in `scratch`.
  void FillFrom(std::vector<Hyp> *scratch) {
    std::sort(scratch->begin(), scratch->end(), [](const Hyp &a, const Hyp &b) {
      if (a.score != b.score) return a.score > b.score;
      return a.hist < b.hist;
    });
    hyps_.clear();
    for (const Hyp &h : *scratch) {
      if (static_cast<int>(hyps_.size()) >= capacity_) break;
      bool dup = false;
      for (const Hyp &kept : hyps_)
        if (kept.hist == h.hist) {
          dup = true;
          break;
        }
      if (!dup) hyps_.push_back(h);
    }
  }

 private:
  int capacity_;
  std::vector<Hyp> hyps_;
};

struct LogModel {
  std::vector<double> log_self;  // n*m
  std::vector<double> log_adv;   // n*m
  double log_prior;              // log 1/n
};

LogModel PrepareLogModel(const PatternSet &set) {
  const int n = set.config.n, m = set.config.m;
  LogModel lm;
  lm.log_self.resize((size_t)n * m);
  lm.log_adv.resize((size_t)n * m);
  for (int p = 0; p < n; p++)
    for (int s = 0; s < m; s++) {
      double sl = set.hmms[p].self_loop[s];
      lm.log_self[(size_t)p * m + s] = std::log(sl);
      lm.log_adv[(size_t)p * m + s] = std::log(1.0 - sl);
    }
  lm.log_prior = -std::log(static_cast<double>(n));
  return lm;
}

void CheckDecodeInput(const PatternSet &set, const FeatureSequence &features) {
  if (features.dim != set.dim)
    throw DataError(StringPrintf(
        "feature dim %d does not match model dim %d for %s", features.dim,
        set.dim, features.utterance_id.c_str()));
  if (features.NumFrames() < set.config.m)
    throw DataError(StringPrintf(
        "utterance %s has %d frames, shorter than m=%d",
        features.utterance_id.c_str(), features.NumFrames(), set.config.m));
}

}  // namespace

NBestList NBestDecode(const PatternSet &set, const FeatureSequence &features,
                      int N) {
  if (N < 1) throw UsageError("nbest N must be >= 1");
  CheckDecodeInput(set, features);
  const int n = set.config.n, m = set.config.m;
  const int T = features.NumFrames();
  LogModel lm = PrepareLogModel(set);
  HistoryArena arena;

  // cells[p*m+s] is the beam for "frame t emitted by state s of pattern p".
  std::vector<Beam> cur((size_t)n * m, Beam(N)), prev((size_t)n * m, Beam(N));
  Beam ends(N);  // token-end hypotheses at the previous frame
  std::vector<double> emis((size_t)n * m);
  std::vector<Hyp> scratch, end_scratch;

  for (int t = 0; t < T; t++) {
    for (int p = 0; p < n; p++)
      for (int s = 0; s < m; s++)
        emis[(size_t)p * m + s] = set.hmms[p].states[s].LogLikelihood(
            features.Frame(t));

    for (int p = 0; p < n; p++) {
      for (int s = 0; s < m; s++) {
        const size_t c = (size_t)p * m + s;
        scratch.clear();
        double e = emis[c];
        if (t > 0) {
          for (const Hyp &h : prev[c].hyps())
            scratch.push_back({h.hist, h.score + lm.log_self[c] + e});
          if (s > 0)
            for (const Hyp &h : prev[c - 1].hyps())
              scratch.push_back(
                  {h.hist, h.score + lm.log_adv[c - 1] + e});
        }
        if (s == 0) {
          if (t == 0) {
            scratch.push_back(
                {arena.Add(-1, p, 0), lm.log_prior + e});
          } else {
            for (const Hyp &h : ends.hyps())
              scratch.push_back({arena.Add(h.hist, p, t),
                                 h.score + lm.log_prior + e});
          }
        }
        cur[c].FillFrom(&scratch);
      }
    }

    end_scratch.clear();
    for (int p = 0; p < n; p++) {
      const size_t c = (size_t)p * m + (m - 1);
      for (const Hyp &h : cur[c].hyps())
        end_scratch.push_back({h.hist, h.score + lm.log_adv[c]});
    }
    ends.FillFrom(&end_scratch);
    std::swap(cur, prev);
  }

  if (ends.Empty())
    throw InternalError("decode produced no complete hypothesis");

  NBestList list;
  list.utterance_id = features.utterance_id;
  for (const Hyp &h : ends.hyps()) {
    Transcription t;
    t.utterance_id = features.utterance_id;
    t.tokens = arena.Materialize(h.hist, T - 1);
    t.log_likelihood = h.score;
    list.entries.push_back(std::move(t));
  }
  std::sort(list.entries.begin(), list.entries.end(),
            [](const Transcription &a, const Transcription &b) {
              if (a.log_likelihood != b.log_likelihood)
                return a.log_likelihood > b.log_likelihood;
              return a.tokens < b.tokens;
            });
  for (const auto &entry : list.entries)
    CheckTranscription(entry, T, m);
  return list;
}

Transcription ViterbiFreeDecode(const PatternSet &set,
                                const FeatureSequence &features) {
  return NBestDecode(set, features, 1).entries.front();
}

double LabeledLogLikelihood(const PatternSet &set,
                            const FeatureSequence &features,
                            const Transcription &labels) {
  CheckDecodeInput(set, features);
  CheckTranscription(labels, features.NumFrames(), set.config.m);
  const int m = set.config.m;
  const double log_prior = -std::log(static_cast<double>(set.config.n));

  double total = 0.0;
  std::vector<double> alpha(m), next(m);
  for (const Token &tok : labels.tokens) {
    const PatternHmm &h = set.hmms[tok.pattern];
    std::fill(alpha.begin(), alpha.end(), kLogZero);
    alpha[0] = h.states[0].LogLikelihood(features.Frame(tok.start));
    for (int t = tok.start + 1; t <= tok.end; t++) {
      for (int s = 0; s < m; s++) {
        double stay = alpha[s] == kLogZero
                          ? kLogZero
                          : alpha[s] + std::log(h.self_loop[s]);
        double adv = (s > 0 && alpha[s - 1] != kLogZero)
                         ? alpha[s - 1] + std::log(1.0 - h.self_loop[s - 1])
                         : kLogZero;
        double in = LogSumExp(stay, adv);
        next[s] = in == kLogZero
                      ? kLogZero
                      : in + h.states[s].LogLikelihood(features.Frame(t));
      }
      std::swap(alpha, next);
    }
    double seg = alpha[m - 1];
    if (seg == kLogZero)
      throw InternalError(StringPrintf(
          "infeasible labeled segment [%d,%d] for pattern %d", tok.start,
          tok.end, tok.pattern));
    total += log_prior + seg + std::log(1.0 - h.self_loop[m - 1]);
  }
  if (std::isnan(total))
    throw InternalError("NaN in labeled log-likelihood");
  return total;
}

}  // namespace patstd
