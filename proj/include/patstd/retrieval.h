// patstd/include/patstd/retrieval.h

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

#ifndef PATSTD_RETRIEVAL_H_
#define PATSTD_RETRIEVAL_H_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "patstd/feature.h"
#include "patstd/indexing.h"
#include "patstd/similarity.h"

namespace patstd {

// One of the 8 search methods, written as bits (Soft, Nbest, DTW):
// soft vs hard similarity, posteriorgram vs 1-best matching, DTW vs SUB.
struct SearchMethod {
  bool soft = false;
  bool nbest = false;
  bool dtw = false;

  int Bits() const { return (soft ? 4 : 0) | (nbest ? 2 : 0) | (dtw ? 1 : 0); }
  std::string Tag() const;  // "000" .. "111" in (Soft,Nbest,DTW) order
  static SearchMethod FromTag(const std::string &tag);
  static SearchMethod FromBits(int bits);
  static std::vector<SearchMethod> All();

  bool operator==(const SearchMethod &o) const { return Bits() == o.Bits(); }
  bool operator<(const SearchMethod &o) const { return Bits() < o.Bits(); }
};

// Pattern-level matching matrix between one document and one query:
// D rows (document positions) by Q columns (query positions).
struct MatchingMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major

  double At(int i, int j) const { return values[(size_t)i * cols + j]; }
  void Set(int i, int j, double v) { values[(size_t)i * cols + j] = v; }
  void Resize(int r, int c) {
    rows = r;
    cols = c;
    values.assign((size_t)r * c, 0.0);
  }
};

// W(i,j) = S(d_i, q_j) for 1-best matching, or P_i^T S P_j when gamma.nbest
// selects posteriorgram matching. Both utterances must be indexed under the
// similarity matrix's granularity.
MatchingMatrix BuildMatchingMatrix(const Transcription &doc,
                                   const PosteriorgramSequence &doc_pg,
                                   const Transcription &query,
                                   const PosteriorgramSequence &query_pg,
                                   const SimilarityMatrix &similarity,
                                   const SearchMethod &gamma);

// Best warp-free diagonal: max over offsets of the sum of W along a full
// query-length diagonal. When the document is shorter than the query the
// roles are swapped and the best sum is normalized by the document length.
double ScoreSub(const MatchingMatrix &w);

// Best monotone path (steps down/right/diagonal) covering every query
// column, free document start and end rows. Normalized by path length by
// default; `normalized=false` returns the raw accumulated sum.
double ScoreDtw(const MatchingMatrix &w, bool normalized = true);

// Composition: build W for (doc, query) under gamma, then SUB or DTW.
double Relevance(const Transcription &doc, const PosteriorgramSequence &doc_pg,
                 const Transcription &query,
                 const PosteriorgramSequence &query_pg,
                 const SimilarityMatrix &similarity, const SearchMethod &gamma,
                 bool dtw_normalized = true);

// Frame-based DTW baseline over raw feature sequences: cosine similarity
// mapped to [0,1] via (1+cos)/2, then the same path rules as ScoreDtw.
double FrameDtwBaseline(const FeatureSequence &query,
                        const FeatureSequence &doc, bool normalized = true);
MatchingMatrix BuildFrameMatrix(const FeatureSequence &query,
                                const FeatureSequence &doc);

// All scores for one (psi, gamma) search method: (query id, doc id) -> R.
struct ScoreTable {
  GranularityConfig psi;
  SearchMethod gamma;
  std::map<std::pair<std::string, std::string>, double> scores;
};

// Scores across search methods plus binary fusion weights.
struct RelevanceTable {
  std::vector<ScoreTable> tables;  // unique (psi,gamma), kept sorted

  const ScoreTable *Find(const GranularityConfig &psi,
                         const SearchMethod &gamma) const;
  void Sort();
};

// Fusion weights: the set of (psi, gamma) pairs whose lambda is 1.
using LambdaSet = std::set<std::pair<GranularityConfig, int>>;

// Fused relevance: sum of the enabled tables. Every enabled (psi,gamma)
// must be present and all enabled tables must cover the same pairs.
std::map<std::pair<std::string, std::string>, double> Fuse(
    const RelevanceTable &table, const LambdaSet &lambda);

// Ranked documents per query: descending score, ties by ascending doc id.
std::map<std::string, std::vector<std::pair<std::string, double>>>
RankByQuery(const std::map<std::pair<std::string, std::string>, double> &fused);

// Text artifacts.
void WriteScoreTables(const std::string &path, const RelevanceTable &table);
RelevanceTable ReadScoreTables(const std::string &path);
void WriteRankings(
    const std::string &path,
    const std::map<std::string, std::vector<std::pair<std::string, double>>>
        &rankings);
void WriteLambdaFile(const std::string &path, const RelevanceTable &table,
                     const LambdaSet &lambda);
LambdaSet ReadLambdaFile(const std::string &path);

}  // namespace patstd

#endif  // PATSTD_RETRIEVAL_H_
