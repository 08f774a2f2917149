// patstd/src/retrieval.cc

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

#include "patstd/retrieval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "patstd/common.h"

namespace patstd {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string SearchMethod::Tag() const {
  std::string tag(3, '0');
  if (soft) tag[0] = '1';
  if (nbest) tag[1] = '1';
  if (dtw) tag[2] = '1';
  return tag;
}

SearchMethod SearchMethod::FromTag(const std::string &tag) {
  if (tag.size() != 3 || tag.find_first_not_of("01") != std::string::npos)
    throw UsageError("malformed search method tag: " + tag);
  SearchMethod g;
  g.soft = tag[0] == '1';
  g.nbest = tag[1] == '1';
  g.dtw = tag[2] == '1';
  return g;
}

SearchMethod SearchMethod::FromBits(int bits) {
  if (bits < 0 || bits > 7)
    throw UsageError(StringPrintf("search method bits out of range: %d", bits));
  return {(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0};
}

std::vector<SearchMethod> SearchMethod::All() {
  std::vector<SearchMethod> all;
  for (int bits = 0; bits < 8; bits++)
    all.push_back({(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
  return all;
}

MatchingMatrix BuildMatchingMatrix(const Transcription &doc,
                                   const PosteriorgramSequence &doc_pg,
                                   const Transcription &query,
                                   const PosteriorgramSequence &query_pg,
                                   const SimilarityMatrix &similarity,
                                   const SearchMethod &gamma) {
  if (gamma.soft != (similarity.mode == SimilarityMode::kSoft))
    throw DataError("similarity matrix mode does not match search method");
  MatchingMatrix w;
  const int n = similarity.n;
  if (!gamma.nbest) {
    const int D = static_cast<int>(doc.tokens.size());
    const int Q = static_cast<int>(query.tokens.size());
    w.Resize(D, Q);
    for (int i = 0; i < D; i++) {
      int di = doc.tokens[i].pattern;
      if (di < 0 || di >= n)
        throw DataError("document pattern index outside similarity matrix");
      for (int j = 0; j < Q; j++) {
        int qj = query.tokens[j].pattern;
        if (qj < 0 || qj >= n)
          throw DataError("query pattern index outside similarity matrix");
        w.Set(i, j, similarity.At(di, qj));
      }
    }
    return w;
  }

  if (doc_pg.psi != similarity.psi || query_pg.psi != similarity.psi)
    throw DataError(StringPrintf(
        "granularity mismatch: posteriorgrams %s/%s vs similarity %s",
        doc_pg.psi.Tag().c_str(), query_pg.psi.Tag().c_str(),
        similarity.psi.Tag().c_str()));
  const int D = doc_pg.NumPositions();
  const int Q = query_pg.NumPositions();
  w.Resize(D, Q);
  for (int i = 0; i < D; i++) {
    for (int j = 0; j < Q; j++) {
      double sum = 0.0;
      for (const auto &[a, pa] : doc_pg.positions[i])
        for (const auto &[b, pb] : query_pg.positions[j])
          sum += pa * similarity.At(a, b) * pb;
      w.Set(i, j, sum);
    }
  }
  return w;
}

double ScoreSub(const MatchingMatrix &w) {
  const int D = w.rows, Q = w.cols;
  if (D == 0 || Q == 0) throw DataError("empty matching matrix");
  if (D >= Q) {
    double best = kNegInf;
    for (int off = 0; off <= D - Q; off++) {
      double s = 0.0;
      for (int j = 0; j < Q; j++) s += w.At(off + j, j);
      if (s > best) best = s;
    }
    return best;
  }
  // Document shorter than query: best full overlap of the document inside
  // the query, normalized by the document length.
  double best = kNegInf;
  for (int off = 0; off <= Q - D; off++) {
    double s = 0.0;
    for (int i = 0; i < D; i++) s += w.At(i, off + i);
    if (s > best) best = s;
  }
  return best / D;
}

double ScoreDtw(const MatchingMatrix &w, bool normalized) {
  const int D = w.rows, Q = w.cols;
  if (D == 0 || Q == 0) throw DataError("empty matching matrix");

  // Exact search over (cell, path length): slice `len` only depends on
  // slice `len-1`, so two rolling D x Q tables suffice.
  std::vector<double> prev((size_t)D * Q, kNegInf), cur((size_t)D * Q, kNegInf);
  double best = kNegInf;
  for (int i = 0; i < D; i++) prev[(size_t)i * Q] = w.At(i, 0);
  if (Q == 1)
    for (int i = 0; i < D; i++)
      best = std::max(best, prev[(size_t)i * Q]);

  const int max_len = D + Q - 1;
  for (int len = 2; len <= max_len; len++) {
    std::fill(cur.begin(), cur.end(), kNegInf);
    for (int i = 0; i < D; i++) {
      for (int j = 0; j < Q; j++) {
        double b = kNegInf;
        if (i > 0) b = std::max(b, prev[(size_t)(i - 1) * Q + j]);
        if (j > 0) b = std::max(b, prev[(size_t)i * Q + j - 1]);
        if (i > 0 && j > 0) b = std::max(b, prev[(size_t)(i - 1) * Q + j - 1]);
        cur[(size_t)i * Q + j] = b == kNegInf ? kNegInf : b + w.At(i, j);
      }
    }
    for (int i = 0; i < D; i++) {
      double end = cur[(size_t)i * Q + Q - 1];
      if (end == kNegInf) continue;
      best = std::max(best, normalized ? end / len : end);
    }
    std::swap(prev, cur);
  }
  return best;
}

double Relevance(const Transcription &doc, const PosteriorgramSequence &doc_pg,
                 const Transcription &query,
                 const PosteriorgramSequence &query_pg,
                 const SimilarityMatrix &similarity, const SearchMethod &gamma,
                 bool dtw_normalized) {
  MatchingMatrix w =
      BuildMatchingMatrix(doc, doc_pg, query, query_pg, similarity, gamma);
  return gamma.dtw ? ScoreDtw(w, dtw_normalized) : ScoreSub(w);
}

MatchingMatrix BuildFrameMatrix(const FeatureSequence &query,
                                const FeatureSequence &doc) {
  const int D = doc.NumFrames(), Q = query.NumFrames();
  if (D == 0 || Q == 0) throw DataError("empty feature sequence");
  if (doc.dim != query.dim) throw DataError("feature dimension mismatch");
  const int dim = doc.dim;

  std::vector<double> doc_norm(D), query_norm(Q);
  for (int i = 0; i < D; i++) {
    const float *x = doc.Frame(i);
    double s = 0.0;
    for (int d = 0; d < dim; d++) s += static_cast<double>(x[d]) * x[d];
    doc_norm[i] = std::sqrt(s);
  }
  for (int j = 0; j < Q; j++) {
    const float *x = query.Frame(j);
    double s = 0.0;
    for (int d = 0; d < dim; d++) s += static_cast<double>(x[d]) * x[d];
    query_norm[j] = std::sqrt(s);
  }

  MatchingMatrix w;
  w.Resize(D, Q);
  for (int i = 0; i < D; i++) {
    const float *x = doc.Frame(i);
    for (int j = 0; j < Q; j++) {
      const float *y = query.Frame(j);
      double cos = 0.0;
      if (doc_norm[i] > 0.0 && query_norm[j] > 0.0) {
        double dot = 0.0;
        for (int d = 0; d < dim; d++) dot += static_cast<double>(x[d]) * y[d];
        cos = dot / (doc_norm[i] * query_norm[j]);
      }
      w.Set(i, j, 0.5 * (1.0 + cos));
    }
  }
  return w;
}

double FrameDtwBaseline(const FeatureSequence &query,
                        const FeatureSequence &doc, bool normalized) {
  return ScoreDtw(BuildFrameMatrix(query, doc), normalized);
}

const ScoreTable *RelevanceTable::Find(const GranularityConfig &psi,
                                       const SearchMethod &gamma) const {
  for (const auto &t : tables)
    if (t.psi == psi && t.gamma == gamma) return &t;
  return nullptr;
}

void RelevanceTable::Sort() {
  std::sort(tables.begin(), tables.end(),
            [](const ScoreTable &a, const ScoreTable &b) {
              if (a.psi != b.psi) return a.psi < b.psi;
              return a.gamma < b.gamma;
            });
}

std::map<std::pair<std::string, std::string>, double> Fuse(
    const RelevanceTable &table, const LambdaSet &lambda) {
  std::map<std::pair<std::string, std::string>, double> fused;
  for (const auto &t : table.tables)
    for (const auto &[key, value] : t.scores) fused[key] = 0.0;

  for (const auto &[psi, gamma_bits] : lambda) {
    SearchMethod gamma = SearchMethod::FromBits(gamma_bits);
    const ScoreTable *t = table.Find(psi, gamma);
    if (t == nullptr)
      throw DataError(StringPrintf("missing scores for enabled method %s %s",
                                   psi.Tag().c_str(), gamma.Tag().c_str()));
    if (t->scores.size() != fused.size())
      throw DataError(StringPrintf("score table %s %s covers %zu pairs, expected %zu",
                                   psi.Tag().c_str(), gamma.Tag().c_str(),
                                   t->scores.size(), fused.size()));
    for (const auto &[key, value] : t->scores) fused.at(key) += value;
  }
  return fused;
}

std::map<std::string, std::vector<std::pair<std::string, double>>>
RankByQuery(
    const std::map<std::pair<std::string, std::string>, double> &fused) {
  std::map<std::string, std::vector<std::pair<std::string, double>>> ranked;
  for (const auto &[key, score] : fused)
    ranked[key.first].push_back({key.second, score});
  for (auto &[query, docs] : ranked)
    std::sort(docs.begin(), docs.end(),
              [](const auto &a, const auto &b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
  return ranked;
}

void WriteScoreTables(const std::string &path, const RelevanceTable &table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write score table: " + path);
  out << "# query\tdoc\tpsi\tgamma\tscore\n";
  for (const auto &t : table.tables)
    for (const auto &[key, score] : t.scores)
      out << key.first << "\t" << key.second << "\t" << t.psi.Tag() << "\t"
          << t.gamma.Tag() << "\t" << FormatDouble(score) << "\n";
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

RelevanceTable ReadScoreTables(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("unreadable score table: " + path);
  std::map<std::pair<std::string, std::string>, ScoreTable> grouped;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string query, doc, psi_tag, gamma_tag, score_str;
    if (!std::getline(ss, query, '\t') || !std::getline(ss, doc, '\t') ||
        !std::getline(ss, psi_tag, '\t') || !std::getline(ss, gamma_tag, '\t') ||
        !std::getline(ss, score_str))
      throw DataError(StringPrintf("%s:%d: malformed score record",
                                   path.c_str(), lineno));
    ScoreTable &t = grouped[{psi_tag, gamma_tag}];
    t.psi = GranularityConfig::FromTag(psi_tag);
    t.gamma = SearchMethod::FromTag(gamma_tag);
    t.scores[{query, doc}] = std::stod(score_str);
  }
  RelevanceTable table;
  for (auto &[key, t] : grouped) table.tables.push_back(std::move(t));
  table.Sort();
  return table;
}

void WriteRankings(
    const std::string &path,
    const std::map<std::string, std::vector<std::pair<std::string, double>>>
        &rankings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write rankings: " + path);
  out << "# query\trank\tdoc\tscore\n";
  for (const auto &[query, docs] : rankings)
    for (size_t r = 0; r < docs.size(); r++)
      out << query << "\t" << (r + 1) << "\t" << docs[r].first << "\t"
          << FormatDouble(docs[r].second) << "\n";
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

void WriteLambdaFile(const std::string &path, const RelevanceTable &table,
                     const LambdaSet &lambda) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write lambda file: " + path);
  out << "# psi\tgamma\tlambda\n";
  for (const auto &t : table.tables) {
    bool enabled = lambda.count({t.psi, t.gamma.Bits()}) > 0;
    out << t.psi.Tag() << "\t" << t.gamma.Tag() << "\t" << (enabled ? 1 : 0)
        << "\n";
  }
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

LambdaSet ReadLambdaFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("unreadable lambda file: " + path);
  LambdaSet lambda;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string psi_tag, gamma_tag, value;
    if (!std::getline(ss, psi_tag, '\t') || !std::getline(ss, gamma_tag, '\t') ||
        !std::getline(ss, value))
      throw DataError(StringPrintf("%s:%d: malformed lambda record",
                                   path.c_str(), lineno));
    if (value != "0" && value != "1")
      throw DataError(StringPrintf("%s:%d: lambda must be 0 or 1",
                                   path.c_str(), lineno));
    if (value == "1")
      lambda.insert({GranularityConfig::FromTag(psi_tag),
                     SearchMethod::FromTag(gamma_tag).Bits()});
  }
  return lambda;
}

}  // namespace patstd
