// patstd/tests/test-retrieval.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "patstd/common.h"
#include "patstd/retrieval.h"
#include "testing-util.h"

using namespace patstd;
using testing::OracleDtw;
using testing::OracleSub;
using testing::RandomFeatures;
using testing::RandomMatchingMatrix;
using testing::TempDir;

namespace {

SimilarityMatrix SoftExample() {
  SimilarityMatrix s;
  s.psi = {2, 2, 1};
  s.mode = SimilarityMode::kSoft;
  s.beta = 200.0;
  s.n = 2;
  s.values = {1.0f, 0.4f, 0.4f, 1.0f};
  return s;
}

SimilarityMatrix HardIdentity(int n) {
  SimilarityMatrix s;
  s.psi = {2, n, 1};
  s.mode = SimilarityMode::kHard;
  s.n = n;
  s.values.assign((size_t)n * n, 0.0f);
  for (int i = 0; i < n; i++) s.values[(size_t)i * n + i] = 1.0f;
  return s;
}

Transcription TokensOf(const std::vector<int> &patterns) {
  Transcription t;
  t.utterance_id = "t";
  int frame = 0;
  for (int p : patterns) {
    t.tokens.push_back({p, frame, frame + 1});
    frame += 2;
  }
  return t;
}

PosteriorgramSequence OneHot(const std::vector<int> &patterns,
                             const GranularityConfig &psi) {
  PosteriorgramSequence pg;
  pg.utterance_id = "t";
  pg.psi = psi;
  for (int p : patterns) pg.positions.push_back({{p, 1.0}});
  return pg;
}

}  // namespace

TEST_CASE("search method tags and bits round-trip") {
  CHECK(SearchMethod{false, false, false}.Tag() == "000");
  CHECK(SearchMethod{true, false, true}.Tag() == "101");
  CHECK(SearchMethod{true, true, true}.Bits() == 7);
  CHECK(SearchMethod{false, true, false}.Bits() == 2);
  for (const SearchMethod &g : SearchMethod::All()) {
    CHECK(SearchMethod::FromTag(g.Tag()) == g);
    CHECK(SearchMethod::FromBits(g.Bits()) == g);
  }
  CHECK(SearchMethod::All().size() == 8);
  CHECK_THROWS_AS(SearchMethod::FromTag("01"), UsageError);
  CHECK_THROWS_AS(SearchMethod::FromTag("012"), UsageError);
  CHECK_THROWS_AS(SearchMethod::FromBits(8), UsageError);
  CHECK_THROWS_AS(SearchMethod::FromBits(-1), UsageError);
}

TEST_CASE("sub scoring matches exhaustive diagonal search") {
  Rng rng(1);
  for (int trial = 0; trial < 400; trial++) {
    int rows = 1 + static_cast<int>(rng.UniformInt(6));
    int cols = 1 + static_cast<int>(rng.UniformInt(5));
    MatchingMatrix w = RandomMatchingMatrix(rng, rows, cols);
    CHECK(std::abs(ScoreSub(w) - OracleSub(w)) <= 1e-12);
  }
}

TEST_CASE("dtw scoring matches exhaustive path search") {
  Rng rng(2);
  for (int trial = 0; trial < 400; trial++) {
    int rows = 1 + static_cast<int>(rng.UniformInt(6));
    int cols = 1 + static_cast<int>(rng.UniformInt(5));
    MatchingMatrix w = RandomMatchingMatrix(rng, rows, cols);
    CHECK(std::abs(ScoreDtw(w, true) - OracleDtw(w, true)) <= 1e-12);
    CHECK(std::abs(ScoreDtw(w, false) - OracleDtw(w, false)) <= 1e-12);
  }
}

TEST_CASE("a verbatim match scores the full query length") {
  SimilarityMatrix s = HardIdentity(3);
  Transcription doc = TokensOf({2, 0, 1, 0});
  PosteriorgramSequence pg;  // unused in 1-best mode
  SearchMethod sub{false, false, false};
  MatchingMatrix w = BuildMatchingMatrix(doc, pg, doc, pg, s, sub);
  CHECK(ScoreSub(w) == 4.0);
  CHECK(ScoreDtw(w, true) == 1.0);
  // A one-pattern-different query drops the diagonal sum by exactly one.
  Transcription query = TokensOf({2, 0, 2, 0});
  w = BuildMatchingMatrix(doc, pg, query, pg, s, sub);
  CHECK(ScoreSub(w) == 3.0);
}

TEST_CASE("a short document is aligned inside the query and normalized") {
  MatchingMatrix w;
  w.Resize(2, 3);
  // Diagonals: offset 0 -> W(0,0)+W(1,1), offset 1 -> W(0,1)+W(1,2).
  w.Set(0, 0, 0.9); w.Set(0, 1, 0.2); w.Set(0, 2, 0.1);
  w.Set(1, 0, 0.3); w.Set(1, 1, 0.4); w.Set(1, 2, 0.8);
  CHECK(ScoreSub(w) == doctest::Approx((0.9 + 0.4) / 2.0).epsilon(1e-12));
  w.Set(2 - 1, 2, 1.8);  // now offset 1 wins: (0.2 + 1.8) / 2
  CHECK(ScoreSub(w) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("posteriorgram matching is the bilinear form of the masses") {
  SimilarityMatrix s = SoftExample();
  PosteriorgramSequence di, qj;
  di.psi = qj.psi = s.psi;
  di.positions = {{{0, 0.75}, {1, 0.25}}};
  qj.positions = {{{0, 0.5}, {1, 0.5}}};
  Transcription unused;
  SearchMethod gamma{true, true, false};
  MatchingMatrix w = BuildMatchingMatrix(unused, di, unused, qj, s, gamma);
  REQUIRE(w.rows == 1);
  REQUIRE(w.cols == 1);
  // 0.75*(0.5 + 0.4*0.5) + 0.25*(0.4*0.5 + 0.5) = 0.7, with 0.4 rounded to
  // the float the matrix actually stores.
  double off = s.At(0, 1);
  double want = 0.75 * (0.5 + off * 0.5) + 0.25 * (off * 0.5 + 0.5);
  CHECK(w.At(0, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("one-hot posteriorgrams reduce to 1-best matching bit for bit") {
  Rng rng(3);
  SimilarityMatrix s = SoftExample();
  s.n = 4;
  s.psi = {2, 4, 1};
  s.values.assign(16, 0.0f);
  for (int i = 0; i < 4; i++)
    for (int j = 0; j < 4; j++)
      s.values[(size_t)i * 4 + j] =
          (i == j) ? 1.0f : static_cast<float>(0.1 + 0.05 * ((i * 7 + j) % 9));

  for (int trial = 0; trial < 20; trial++) {
    std::vector<int> doc_pats, query_pats;
    for (int i = 0; i < 2 + static_cast<int>(rng.UniformInt(5)); i++)
      doc_pats.push_back(static_cast<int>(rng.UniformInt(4)));
    for (int j = 0; j < 1 + static_cast<int>(rng.UniformInt(4)); j++)
      query_pats.push_back(static_cast<int>(rng.UniformInt(4)));

    Transcription doc = TokensOf(doc_pats), query = TokensOf(query_pats);
    PosteriorgramSequence doc_pg = OneHot(doc_pats, s.psi);
    PosteriorgramSequence query_pg = OneHot(query_pats, s.psi);

    MatchingMatrix one_best = BuildMatchingMatrix(
        doc, doc_pg, query, query_pg, s, SearchMethod{true, false, false});
    MatchingMatrix posterior = BuildMatchingMatrix(
        doc, doc_pg, query, query_pg, s, SearchMethod{true, true, false});
    REQUIRE(one_best.rows == posterior.rows);
    REQUIRE(one_best.cols == posterior.cols);
    for (size_t k = 0; k < one_best.values.size(); k++)
      CHECK(one_best.values[k] == posterior.values[k]);  // bit for bit
  }
}

TEST_CASE("matching rejects mode and granularity mismatches") {
  SimilarityMatrix hard = HardIdentity(2);
  SimilarityMatrix soft = SoftExample();
  Transcription doc = TokensOf({0, 1}), query = TokensOf({1});
  PosteriorgramSequence doc_pg = OneHot({0, 1}, soft.psi);
  PosteriorgramSequence query_pg = OneHot({1}, soft.psi);

  CHECK_THROWS_AS(BuildMatchingMatrix(doc, doc_pg, query, query_pg, hard,
                                      SearchMethod{true, false, false}),
                  DataError);
  CHECK_THROWS_AS(BuildMatchingMatrix(doc, doc_pg, query, query_pg, soft,
                                      SearchMethod{false, false, false}),
                  DataError);
  PosteriorgramSequence wrong = OneHot({0, 1}, {3, 2, 1});
  CHECK_THROWS_AS(BuildMatchingMatrix(doc, wrong, query, query_pg, soft,
                                      SearchMethod{true, true, false}),
                  DataError);
  Transcription bad = TokensOf({5});
  CHECK_THROWS_AS(BuildMatchingMatrix(bad, doc_pg, query, query_pg, hard,
                                      SearchMethod{false, false, false}),
                  DataError);
}

TEST_CASE("relevance composes matching and scoring") {
  Rng rng(4);
  SimilarityMatrix s = SoftExample();
  Transcription doc = TokensOf({0, 1, 0}), query = TokensOf({1, 0});
  PosteriorgramSequence doc_pg = OneHot({0, 1, 0}, s.psi);
  PosteriorgramSequence query_pg = OneHot({1, 0}, s.psi);
  for (const SearchMethod &gamma : SearchMethod::All()) {
    if (!gamma.soft) continue;
    MatchingMatrix w =
        BuildMatchingMatrix(doc, doc_pg, query, query_pg, s, gamma);
    double expect = gamma.dtw ? ScoreDtw(w, true) : ScoreSub(w);
    CHECK(Relevance(doc, doc_pg, query, query_pg, s, gamma) == expect);
  }
}

TEST_CASE("the frame matrix maps cosine similarity into the unit interval") {
  FeatureSequence a, b;
  a.utterance_id = "a";
  b.utterance_id = "b";
  a.dim = b.dim = 2;
  a.data = {1.0f, 0.0f,   // frame 0
            0.0f, 2.0f,   // frame 1: orthogonal to frame 0
            -1.0f, 0.0f,  // frame 2: opposite to frame 0
            0.0f, 0.0f};  // frame 3: zero norm
  b.data = {1.0f, 0.0f};

  MatchingMatrix w = BuildFrameMatrix(b, a);  // query=b, doc=a
  REQUIRE(w.rows == 4);
  REQUIRE(w.cols == 1);
  CHECK(w.At(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(w.At(1, 0) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(w.At(2, 0) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(w.At(3, 0) == doctest::Approx(0.5).epsilon(1e-7));

  Rng rng(5);
  FeatureSequence q = RandomFeatures(rng, "q", 6, 3);
  FeatureSequence d = RandomFeatures(rng, "d", 9, 3);
  MatchingMatrix frame = BuildFrameMatrix(q, d);
  for (double v : frame.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(FrameDtwBaseline(q, d) == ScoreDtw(frame, true));
  CHECK(FrameDtwBaseline(q, d, false) == ScoreDtw(frame, false));
}

TEST_CASE("fusion sums exactly the enabled tables over all pairs") {
  RelevanceTable table;
  ScoreTable t1, t2;
  t1.psi = {2, 4, 1};
  t1.gamma = SearchMethod::FromTag("000");
  t1.scores[{"q1", "d1"}] = 1.0;
  t1.scores[{"q1", "d2"}] = 2.0;
  t2.psi = {3, 8, 2};
  t2.gamma = SearchMethod::FromTag("101");
  t2.scores[{"q1", "d1"}] = 10.0;
  t2.scores[{"q1", "d2"}] = 0.5;
  table.tables = {t1, t2};
  table.Sort();

  LambdaSet both = {{t1.psi, t1.gamma.Bits()}, {t2.psi, t2.gamma.Bits()}};
  auto fused = Fuse(table, both);
  CHECK(fused.at({"q1", "d1"}) == 11.0);
  CHECK(fused.at({"q1", "d2"}) == 2.5);

  LambdaSet only_second = {{t2.psi, t2.gamma.Bits()}};
  fused = Fuse(table, only_second);
  CHECK(fused.at({"q1", "d1"}) == 10.0);

  // The all-zeros lambda still scores every known pair, all at zero.
  auto zeros = Fuse(table, {});
  REQUIRE(zeros.size() == 2);
  CHECK(zeros.at({"q1", "d1"}) == 0.0);
  CHECK(zeros.at({"q1", "d2"}) == 0.0);

  LambdaSet missing = {{GranularityConfig{9, 9, 9}, 0}};
  CHECK_THROWS_AS(Fuse(table, missing), DataError);

  // Enabled tables must cover identical pair sets.
  table.tables[1].scores.erase({"q1", "d2"});
  CHECK_THROWS_AS(Fuse(table, both), DataError);
}

TEST_CASE("rankings sort by descending score with ascending id ties") {
  std::map<std::pair<std::string, std::string>, double> fused;
  fused[{"q1", "d1"}] = 0.5;
  fused[{"q1", "d2"}] = 0.9;
  fused[{"q1", "d3"}] = 0.5;
  fused[{"q2", "d1"}] = 0.1;
  auto rankings = RankByQuery(fused);
  REQUIRE(rankings.size() == 2);
  const auto &q1 = rankings.at("q1");
  REQUIRE(q1.size() == 3);
  CHECK(q1[0].first == "d2");
  CHECK(q1[1].first == "d1");  // tie with d3 broken by id
  CHECK(q1[2].first == "d3");
}

TEST_CASE("score tables round-trip through their text format") {
  RelevanceTable table;
  ScoreTable t1;
  t1.psi = {2, 4, 1};
  t1.gamma = SearchMethod::FromTag("010");
  t1.scores[{"q1", "d1"}] = 0.125;
  t1.scores[{"q2", "d1"}] = -3.5;
  table.tables = {t1};

  TempDir tmp("scores");
  WriteScoreTables(tmp.Path("scores.tsv"), table);
  RelevanceTable back = ReadScoreTables(tmp.Path("scores.tsv"));
  REQUIRE(back.tables.size() == 1);
  CHECK(back.tables[0].psi == t1.psi);
  CHECK(back.tables[0].gamma == t1.gamma);
  CHECK(back.tables[0].scores == t1.scores);
}

TEST_CASE("lambda files round-trip and reject values other than 0 and 1") {
  RelevanceTable table;
  ScoreTable t1, t2;
  t1.psi = {2, 4, 1};
  t1.gamma = SearchMethod::FromTag("000");
  t2.psi = {2, 4, 1};
  t2.gamma = SearchMethod::FromTag("111");
  table.tables = {t1, t2};

  LambdaSet lambda = {{t2.psi, t2.gamma.Bits()}};
  TempDir tmp("lambda");
  WriteLambdaFile(tmp.Path("lambda.tsv"), table, lambda);
  LambdaSet back = ReadLambdaFile(tmp.Path("lambda.tsv"));
  CHECK(back == lambda);

  std::ofstream bad(tmp.Path("bad.tsv"));
  bad << "# psi\tgamma\tlambda\nm2_n4_l1\t000\t2\n";
  bad.close();
  CHECK_THROWS_AS(ReadLambdaFile(tmp.Path("bad.tsv")), DataError);
}

TEST_CASE("degenerate matrices are rejected") {
  MatchingMatrix empty;
  CHECK_THROWS_AS(ScoreSub(empty), DataError);
  CHECK_THROWS_AS(ScoreDtw(empty), DataError);
}
