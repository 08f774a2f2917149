// patstd/tests/acceptance.cc
//
// End-to-end acceptance gate. Ten numbered criteria run back to back, each
// printing exactly one [PASS]/[FAIL] line with the measured quantities and
// its elapsed time. The process exits 0 only when every criterion passes.
//
// Criteria 1, 2 and 9 are self-contained numerical checks against
// independent enumeration oracles and hand-computed values. Criteria 3-8
// share a synthetic retrieval corpus (two "speakers", twenty queries, two
// hundred documents) and a 2x2x2 granularity grid trained on it. Criterion
// 10 drives the installed command-line binary twice over a full pipeline and
// byte-compares the artifact trees.

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

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "patstd/baum-welch.h"
#include "patstd/common.h"
#include "patstd/corpus.h"
#include "patstd/decode.h"
#include "patstd/discovery.h"
#include "patstd/evaluation.h"
#include "patstd/feature.h"
#include "patstd/gmm.h"
#include "patstd/indexing.h"
#include "patstd/pattern-hmm.h"
#include "patstd/retrieval.h"
#include "patstd/rng.h"
#include "patstd/similarity.h"
#include "patstd/synth.h"
#include "testing-util.h"

namespace patstd {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr uint64_t kSeed = 20260819;
constexpr int kWorkers = 4;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Shared corpus: the packaged synthetic retrieval benchmark.

struct CorpusFixture {
  SyntheticSpec spec;
  SynthResult synth;
  std::vector<FeatureSequence> docs;  // manifest document order
  std::vector<FeatureSequence> all;   // documents then queries
  Judgments judgments;
};

const CorpusFixture &Corpus() {
  static const CorpusFixture *fixture = [] {
    auto *c = new CorpusFixture;
    c->spec =
        ReadSyntheticSpec(std::string(PATSTD_CONFIG_DIR) + "/synth_small.json");
    c->synth = SynthesizeCorpus(c->spec, kSeed);
    for (const auto &utt : c->synth.manifest.documents)
      c->docs.push_back(c->synth.features.at(utt.id));
    c->all = c->docs;
    for (const auto &utt : c->synth.manifest.queries)
      c->all.push_back(c->synth.features.at(utt.id));
    c->judgments = c->synth.manifest.judgments;
    return c;
  }();
  return *fixture;
}

// ---------------------------------------------------------------------------
// Shared pipeline: 2x2x2 grid, similarity matrices, indexes, score tables.

struct PipelineFixture {
  std::vector<GranularityConfig> grid;
  GridResult result;
  std::map<GranularityConfig, SimilarityMatrix> hard, soft;
  std::map<GranularityConfig, ArchiveIndex> indexes;
  RelevanceTable tables;  // every (psi, gamma): 8 x 8
  double build_seconds = 0.0;
  std::string error;  // non-empty when any stage failed
};

ScoreTable BuildScoreTable(const PipelineFixture &p, const CorpusFixture &c,
                           const GranularityConfig &psi,
                           const SearchMethod &gamma) {
  const ArchiveIndex &index = p.indexes.at(psi);
  const SimilarityMatrix &matrix =
      gamma.soft ? p.soft.at(psi) : p.hard.at(psi);
  ScoreTable table;
  table.psi = psi;
  table.gamma = gamma;
  for (const auto &query : c.synth.manifest.queries) {
    const Transcription &query_trans = index.transcriptions.at(query.id);
    const PosteriorgramSequence &query_pg = index.posteriorgrams.at(query.id);
    for (const auto &doc : c.synth.manifest.documents)
      table.scores[{query.id, doc.id}] =
          Relevance(index.transcriptions.at(doc.id),
                    index.posteriorgrams.at(doc.id), query_trans, query_pg,
                    matrix, gamma);
  }
  return table;
}

const PipelineFixture &Pipeline() {
  static const PipelineFixture *fixture = [] {
    auto *p = new PipelineFixture;
    auto start = Clock::now();
    const CorpusFixture &c = Corpus();

    p->grid = ExpandGrid({3, 5}, {8, 12}, {1, 2});
    DiscoveryConfig config;
    config.grid = p->grid;
    config.seed = kSeed;
    config.num_workers = kWorkers;
    p->result = RunGrid(c.docs, config);
    if (!p->result.errors.empty()) {
      std::ostringstream msg;
      msg << "grid training failed:";
      for (const auto &[psi, error] : p->result.errors)
        msg << " " << psi.Tag() << ": " << error << ";";
      p->error = msg.str();
      return p;
    }

    for (const auto &[psi, set] : p->result.sets) {
      p->hard.emplace(psi, BuildSimilarity(set, SimilarityMode::kHard, 0.0,
                                           kWorkers));
      p->soft.emplace(psi, BuildSimilarity(set, SimilarityMode::kSoft,
                                           DefaultBeta(psi.m), kWorkers));
      ArchiveIndex index = BuildIndex(set, c.all, 4, kWorkers);
      if (!index.failures.empty()) {
        p->error = "index failures under " + psi.Tag() + ": " +
                   index.failures.begin()->second;
        return p;
      }
      p->indexes.emplace(psi, std::move(index));
    }

    std::vector<std::pair<GranularityConfig, SearchMethod>> jobs;
    for (const auto &psi : p->grid)
      for (const auto &gamma : SearchMethod::All()) jobs.push_back({psi, gamma});
    std::vector<ScoreTable> tables(jobs.size());
    ParallelFor(kWorkers, static_cast<int>(jobs.size()), [&](int i) {
      tables[i] = BuildScoreTable(*p, c, jobs[i].first, jobs[i].second);
    });
    for (auto &table : tables) p->tables.tables.push_back(std::move(table));
    p->tables.Sort();
    p->build_seconds = Seconds(start);
    return p;
  }();
  return *fixture;
}

// ---------------------------------------------------------------------------
// Instrumented training audit shared by criteria 3 and 4: replays the
// training loop (same structure and seeds as the grid runner) and checks the
// fixed-label corpus log-likelihood across every single re-estimation step,
// plus every re-estimated mixture weight vector.

struct TrainingAudit {
  long long steps = 0;
  long long monotonicity_violations = 0;
  double worst_step_delta = std::numeric_limits<double>::infinity();
  long long weight_vectors = 0;
  long long weight_violations = 0;
  double worst_weight_error = 0.0;
  int psis_audited = 0;
  double seconds = 0.0;
};

double CorpusLabeledLl(const PatternSet &set,
                       const std::vector<FeatureSequence> &corpus,
                       const std::vector<Transcription> &labels) {
  std::vector<double> per_utt(corpus.size());
  ParallelFor(kWorkers, static_cast<int>(corpus.size()), [&](int i) {
    per_utt[i] = LabeledLogLikelihood(set, corpus[i], labels[i]);
  });
  double total = 0.0;
  for (double ll : per_utt) total += ll;
  return total;
}

void AuditWeights(const PatternSet &set, TrainingAudit *audit) {
  for (const auto &hmm : set.hmms)
    for (const auto &state : hmm.states) {
      double sum = 0.0;
      for (double w : state.weights) sum += w;
      double err = std::fabs(sum - 1.0);
      audit->weight_vectors++;
      audit->worst_weight_error = std::max(audit->worst_weight_error, err);
      if (err > 1e-9) audit->weight_violations++;
    }
}

void AuditTrainingLoop(PatternSet *set,
                       const std::vector<FeatureSequence> &corpus,
                       std::vector<Transcription> labels,
                       const DiscoveryConfig &config, TrainingAudit *audit) {
  double before = CorpusLabeledLl(*set, corpus, labels);
  for (int iter = 1; iter <= config.max_iterations; iter++) {
    for (int e = 0; e < config.em_steps; e++) {
      BaumWelchResult result =
          BaumWelchStep(*set, corpus, labels, config.num_workers);
      *set = result.set;
      double after = CorpusLabeledLl(*set, corpus, labels);
      double scale = std::max(1.0, std::fabs(before));
      double delta = (after - before) / scale;
      audit->steps++;
      audit->worst_step_delta = std::min(audit->worst_step_delta, delta);
      if (after < before - 1e-6 * scale) audit->monotonicity_violations++;
      AuditWeights(*set, audit);
      before = after;
    }
    ReseedDeadPatterns(set, labels);

    std::vector<Transcription> new_labels(corpus.size());
    ParallelFor(config.num_workers, static_cast<int>(corpus.size()),
                [&](int i) { new_labels[i] = ViterbiFreeDecode(*set, corpus[i]); });
    double change = LabelChangeFraction(labels, new_labels);
    labels = std::move(new_labels);
    before = CorpusLabeledLl(*set, corpus, labels);
    if (change <= config.convergence_threshold) break;
  }
}

const TrainingAudit &Audit() {
  static const TrainingAudit *audit = [] {
    auto *a = new TrainingAudit;
    auto start = Clock::now();
    const CorpusFixture &c = Corpus();
    DiscoveryConfig config;
    config.grid = ExpandGrid({3, 5}, {8, 12}, {1, 2});
    config.num_workers = kWorkers;
    std::vector<double> floor = ComputeVarianceFloor(c.docs);

    for (int m : {3, 5})
      for (int n : {8, 12}) {
        GranularityConfig psi{m, n, 1};
        uint64_t cell_seed = Rng::DeriveSeed(
            kSeed, static_cast<uint64_t>(m) * 1000003 + n);
        std::vector<Transcription> labels =
            InitializeLabels(c.docs, psi, cell_seed);
        PatternSet set = InitialModelFromLabels(c.docs, labels, psi, floor);
        AuditTrainingLoop(&set, c.docs, labels, config, a);
        a->psis_audited++;

        // Continuation to two Gaussians per state: split every state's
        // largest component, retrain from the converged set's own labels.
        std::vector<Transcription> grown_labels(c.docs.size());
        ParallelFor(kWorkers, static_cast<int>(c.docs.size()), [&](int i) {
          grown_labels[i] = ViterbiFreeDecode(set, c.docs[i]);
        });
        PatternSet grown = set;
        grown.config.l = 2;
        grown.derived_from = set.config.Tag();
        grown.training_log.clear();
        for (auto &hmm : grown.hmms)
          for (auto &state : hmm.states) SplitLargestComponent(&state);
        AuditTrainingLoop(&grown, c.docs, grown_labels, config, a);
        a->psis_audited++;
      }
    a->seconds = Seconds(start);
    return a;
  }();
  return *audit;
}

// ---------------------------------------------------------------------------
// Criterion 1: free decoding and N-best decoding against exhaustive
// enumeration on random toy instances.

struct ToyInstance {
  PatternSet set;
  FeatureSequence features;
  std::vector<testing::OracleDecode> oracle;
};

ToyInstance DrawToy(Rng &rng, int depth) {
  for (int attempt = 0; attempt < 50; attempt++) {
    int m = 1 + rng.UniformInt(2);
    int n = 1 + rng.UniformInt(3);
    int l = 1 + rng.UniformInt(2);
    int dim = 1 + rng.UniformInt(3);
    int frames = m + rng.UniformInt(8 - m + 1);
    PatternSet set = testing::RandomPatternSet(rng, m, n, l, dim);
    FeatureSequence features =
        testing::RandomFeatures(rng, "toy", frames, dim);
    std::vector<testing::OracleDecode> oracle =
        testing::EnumerateDecodes(set, features);
    if (oracle.empty()) continue;
    // Near-ties make the argmax ambiguous at the stated tolerance; redraw.
    if (testing::TopGap(oracle, depth) <= 1e-6) continue;
    return {std::move(set), std::move(features), std::move(oracle)};
  }
  throw InternalError("could not draw a separated toy decoding instance");
}

Outcome CriterionDecode() {
  auto start = Clock::now();
  const int kInstances = 220;
  const int kN = 4;
  Rng rng(Rng::DeriveSeed(kSeed, 1));
  double worst = 0.0;
  for (int trial = 0; trial < kInstances; trial++) {
    ToyInstance toy = DrawToy(rng, kN + 1);

    Transcription viterbi = ViterbiFreeDecode(toy.set, toy.features);
    if (!(viterbi.tokens == toy.oracle.front().tokens))
      return {false, StringPrintf("trial %d: 1-best token mismatch", trial)};
    worst = std::max(
        worst, std::fabs(viterbi.log_likelihood - toy.oracle.front().score));

    NBestList nbest = NBestDecode(toy.set, toy.features, kN);
    size_t want =
        std::min<size_t>(kN, toy.oracle.size());
    if (nbest.entries.size() != want)
      return {false, StringPrintf("trial %d: N-best size %zu, enumeration %zu",
                                  trial, nbest.entries.size(), want)};
    for (size_t i = 0; i < want; i++) {
      if (!(nbest.entries[i].tokens == toy.oracle[i].tokens))
        return {false, StringPrintf("trial %d: N-best entry %zu token mismatch",
                                    trial, i)};
      worst = std::max(worst, std::fabs(nbest.entries[i].log_likelihood -
                                        toy.oracle[i].score));
    }
  }
  double sec = Seconds(start);
  bool pass = worst <= 1e-9 && sec < 60.0;
  return {pass,
          StringPrintf("%d instances, max |score error| %.2e (tol 1e-9), "
                       "%.1fs (limit 60s)",
                       kInstances, worst, sec)};
}

// ---------------------------------------------------------------------------
// Criterion 2: SUB and DTW scoring against exhaustive alignment enumeration.

Outcome CriterionMatching() {
  auto start = Clock::now();
  const int kTrials = 1100;
  Rng rng(Rng::DeriveSeed(kSeed, 2));
  double worst = 0.0;
  for (int trial = 0; trial < kTrials; trial++) {
    int rows = 1 + rng.UniformInt(6);
    int cols = 1 + rng.UniformInt(5);
    MatchingMatrix w = testing::RandomMatchingMatrix(rng, rows, cols);
    worst = std::max(worst, std::fabs(ScoreSub(w) - testing::OracleSub(w)));
    worst = std::max(worst,
                     std::fabs(ScoreDtw(w, true) - testing::OracleDtw(w, true)));
    worst = std::max(
        worst, std::fabs(ScoreDtw(w, false) - testing::OracleDtw(w, false)));
  }
  double sec = Seconds(start);
  bool pass = worst <= 1e-12 && sec < 60.0;
  return {pass,
          StringPrintf("%d matrices up to 6x5, max |score error| %.2e "
                       "(tol 1e-12), %.1fs (limit 60s)",
                       kTrials, worst, sec)};
}

// ---------------------------------------------------------------------------
// Criterion 3: every re-estimation step is monotone in the fixed-label
// corpus log-likelihood, for every granularity in the 2x2x2 grid.

Outcome CriterionMonotonicity() {
  const TrainingAudit &audit = Audit();
  bool pass = audit.monotonicity_violations == 0 && audit.steps > 0 &&
              audit.psis_audited == 8 && audit.seconds < 300.0;
  return {pass,
          StringPrintf("%lld re-estimation steps across %d granularities, "
                       "worst relative step %.2e (tol -1e-6), %.0fs "
                       "(limit 300s)",
                       audit.steps, audit.psis_audited, audit.worst_step_delta,
                       audit.seconds)};
}

// ---------------------------------------------------------------------------
// Criterion 4: normalization invariants across the trained pipeline.

Outcome CriterionNormalization() {
  const TrainingAudit &audit = Audit();
  const PipelineFixture &p = Pipeline();
  if (!p.error.empty()) return {false, p.error};

  long long positions = 0;
  double worst_sum = 0.0;
  for (const auto &[psi, index] : p.indexes)
    for (const auto &[id, pg] : index.posteriorgrams)
      for (const auto &position : pg.positions) {
        double sum = 0.0;
        for (const auto &[pattern, mass] : position) sum += mass;
        worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
        positions++;
      }

  int matrices = 0;
  bool range_ok = true;
  double worst_diag = 0.0;
  for (const auto *side : {&p.hard, &p.soft})
    for (const auto &[psi, matrix] : *side) {
      matrices++;
      for (float v : matrix.values)
        if (!(v >= 0.0f && v <= 1.0f)) range_ok = false;
      for (int i = 0; i < matrix.n; i++)
        worst_diag =
            std::max(worst_diag, std::fabs(matrix.At(i, i) - 1.0));
    }

  // Final trained sets, after the last re-estimation of each chain.
  long long final_vectors = 0;
  double worst_weight = audit.worst_weight_error;
  for (const auto &[psi, set] : p.result.sets)
    for (const auto &hmm : set.hmms)
      for (const auto &state : hmm.states) {
        double sum = 0.0;
        for (double w : state.weights) sum += w;
        worst_weight = std::max(worst_weight, std::fabs(sum - 1.0));
        final_vectors++;
      }

  bool pass = positions > 0 && worst_sum <= 1e-9 && range_ok &&
              worst_diag <= 1e-9 && audit.weight_violations == 0 &&
              worst_weight <= 1e-9;
  return {pass,
          StringPrintf("%lld posteriorgram positions (max |sum-1| %.2e), "
                       "%d similarity matrices in [0,1] (max |diag-1| %.2e), "
                       "%lld weight vectors (max |sum-1| %.2e, tol 1e-9)",
                       positions, worst_sum, matrices, worst_diag,
                       audit.weight_vectors + final_vectors, worst_weight)};
}

// ---------------------------------------------------------------------------
// Criterion 5: reduction identities. N=1 posteriorgram search equals 1-best
// search bit for bit; soft similarity converges to hard as beta -> 0+.

Outcome CriterionReductions() {
  const CorpusFixture &c = Corpus();
  const PipelineFixture &p = Pipeline();
  if (!p.error.empty()) return {false, p.error};

  GranularityConfig psi{3, 8, 1};
  const PatternSet &set = p.result.sets.at(psi);
  const ArchiveIndex &index = p.indexes.at(psi);

  ArchiveIndex one_best = BuildIndex(set, c.all, 1, kWorkers);
  if (!one_best.failures.empty())
    return {false, "N=1 index failures: " + one_best.failures.begin()->second};

  long long bit_mismatches = 0;
  for (const auto &query : c.synth.manifest.queries)
    for (const auto &doc : c.synth.manifest.documents)
      for (bool soft : {false, true})
        for (bool dtw : {false, true}) {
          const SimilarityMatrix &matrix =
              soft ? p.soft.at(psi) : p.hard.at(psi);
          double pg_score = Relevance(one_best.transcriptions.at(doc.id),
                                      one_best.posteriorgrams.at(doc.id),
                                      one_best.transcriptions.at(query.id),
                                      one_best.posteriorgrams.at(query.id),
                                      matrix, {soft, true, dtw});
          double hard_score = Relevance(one_best.transcriptions.at(doc.id),
                                        one_best.posteriorgrams.at(doc.id),
                                        one_best.transcriptions.at(query.id),
                                        one_best.posteriorgrams.at(query.id),
                                        matrix, {soft, false, dtw});
          if (pg_score != hard_score) bit_mismatches++;
        }

  SimilarityMatrix eps_matrix = BuildSimilarity(
      set, SimilarityMode::kSoft, 1e-6 * set.config.m, kWorkers);
  double worst_eps = 0.0;
  for (const auto &query : c.synth.manifest.queries)
    for (const auto &doc : c.synth.manifest.documents)
      for (bool nbest : {false, true})
        for (bool dtw : {false, true}) {
          double soft_score = Relevance(index.transcriptions.at(doc.id),
                                        index.posteriorgrams.at(doc.id),
                                        index.transcriptions.at(query.id),
                                        index.posteriorgrams.at(query.id),
                                        eps_matrix, {true, nbest, dtw});
          double hard_score = Relevance(index.transcriptions.at(doc.id),
                                        index.posteriorgrams.at(doc.id),
                                        index.transcriptions.at(query.id),
                                        index.posteriorgrams.at(query.id),
                                        p.hard.at(psi), {false, nbest, dtw});
          worst_eps = std::max(worst_eps, std::fabs(soft_score - hard_score));
        }

  bool pass = bit_mismatches == 0 && worst_eps < 1e-6;
  return {pass,
          StringPrintf("N=1 vs 1-best: %lld of 16000 scores differ (want 0); "
                       "beta=%.0e soft vs hard: max |diff| %.2e (tol 1e-6)",
                       bit_mismatches, 1e-6 * set.config.m, worst_eps)};
}

// ---------------------------------------------------------------------------
// Criterion 6: fusing one search method across the granularity grid is at
// least competitive with the best single granularity and beats the median.

Outcome CriterionFusion() {
  const CorpusFixture &c = Corpus();
  const PipelineFixture &p = Pipeline();
  if (!p.error.empty()) return {false, p.error};

  SearchMethod gamma{true, false, false};  // soft similarity, 1-best, SUB
  std::vector<double> singles;
  LambdaSet fused_lambda;
  for (const auto &psi : p.grid) {
    LambdaSet single = {{psi, gamma.Bits()}};
    singles.push_back(FusedMap(p.tables, single, c.judgments));
    fused_lambda.insert({psi, gamma.Bits()});
  }
  double fused = FusedMap(p.tables, fused_lambda, c.judgments);

  std::vector<double> sorted = singles;
  std::sort(sorted.begin(), sorted.end());
  double best = sorted.back();
  double median = 0.5 * (sorted[3] + sorted[4]);

  bool pass = fused >= best - 0.01 && fused > median &&
              p.build_seconds < 1800.0;
  return {pass,
          StringPrintf("fused MAP %.4f vs best single %.4f (slack 0.01) and "
                       "median %.4f over 8 granularities; pipeline build "
                       "%.0fs (limit 1800s)",
                       fused, best, median, p.build_seconds)};
}

// ---------------------------------------------------------------------------
// Criterion 7: greedy weight selection on a dev split transfers to the eval
// split, and selection on the eval split itself is at least as good.

RelevanceTable FilterTable(const RelevanceTable &table,
                           const std::set<std::string> &queries) {
  RelevanceTable out;
  for (const auto &t : table.tables) {
    ScoreTable filtered;
    filtered.psi = t.psi;
    filtered.gamma = t.gamma;
    for (const auto &[pair, score] : t.scores)
      if (queries.count(pair.first)) filtered.scores[pair] = score;
    out.tables.push_back(std::move(filtered));
  }
  return out;
}

Judgments FilterJudgments(const Judgments &judgments,
                          const std::set<std::string> &queries) {
  Judgments out;
  for (const auto &[query, relevant] : judgments)
    if (queries.count(query)) out[query] = relevant;
  return out;
}

Outcome CriterionSelection() {
  const CorpusFixture &c = Corpus();
  const PipelineFixture &p = Pipeline();
  if (!p.error.empty()) return {false, p.error};

  std::set<std::string> judged;
  for (const auto &[query, relevant] : c.judgments)
    if (!relevant.empty()) judged.insert(query);
  std::set<std::string> dev_queries, eval_queries;
  int position = 0;
  for (const auto &query : judged)
    ((position++ % 2 == 0) ? dev_queries : eval_queries).insert(query);

  RelevanceTable dev_table = FilterTable(p.tables, dev_queries);
  RelevanceTable eval_table = FilterTable(p.tables, eval_queries);
  Judgments dev_judgments = FilterJudgments(c.judgments, dev_queries);
  Judgments eval_judgments = FilterJudgments(c.judgments, eval_queries);

  const int kBudget = 20;
  std::vector<SelectionStep> steps =
      GreedySelect(dev_table, dev_judgments, kBudget);
  LambdaSet selected;
  for (const auto &step : steps) selected.insert({step.psi, step.gamma.Bits()});
  double selected_eval = FusedMap(eval_table, selected, eval_judgments);

  LambdaSet all_ones;
  for (const auto &t : p.tables.tables)
    all_ones.insert({t.psi, t.gamma.Bits()});
  double all_ones_eval = FusedMap(eval_table, all_ones, eval_judgments);

  std::vector<SelectionStep> oracle_steps =
      GreedySelect(eval_table, eval_judgments, kBudget);
  double oracle_eval = 0.0;
  for (const auto &step : oracle_steps)
    oracle_eval = std::max(oracle_eval, step.dev_map);

  bool pass = selected_eval >= all_ones_eval && oracle_eval >= selected_eval;
  return {pass,
          StringPrintf("eval MAP: all-ones %.4f, dev-selected %.4f, "
                       "eval-oracle %.4f (budget %d of %zu tables)",
                       all_ones_eval, selected_eval, oracle_eval, kBudget,
                       p.tables.tables.size())};
}

// ---------------------------------------------------------------------------
// Criterion 8: pattern-level search latency versus the frame-level DTW
// baseline at five states per pattern.

Outcome CriterionSpeedup() {
  const CorpusFixture &c = Corpus();
  const PipelineFixture &p = Pipeline();
  if (!p.error.empty()) return {false, p.error};

  GranularityConfig psi{5, 8, 1};
  const ArchiveIndex &index = p.indexes.at(psi);
  const SimilarityMatrix &matrix = p.hard.at(psi);

  // Fixed pair sample: every query against the first three documents.
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto &query : c.synth.manifest.queries)
    for (size_t d = 0; d < 3; d++)
      pairs.push_back({query.id, c.synth.manifest.documents[d].id});

  std::map<std::string, const FeatureSequence *> features;
  for (const auto &f : c.all) features.emplace(f.utterance_id, &f);

  volatile double sink = 0.0;
  auto time_pattern = [&](bool dtw, int reps) {
    SearchMethod gamma{false, false, dtw};
    auto start = Clock::now();
    for (int r = 0; r < reps; r++)
      for (const auto &[query_id, doc_id] : pairs)
        sink = sink + Relevance(index.transcriptions.at(doc_id),
                                index.posteriorgrams.at(doc_id),
                                index.transcriptions.at(query_id),
                                index.posteriorgrams.at(query_id), matrix,
                                gamma);
    return Seconds(start) / (static_cast<double>(reps) * pairs.size());
  };
  auto time_frames = [&](int reps) {
    auto start = Clock::now();
    for (int r = 0; r < reps; r++)
      for (const auto &[query_id, doc_id] : pairs)
        sink = sink + FrameDtwBaseline(*features.at(query_id),
                                       *features.at(doc_id));
    return Seconds(start) / (static_cast<double>(reps) * pairs.size());
  };

  time_pattern(false, 2);  // warm up caches before timing
  time_frames(1);
  double sub_mean = time_pattern(false, 50);
  double dtw_mean = time_pattern(true, 50);
  double frame_mean = time_frames(3);

  double sub_ratio = frame_mean / sub_mean;
  double dtw_ratio = frame_mean / dtw_mean;

  // Theoretical factor: with F frames per state each token spans F*m frames,
  // so the frame-level work exceeds the pattern-level work by about F*m^2
  // per matched position.
  long long frames = 0, tokens = 0;
  for (const auto &[id, trans] : index.transcriptions) {
    frames += trans.NumFrames();
    tokens += static_cast<long long>(trans.tokens.size());
  }
  double f_per_state =
      static_cast<double>(frames) / (static_cast<double>(tokens) * psi.m);
  double theoretical = f_per_state * psi.m * psi.m;

  bool pass = sub_ratio >= 10.0 && dtw_ratio >= 2.0;
  return {pass,
          StringPrintf("mean per-pair latency: frame DTW %.3fms, pattern SUB "
                       "%.4fms (%.0fx, need >=10x), pattern DTW %.4fms "
                       "(%.0fx, need >=2x); theoretical F*m^2 = %.0f "
                       "(F=%.1f frames/state, m=5)",
                       frame_mean * 1e3, sub_mean * 1e3, sub_ratio,
                       dtw_mean * 1e3, dtw_ratio, theoretical, f_per_state)};
}

// ---------------------------------------------------------------------------
// Criterion 9: average precision against hand-computed values.

Outcome CriterionAveragePrecision() {
  struct Case {
    std::vector<std::string> ranking;
    std::set<std::string> relevant;
    double want;
  };
  const std::vector<Case> cases = {
      // The worked example: relevant at ranks 1 and 3 of four.
      {{"a", "x", "b", "y"}, {"a", "b"}, (1.0 / 1.0 + 2.0 / 3.0) / 2.0},
      {{"a", "b", "x", "y"}, {"a", "b"}, (1.0 / 1.0 + 2.0 / 2.0) / 2.0},
      {{"x", "a", "y", "b"}, {"a", "b"}, (1.0 / 2.0 + 2.0 / 4.0) / 2.0},
      {{"j1", "j2", "j3", "j4", "j5", "j6", "j7", "j8", "j9", "a"},
       {"a"},
       (1.0 / 10.0) / 1.0},
      {{"a"}, {"a"}, 1.0},
      {{"x", "y", "a"}, {"a"}, (1.0 / 3.0) / 1.0},
      {{"a", "x", "b", "y", "c"},
       {"a", "b", "c"},
       (1.0 / 1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0},
      {{"c", "b", "a"},
       {"a", "b", "c"},
       (1.0 / 1.0 + 2.0 / 2.0 + 3.0 / 3.0) / 3.0},
      {{"x", "a", "b", "y"}, {"a", "b"}, (1.0 / 2.0 + 2.0 / 3.0) / 2.0},
      {{"b", "x", "y", "z", "a"}, {"a", "b"}, (1.0 / 1.0 + 2.0 / 5.0) / 2.0},
  };

  for (size_t i = 0; i < cases.size(); i++) {
    double got = AveragePrecision(cases[i].ranking, cases[i].relevant);
    if (got != cases[i].want)
      return {false, StringPrintf("ranking %zu: got %.17g, want %.17g",
                                  i + 1, got, cases[i].want)};
  }
  double example = AveragePrecision({"a", "x", "b", "y"}, {"a", "b"});
  return {true, StringPrintf("10 rankings matched exactly, including the "
                             "%.4f two-relevant example",
                             example)};
}

// ---------------------------------------------------------------------------
// Criterion 10: the command-line pipeline is byte-reproducible.

int RunCli(const std::string &args, const std::string &log_path) {
  std::string command =
      std::string(PATSTD_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
  int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string TailOf(const std::string &path) {
  std::ifstream in(path);
  std::string line, tail;
  while (std::getline(in, line))
    if (!line.empty()) tail = line;
  return tail;
}

bool RunPipeline(const fs::path &root, std::string *error) {
  fs::create_directories(root);
  const std::string manifest = (root / "synth" / "manifest.tsv").string();
  const std::vector<std::pair<std::string, std::string>> stages = {
      {"synth", "synth --spec " + std::string(PATSTD_CONFIG_DIR) +
                    "/synth_tiny.json --seed 17 --out " +
                    (root / "synth").string()},
      {"discover", "discover --manifest " + manifest +
                       " --m 2 --n 4 --l 1,2 --seed 3 --max-iterations 4"
                       " --em-steps 2 --workers 3 --out " +
                       (root / "patterns").string()},
      {"similarity-hard", "similarity --patterns " +
                              (root / "patterns").string() +
                              " --mode hard --out " + (root / "simm").string()},
      {"similarity-soft", "similarity --patterns " +
                              (root / "patterns").string() +
                              " --mode soft --out " + (root / "simm").string()},
      {"index", "index --patterns " + (root / "patterns").string() +
                    " --manifest " + manifest + " --nbest 3 --workers 2"
                    " --out " + (root / "index").string()},
      {"search", "search --index " + (root / "index").string() +
                     " --similarity " + (root / "simm").string() +
                     " --manifest " + manifest + " --workers 2 --out " +
                     (root / "search").string()},
      {"evaluate", "evaluate --scores " +
                       (root / "search" / "scores.tsv").string() +
                       " --manifest " + manifest + " --out " +
                       (root / "eval").string()},
  };
  for (const auto &[name, args] : stages) {
    std::string log = (root / (name + ".log")).string();
    int code = RunCli(args, log);
    if (code != 0) {
      *error = StringPrintf("stage %s exited %d: %s", name.c_str(), code,
                            TailOf(log).c_str());
      return false;
    }
  }
  return true;
}

// Relative paths of regular files under root, minus run metadata (which
// records wall-clock timings) and stage logs.
std::set<std::string> ArtifactPaths(const fs::path &root) {
  std::set<std::string> paths;
  for (const auto &entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), root).string();
    std::string name = entry.path().filename().string();
    if (name.size() > 10 && name.substr(name.size() - 10) == ".meta.json")
      continue;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".log") continue;
    paths.insert(rel);
  }
  return paths;
}

bool SameBytes(const fs::path &a, const fs::path &b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

Outcome CriterionReproducibility() {
  fs::path root = fs::temp_directory_path() /
                  ("patstd-acceptance-" + std::to_string(getpid()));
  std::error_code ec;
  fs::remove_all(root, ec);

  std::string error;
  fs::path run1 = root / "run1", run2 = root / "run2";
  if (!RunPipeline(run1, &error) || !RunPipeline(run2, &error)) {
    fs::remove_all(root, ec);
    return {false, error};
  }

  std::set<std::string> paths1 = ArtifactPaths(run1);
  std::set<std::string> paths2 = ArtifactPaths(run2);
  if (paths1 != paths2) {
    fs::remove_all(root, ec);
    return {false, StringPrintf("artifact sets differ: %zu vs %zu files",
                                paths1.size(), paths2.size())};
  }
  size_t mismatched = 0;
  std::string first_mismatch;
  for (const auto &rel : paths1)
    if (!SameBytes(run1 / rel, run2 / rel)) {
      mismatched++;
      if (first_mismatch.empty()) first_mismatch = rel;
    }
  fs::remove_all(root, ec);
  if (mismatched > 0)
    return {false, StringPrintf("%zu of %zu artifacts differ, first: %s",
                                mismatched, paths1.size(),
                                first_mismatch.c_str())};
  return {true, StringPrintf("full pipeline rerun: %zu artifacts "
                             "byte-identical (bundles, indexes, matrices, "
                             "score tables)",
                             paths1.size())};
}

}  // namespace
}  // namespace patstd

int main() {
  using namespace patstd;
  SetLogQuiet(true);

  struct Entry {
    const char *label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"decoding matches exhaustive enumeration", CriterionDecode},
      {"matching scores match exhaustive enumeration", CriterionMatching},
      {"re-estimation is monotone at every granularity",
       CriterionMonotonicity},
      {"posteriorgrams, similarities and weights are normalized",
       CriterionNormalization},
      {"posteriorgram and soft-similarity reductions hold",
       CriterionReductions},
      {"grid fusion is competitive with the best granularity",
       CriterionFusion},
      {"greedy weight selection transfers across splits", CriterionSelection},
      {"pattern search outpaces the frame-level baseline", CriterionSpeedup},
      {"average precision matches hand-computed values",
       CriterionAveragePrecision},
      {"the pipeline is byte-reproducible", CriterionReproducibility},
  };

  int passed = 0;
  const int total = static_cast<int>(sizeof(entries) / sizeof(entries[0]));
  for (int i = 0; i < total; i++) {
    auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = entries[i].fn();
    } catch (const std::exception &e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2d. %s: %s (%.1fs)\n",
                outcome.pass ? "PASS" : "FAIL", i + 1, entries[i].label,
                outcome.detail.c_str(), Seconds(start));
    std::fflush(stdout);
    if (outcome.pass) passed++;
  }
  std::printf("%d/%d acceptance criteria passed\n", passed, total);
  return passed == total ? 0 : 1;
}
