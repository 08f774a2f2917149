// patstd/tools/patstd.cc
//
// Single command-line entry point for the pattern-based spoken-term-detection
// pipeline. Stage-per-command design with on-disk artifact handoff:
//
//   synth       generate a synthetic feature corpus with planted terms
//   features    extract MFCC features from a WAV manifest
//   discover    train pattern inventories over a granularity grid
//   similarity  pattern-to-pattern similarity matrices
//   index       decode the corpus into transcriptions and posteriorgrams
//   search      score documents against queries and fuse rankings
//   evaluate    IR metrics, greedy weight selection, marginal analyses
//   bench       per-pair latency of pattern search vs frame DTW
//
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.

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

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "patstd/baum-welch.h"
#include "patstd/common.h"
#include "patstd/corpus.h"
#include "patstd/decode.h"
#include "patstd/discovery.h"
#include "patstd/evaluation.h"
#include "patstd/feature.h"
#include "patstd/indexing.h"
#include "patstd/pattern-hmm.h"
#include "patstd/retrieval.h"
#include "patstd/similarity.h"
#include "patstd/synth.h"
#include "patstd/wave-reader.h"

namespace patstd {
namespace {

constexpr const char *kToolVersion = "1.0.0";

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

uint64_t HashFileContent(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("unreadable input: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return Fnv1a(bytes.data(), bytes.size());
}

// Shared flags every subcommand understands.
struct CommonOptions {
  std::string out;
  std::string artifact_root;
  int workers = 1;
  bool force = false;
};

void AddCommonOptions(CLI::App *cmd, CommonOptions *opts) {
  cmd->add_option("--out", opts->out,
                  "Output directory (default: <artifact-root>/<stage>/<id>)");
  cmd->add_option("--artifact-root", opts->artifact_root,
                  "Artifact root (default: $PATSTD_ARTIFACT_ROOT or "
                  "./artifacts)")
      ->envname("PATSTD_ARTIFACT_ROOT");
  cmd->add_option("--workers", opts->workers, "Worker threads")
      ->check(CLI::Range(1, 1024));
  cmd->add_flag("--force", opts->force,
                "Proceed despite artifact provenance mismatches");
}

// Content-addressed default output directory for a stage.
std::string ResolveOutDir(const CommonOptions &opts, const std::string &stage,
                          const Provenance &prov) {
  fs::path dir;
  if (!opts.out.empty()) {
    dir = opts.out;
  } else {
    std::string root = opts.artifact_root;
    if (root.empty()) root = "artifacts";
    dir = fs::path(root) / stage / Hex16(prov.Ident());
  }
  fs::create_directories(dir);
  return dir.string();
}

// Sidecar run-metadata record. Contains timings, so it is excluded from the
// byte-identical determinism contract of the primary artifacts.
void WriteMeta(const std::string &out_dir, const std::string &command,
               const Provenance &prov, double seconds,
               const nlohmann::json &extra) {
  nlohmann::json meta;
  meta["command"] = command;
  meta["tool_version"] = kToolVersion;
  meta["config_hash"] = Hex16(prov.config_hash);
  meta["parent_hash"] = Hex16(prov.parent_hash);
  meta["ident"] = Hex16(prov.Ident());
  meta["duration_sec"] = seconds;
  for (const auto &[key, value] : extra.items()) meta[key] = value;
  std::string path = (fs::path(out_dir) / (command + ".meta.json")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write metadata: " + path);
  out << meta.dump(2) << "\n";
}

std::vector<std::string> ListFilesWithSuffix(const std::string &dir,
                                             const std::string &suffix) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

// Loads every utterance's features, keyed by id, in manifest order for the
// positional variant.
std::map<std::string, FeatureSequence> LoadFeatureMap(
    const CorpusManifest &manifest) {
  std::map<std::string, FeatureSequence> features;
  for (const auto *list : {&manifest.documents, &manifest.queries})
    for (const auto &utt : *list) {
      FeatureSequence fs = ReadFeatureFile(manifest.ResolvePath(utt));
      if (fs.utterance_id != utt.id)
        throw DataError(StringPrintf(
            "feature file %s carries id %s, manifest expects %s",
            manifest.ResolvePath(utt).c_str(), fs.utterance_id.c_str(),
            utt.id.c_str()));
      features[utt.id] = std::move(fs);
    }
  return features;
}

std::vector<FeatureSequence> DocumentFeatures(
    const CorpusManifest &manifest,
    const std::map<std::string, FeatureSequence> &features) {
  std::vector<FeatureSequence> docs;
  for (const auto &utt : manifest.documents) docs.push_back(features.at(utt.id));
  return docs;
}

// ---------------------------------------------------------------------------
// synth

int CmdSynth(const CommonOptions &common, const std::string &spec_path,
             uint64_t seed) {
  auto start = Clock::now();
  SyntheticSpec spec = ReadSyntheticSpec(spec_path);
  Provenance prov;
  prov.config_hash = Fnv1a(spec.CanonicalString() +
                           StringPrintf(";seed=%llu",
                                        (unsigned long long)seed));
  prov.parent_hash = 0;
  std::string out_dir = ResolveOutDir(common, "synth", prov);

  SynthResult result = SynthesizeCorpus(spec, seed);
  WriteSynthCorpus(out_dir, result, prov);

  nlohmann::json extra;
  extra["documents"] = result.manifest.documents.size();
  extra["queries"] = result.manifest.queries.size();
  extra["terms"] = result.lexicon.size();
  extra["seed"] = seed;
  WriteMeta(out_dir, "synth", prov, SecondsSince(start), extra);
  LogInfo("synth: %zu documents, %zu queries -> %s",
          result.manifest.documents.size(), result.manifest.queries.size(),
          out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// features

int CmdFeatures(const CommonOptions &common, const std::string &manifest_path,
                const FeatureConfig &config) {
  auto start = Clock::now();
  CorpusManifest manifest = ReadManifest(manifest_path);
  Provenance prov;
  prov.config_hash = Fnv1a(config.CanonicalString());
  prov.parent_hash = HashFileContent(manifest_path);
  std::string out_dir = ResolveOutDir(common, "features", prov);
  fs::create_directories(fs::path(out_dir) / "features");

  std::vector<const Utterance *> all;
  for (const auto &utt : manifest.documents) all.push_back(&utt);
  for (const auto &utt : manifest.queries) all.push_back(&utt);

  std::vector<FeatureSequence> extracted(all.size());
  std::vector<std::string> failures(all.size());
  ParallelFor(common.workers, static_cast<int>(all.size()), [&](int i) {
    try {
      Waveform wav = ReadWav(manifest.ResolvePath(*all[i]));
      extracted[i] =
          ExtractFeatures(wav.samples, wav.sample_rate, config, all[i]->id);
    } catch (const std::exception &e) {
      failures[i] = e.what();
    }
  });
  for (size_t i = 0; i < all.size(); i++)
    if (!failures[i].empty())
      throw DataError(StringPrintf("utterance %s: %s", all[i]->id.c_str(),
                                   failures[i].c_str()));

  CorpusManifest out_manifest = manifest;
  out_manifest.root = out_dir;
  for (auto *list : {&out_manifest.documents, &out_manifest.queries})
    for (auto &utt : *list) utt.path = "features/" + utt.id + ".feat";
  for (size_t i = 0; i < all.size(); i++)
    WriteFeatureFile(
        (fs::path(out_dir) / "features" / (all[i]->id + ".feat")).string(),
        extracted[i], prov);
  WriteManifest((fs::path(out_dir) / "manifest.tsv").string(), out_manifest);

  nlohmann::json extra;
  extra["utterances"] = all.size();
  extra["feature_dim"] = config.Dim();
  WriteMeta(out_dir, "features", prov, SecondsSince(start), extra);
  LogInfo("features: %zu utterances, dim %d -> %s", all.size(), config.Dim(),
          out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// discover

int CmdDiscover(const CommonOptions &common, const std::string &manifest_path,
                DiscoveryConfig config, const std::vector<int> &m_values,
                const std::vector<int> &n_values,
                const std::vector<int> &l_values) {
  auto start = Clock::now();
  config.grid = ExpandGrid(m_values, n_values, l_values);
  config.num_workers = common.workers;
  config.Validate();

  CorpusManifest manifest = ReadManifest(manifest_path);
  std::map<std::string, FeatureSequence> features = LoadFeatureMap(manifest);
  std::vector<FeatureSequence> docs = DocumentFeatures(manifest, features);

  std::ostringstream config_str;
  config_str << "max_iter=" << config.max_iterations << ";threshold="
             << FormatDouble(config.convergence_threshold) << ";em_steps="
             << config.em_steps << ";seed=" << config.seed << ";grid=";
  for (const auto &psi : config.grid) config_str << psi.Tag() << ",";
  Provenance prov;
  prov.config_hash = Fnv1a(config_str.str());
  prov.parent_hash = HashFileContent(manifest_path);
  std::string out_dir = ResolveOutDir(common, "patterns", prov);

  GridResult grid = RunGrid(docs, config);

  std::ofstream listing((fs::path(out_dir) / "grid.tsv").string(),
                        std::ios::binary);
  if (!listing) throw DataError("cannot write grid listing");
  listing << "# psi\tstatus\n";
  for (const auto &[psi, set] : grid.sets) {
    std::string base = (fs::path(out_dir) / psi.Tag()).string();
    WritePatternSet(base + ".pset", set, prov);
    WritePatternSetSummary(base + ".txt", set);
    listing << psi.Tag() << "\tok\n";
  }
  for (const auto &[psi, error] : grid.errors) {
    LogWarn("discover %s failed: %s", psi.Tag().c_str(), error.c_str());
    listing << psi.Tag() << "\tfailed: " << error << "\n";
  }
  listing.close();
  if (grid.sets.empty()) throw DataError("every grid cell failed to train");

  nlohmann::json extra;
  extra["trained"] = grid.sets.size();
  extra["failed"] = grid.errors.size();
  WriteMeta(out_dir, "discover", prov, SecondsSince(start), extra);
  LogInfo("discover: %zu pattern sets (%zu failures) -> %s", grid.sets.size(),
          grid.errors.size(), out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// similarity

int CmdSimilarity(const CommonOptions &common, const std::string &patterns_dir,
                  const std::string &mode_name, double beta) {
  auto start = Clock::now();
  SimilarityMode mode;
  if (mode_name == "hard") mode = SimilarityMode::kHard;
  else if (mode_name == "soft") mode = SimilarityMode::kSoft;
  else throw UsageError("similarity mode must be hard or soft");

  std::vector<std::string> pset_paths =
      ListFilesWithSuffix(patterns_dir, ".pset");
  if (pset_paths.empty())
    throw DataError("no pattern sets under " + patterns_dir);

  Provenance dir_prov;
  dir_prov.config_hash = Fnv1a(StringPrintf(
      "mode=%s;beta=%s", mode_name.c_str(), FormatDouble(beta).c_str()));
  dir_prov.parent_hash = HashFileContent(pset_paths.front());
  std::string out_dir = ResolveOutDir(common, "similarity", dir_prov);

  for (const auto &path : pset_paths) {
    Provenance pset_prov;
    PatternSet set = ReadPatternSet(path, &pset_prov);
    double effective_beta =
        mode == SimilarityMode::kHard ? 0.0
        : beta > 0.0                  ? beta
                                      : DefaultBeta(set.config.m);
    SimilarityMatrix matrix =
        BuildSimilarity(set, mode, effective_beta, common.workers);
    Provenance prov;
    prov.config_hash = dir_prov.config_hash;
    prov.parent_hash = pset_prov.Ident();
    std::string out = (fs::path(out_dir) /
                       (set.config.Tag() + "." + mode_name + ".simm"))
                          .string();
    WriteSimilarityMatrix(out, matrix, prov);
  }

  nlohmann::json extra;
  extra["matrices"] = pset_paths.size();
  extra["mode"] = mode_name;
  WriteMeta(out_dir, "similarity", dir_prov, SecondsSince(start), extra);
  LogInfo("similarity: %zu matrices (%s) -> %s", pset_paths.size(),
          mode_name.c_str(), out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// index

int CmdIndex(const CommonOptions &common, const std::string &patterns_dir,
             const std::string &manifest_path, int nbest) {
  auto start = Clock::now();
  if (nbest < 1) throw UsageError("--nbest must be >= 1");
  std::vector<std::string> pset_paths =
      ListFilesWithSuffix(patterns_dir, ".pset");
  if (pset_paths.empty())
    throw DataError("no pattern sets under " + patterns_dir);

  CorpusManifest manifest = ReadManifest(manifest_path);
  std::map<std::string, FeatureSequence> feature_map =
      LoadFeatureMap(manifest);
  std::vector<FeatureSequence> corpus;
  for (const auto &[id, fs_seq] : feature_map) corpus.push_back(fs_seq);

  Provenance dir_prov;
  dir_prov.config_hash = Fnv1a(StringPrintf("nbest=%d", nbest));
  dir_prov.parent_hash = HashFileContent(pset_paths.front());
  std::string out_dir = ResolveOutDir(common, "index", dir_prov);

  for (const auto &path : pset_paths) {
    Provenance pset_prov;
    PatternSet set = ReadPatternSet(path, &pset_prov);
    ArchiveIndex index = BuildIndex(set, corpus, nbest, common.workers);
    Provenance prov;
    prov.config_hash = dir_prov.config_hash;
    prov.parent_hash = pset_prov.Ident();
    std::string base = (fs::path(out_dir) / set.config.Tag()).string();
    WriteArchiveIndex(base + ".indx", index, prov);
    WriteIndexTranscripts(base + ".trans.tsv", index);
  }

  nlohmann::json extra;
  extra["indexes"] = pset_paths.size();
  extra["nbest"] = nbest;
  extra["utterances"] = corpus.size();
  WriteMeta(out_dir, "index", dir_prov, SecondsSince(start), extra);
  LogInfo("index: %zu pattern sets x %zu utterances (N=%d) -> %s",
          pset_paths.size(), corpus.size(), nbest, out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// search

std::vector<SearchMethod> ParseMethods(const std::string &spec) {
  if (spec == "all") return SearchMethod::All();
  std::vector<SearchMethod> methods;
  std::istringstream ss(spec);
  std::string tag;
  while (std::getline(ss, tag, ','))
    if (!tag.empty()) methods.push_back(SearchMethod::FromTag(tag));
  if (methods.empty()) throw UsageError("no search methods given");
  return methods;
}

int CmdSearch(const CommonOptions &common, const std::string &index_dir,
              const std::string &similarity_dir,
              const std::string &manifest_path, const std::string &methods_arg,
              const std::string &lambda_arg, bool dtw_raw) {
  auto start = Clock::now();
  std::vector<SearchMethod> methods = ParseMethods(methods_arg);
  CorpusManifest manifest = ReadManifest(manifest_path);

  std::vector<std::string> index_paths =
      ListFilesWithSuffix(index_dir, ".indx");
  if (index_paths.empty()) throw DataError("no indexes under " + index_dir);

  Provenance run_prov;
  run_prov.config_hash =
      Fnv1a("methods=" + methods_arg + ";lambda=" + lambda_arg +
            (dtw_raw ? ";dtw=raw" : ";dtw=normalized"));
  run_prov.parent_hash = HashFileContent(index_paths.front());
  std::string out_dir = ResolveOutDir(common, "search", run_prov);

  RelevanceTable table;
  std::set<std::string> excluded;
  for (const auto &index_path : index_paths) {
    Provenance index_prov;
    ArchiveIndex index = ReadArchiveIndex(index_path, &index_prov);
    for (const auto &[id, error] : index.failures) {
      LogWarn("%s: utterance %s excluded (%s)", index.psi.Tag().c_str(),
              id.c_str(), error.c_str());
      excluded.insert(id);
    }

    // One similarity matrix per mode actually used.
    std::map<bool, SimilarityMatrix> matrices;
    for (const auto &gamma : methods) {
      if (matrices.count(gamma.soft)) continue;
      std::string simm_path =
          (fs::path(similarity_dir) /
           (index.psi.Tag() + (gamma.soft ? ".soft.simm" : ".hard.simm")))
              .string();
      if (!fs::exists(simm_path))
        throw DataError("missing upstream artifact: " + simm_path);
      Provenance simm_prov;
      SimilarityMatrix matrix = ReadSimilarityMatrix(simm_path, &simm_prov);
      if (simm_prov.parent_hash != index_prov.parent_hash) {
        if (!common.force)
          throw DataError(StringPrintf(
              "provenance mismatch for %s: similarity parent %s vs index "
              "parent %s (rerun upstream or pass --force)",
              index.psi.Tag().c_str(), Hex16(simm_prov.parent_hash).c_str(),
              Hex16(index_prov.parent_hash).c_str()));
        LogWarn("forcing past provenance mismatch for %s",
                index.psi.Tag().c_str());
      }
      matrices.emplace(gamma.soft, std::move(matrix));
    }

    std::vector<const Utterance *> queries, docs;
    for (const auto &utt : manifest.queries)
      if (!excluded.count(utt.id)) queries.push_back(&utt);
    for (const auto &utt : manifest.documents)
      if (!excluded.count(utt.id)) docs.push_back(&utt);

    for (const auto &gamma : methods) {
      const SimilarityMatrix &matrix = matrices.at(gamma.soft);
      ScoreTable scores;
      scores.psi = index.psi;
      scores.gamma = gamma;
      std::vector<std::vector<std::pair<std::string, double>>> per_query(
          queries.size());
      ParallelFor(
          common.workers, static_cast<int>(queries.size()), [&](int qi) {
            const auto &query_id = queries[qi]->id;
            const Transcription &query_trans =
                index.transcriptions.at(query_id);
            const PosteriorgramSequence &query_pg =
                index.posteriorgrams.at(query_id);
            for (const auto *doc : docs) {
              double score = Relevance(
                  index.transcriptions.at(doc->id),
                  index.posteriorgrams.at(doc->id), query_trans, query_pg,
                  matrix, gamma, !dtw_raw);
              per_query[qi].push_back({doc->id, score});
            }
          });
      for (size_t qi = 0; qi < queries.size(); qi++)
        for (const auto &[doc_id, score] : per_query[qi])
          scores.scores[{queries[qi]->id, doc_id}] = score;
      table.tables.push_back(std::move(scores));
    }
  }
  table.Sort();
  WriteScoreTables((fs::path(out_dir) / "scores.tsv").string(), table);

  LambdaSet lambda;
  if (lambda_arg == "all") {
    for (const auto &t : table.tables)
      lambda.insert({t.psi, t.gamma.Bits()});
  } else {
    lambda = ReadLambdaFile(lambda_arg);
  }
  WriteLambdaFile((fs::path(out_dir) / "lambda.tsv").string(), table, lambda);

  std::string rankings_path = (fs::path(out_dir) / "rankings.tsv").string();
  if (lambda.empty()) {
    LogWarn("no search methods enabled; rankings are empty");
    WriteRankings(rankings_path, {});
  } else {
    WriteRankings(rankings_path, RankByQuery(Fuse(table, lambda)));
  }

  nlohmann::json extra;
  extra["score_tables"] = table.tables.size();
  extra["enabled"] = lambda.size();
  extra["excluded_utterances"] = excluded.size();
  WriteMeta(out_dir, "search", run_prov, SecondsSince(start), extra);
  LogInfo("search: %zu score tables, %zu enabled -> %s", table.tables.size(),
          lambda.size(), out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

RelevanceTable FilterTable(const RelevanceTable &table,
                           const std::set<std::string> &queries) {
  RelevanceTable filtered;
  for (const auto &t : table.tables) {
    ScoreTable ft;
    ft.psi = t.psi;
    ft.gamma = t.gamma;
    for (const auto &[key, score] : t.scores)
      if (queries.count(key.first)) ft.scores[key] = score;
    filtered.tables.push_back(std::move(ft));
  }
  return filtered;
}

Judgments FilterJudgments(const Judgments &judgments,
                          const std::set<std::string> &queries) {
  Judgments filtered;
  for (const auto &[query, relevant] : judgments)
    if (queries.count(query)) filtered[query] = relevant;
  return filtered;
}

int CmdEvaluate(const CommonOptions &common, const std::string &scores_path,
                const std::string &manifest_path, int budget,
                const std::string &plane_gamma_tag, int plane_l) {
  auto start = Clock::now();
  RelevanceTable table = ReadScoreTables(scores_path);
  if (table.tables.empty()) throw DataError("score table file is empty");
  CorpusManifest manifest = ReadManifest(manifest_path);
  Judgments judgments = manifest.judgments;

  Provenance prov;
  prov.config_hash = Fnv1a(StringPrintf(
      "budget=%d;plane=%s;l=%d", budget, plane_gamma_tag.c_str(), plane_l));
  prov.parent_hash = HashFileContent(scores_path);
  std::string out_dir = ResolveOutDir(common, "evaluate", prov);

  // All-ones fusion over every computed (psi, gamma).
  LambdaSet all_ones;
  for (const auto &t : table.tables) all_ones.insert({t.psi, t.gamma.Bits()});
  EvaluationReport report =
      Evaluate(RankByQuery(Fuse(table, all_ones)), judgments);
  WriteEvaluationCsv((fs::path(out_dir) / "report.csv").string(), report);
  WritePerMethodCsv((fs::path(out_dir) / "per_method.csv").string(),
                    PerMethodMap(table, judgments));

  // Alternating dev/eval split over sorted query ids keeps both splits
  // covering the term inventory.
  std::set<std::string> judged;
  for (const auto &[query, relevant] : judgments)
    if (!relevant.empty()) judged.insert(query);
  std::set<std::string> dev_queries, eval_queries;
  int position = 0;
  for (const auto &query : judged)
    ((position++ % 2 == 0) ? dev_queries : eval_queries).insert(query);

  nlohmann::json extra;
  extra["map"] = report.map;
  extra["queries"] = report.num_queries;

  if (!dev_queries.empty() && !eval_queries.empty()) {
    RelevanceTable dev_table = FilterTable(table, dev_queries);
    RelevanceTable eval_table = FilterTable(table, eval_queries);
    Judgments dev_judgments = FilterJudgments(judgments, dev_queries);
    Judgments eval_judgments = FilterJudgments(judgments, eval_queries);

    int effective_budget = budget > 0
                               ? budget
                               : std::min<int>(20, table.tables.size());
    std::vector<SelectionStep> steps =
        GreedySelect(dev_table, dev_judgments, effective_budget);
    std::vector<double> eval_trace =
        TraceOnSplit(steps, eval_table, eval_judgments);
    WriteSelectionTrace((fs::path(out_dir) / "trace.csv").string(), steps,
                        eval_trace);

    LambdaSet selected;
    for (const auto &step : steps) selected.insert({step.psi,
                                                    step.gamma.Bits()});
    WriteLambdaFile((fs::path(out_dir) / "selected_lambda.tsv").string(),
                    table, selected);

    std::vector<SelectionStep> oracle =
        GreedySelect(eval_table, eval_judgments, effective_budget);
    WriteSelectionTrace((fs::path(out_dir) / "oracle_trace.csv").string(),
                        oracle, {});

    double all_ones_eval = FusedMap(eval_table, all_ones, eval_judgments);
    double selected_eval = eval_trace.back();
    double oracle_eval = oracle.back().dev_map;
    std::string sel_path = (fs::path(out_dir) / "selection.txt").string();
    std::ofstream sel(sel_path, std::ios::binary);
    if (!sel) throw DataError("cannot write: " + sel_path);
    sel << "budget: " << effective_budget << "\n"
        << "all-ones eval MAP:     " << FormatDouble(all_ones_eval) << "\n"
        << "dev-selected eval MAP: " << FormatDouble(selected_eval) << "\n"
        << "oracle eval MAP:       " << FormatDouble(oracle_eval) << "\n";
    extra["all_ones_eval_map"] = all_ones_eval;
    extra["selected_eval_map"] = selected_eval;
    extra["oracle_eval_map"] = oracle_eval;
  } else {
    LogWarn("fewer than two judged queries; skipping greedy selection");
  }

  SearchMethod plane_gamma = SearchMethod::FromTag(plane_gamma_tag);
  if (table.Find(table.tables.front().psi, plane_gamma) != nullptr ||
      std::any_of(table.tables.begin(), table.tables.end(),
                  [&](const ScoreTable &t) { return t.gamma == plane_gamma; })) {
    MarginalReport marginals =
        ComputeMarginals(table, judgments, plane_gamma, plane_l);
    WriteMarginalReport((fs::path(out_dir) / "marginals").string(), marginals);
    for (const auto &warning : marginals.warnings)
      LogWarn("%s", warning.c_str());
  } else {
    LogWarn("no score tables for method %s; skipping marginal analysis",
            plane_gamma_tag.c_str());
  }

  WriteEvaluationSummary((fs::path(out_dir) / "summary.txt").string(), report);
  WriteMeta(out_dir, "evaluate", prov, SecondsSince(start), extra);
  LogInfo("evaluate: MAP %.4f over %d queries -> %s", report.map,
          report.num_queries, out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

int CmdBench(const CommonOptions &common, const std::string &manifest_path,
             const std::string &index_path, const std::string &simm_path,
             int max_pairs) {
  auto start = Clock::now();
  if (max_pairs < 1) throw UsageError("--pairs must be >= 1");
  CorpusManifest manifest = ReadManifest(manifest_path);
  std::map<std::string, FeatureSequence> features = LoadFeatureMap(manifest);

  Provenance index_prov;
  ArchiveIndex index = ReadArchiveIndex(index_path, &index_prov);
  Provenance simm_prov;
  SimilarityMatrix matrix = ReadSimilarityMatrix(simm_path, &simm_prov);
  if (simm_prov.parent_hash != index_prov.parent_hash && !common.force)
    throw DataError(
        "provenance mismatch between index and similarity matrix "
        "(rerun upstream or pass --force)");

  Provenance prov;
  prov.config_hash = Fnv1a(StringPrintf("pairs=%d", max_pairs));
  prov.parent_hash = index_prov.Ident();
  std::string out_dir = ResolveOutDir(common, "bench", prov);

  // Deterministic pair sample: queries in manifest order, documents cycled.
  std::vector<std::pair<const Utterance *, const Utterance *>> pairs;
  for (size_t offset = 0; pairs.size() < (size_t)max_pairs; offset++) {
    bool grew = false;
    for (const auto &query : manifest.queries) {
      if (pairs.size() >= (size_t)max_pairs) break;
      size_t doc_index = (pairs.size() + offset) % manifest.documents.size();
      const Utterance &doc = manifest.documents[doc_index];
      if (index.failures.count(query.id) || index.failures.count(doc.id))
        continue;
      pairs.push_back({&query, &doc});
      grew = true;
    }
    if (!grew) break;
  }
  if (pairs.empty()) throw DataError("no usable query-document pairs");

  SearchMethod sub_method;   // hard similarity, 1-best, SUB
  SearchMethod dtw_method;
  dtw_method.dtw = true;
  if (matrix.mode == SimilarityMode::kSoft) {
    sub_method.soft = true;
    dtw_method.soft = true;
  }

  double frame_total = 0.0, sub_total = 0.0, dtw_total = 0.0;
  volatile double sink = 0.0;
  for (const auto &[query, doc] : pairs) {
    const FeatureSequence &qf = features.at(query->id);
    const FeatureSequence &df = features.at(doc->id);
    const Transcription &qt = index.transcriptions.at(query->id);
    const Transcription &dt = index.transcriptions.at(doc->id);
    const PosteriorgramSequence &qp = index.posteriorgrams.at(query->id);
    const PosteriorgramSequence &dp = index.posteriorgrams.at(doc->id);

    auto t0 = Clock::now();
    sink = sink + FrameDtwBaseline(qf, df, true);
    frame_total += SecondsSince(t0);

    t0 = Clock::now();
    sink = sink + Relevance(dt, dp, qt, qp, matrix, sub_method, true);
    sub_total += SecondsSince(t0);

    t0 = Clock::now();
    sink = sink + Relevance(dt, dp, qt, qp, matrix, dtw_method, true);
    dtw_total += SecondsSince(t0);
  }

  const double n_pairs = static_cast<double>(pairs.size());
  const double frame_us = 1e6 * frame_total / n_pairs;
  const double sub_us = 1e6 * sub_total / n_pairs;
  const double dtw_us = 1e6 * dtw_total / n_pairs;
  const int dim = features.begin()->second.dim;
  const int m = index.psi.m;

  std::string report_path = (fs::path(out_dir) / "bench.txt").string();
  std::ofstream report(report_path, std::ios::binary);
  if (!report) throw DataError("cannot write: " + report_path);
  report << "pairs: " << pairs.size() << "\n"
         << "psi: " << index.psi.Tag() << "\n"
         << "frame_dtw_mean_us:   " << StringPrintf("%.3f", frame_us) << "\n"
         << "pattern_sub_mean_us: " << StringPrintf("%.3f", sub_us) << "\n"
         << "pattern_dtw_mean_us: " << StringPrintf("%.3f", dtw_us) << "\n"
         << "sub_speedup: " << StringPrintf("%.2f", frame_us / sub_us) << "\n"
         << "dtw_speedup: " << StringPrintf("%.2f", frame_us / dtw_us) << "\n"
         << "theoretical factor F*m^2: " << dim * m * m << " (F=" << dim
         << ", m=" << m << ")\n";
  report.close();

  LogInfo("bench: frame %.1fus, sub %.1fus (%.1fx), dtw %.1fus (%.1fx)",
          frame_us, sub_us, frame_us / sub_us, dtw_us, frame_us / dtw_us);
  nlohmann::json extra;
  extra["pairs"] = pairs.size();
  extra["frame_dtw_mean_us"] = frame_us;
  extra["pattern_sub_mean_us"] = sub_us;
  extra["pattern_dtw_mean_us"] = dtw_us;
  WriteMeta(out_dir, "bench", prov, SecondsSince(start), extra);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int Main(int argc, char **argv) {
  CLI::App app{
      "patstd: unsupervised pattern discovery and spoken term detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("patstd ") + kToolVersion);
  app.set_config("--config", "", "Read flags from a config file");
  app.allow_config_extras(false);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress informational logging");

  // synth ------------------------------------------------------------------
  CommonOptions synth_common;
  std::string synth_spec;
  uint64_t synth_seed = 0;
  CLI::App *synth = app.add_subcommand("synth",
                                       "Generate a synthetic feature corpus");
  AddCommonOptions(synth, &synth_common);
  synth->add_option("--spec", synth_spec, "Synthetic corpus spec (JSON)")
      ->required();
  synth->add_option("--seed", synth_seed, "Random seed");

  // features ---------------------------------------------------------------
  CommonOptions feat_common;
  std::string feat_manifest;
  FeatureConfig feat_config;
  CLI::App *features =
      app.add_subcommand("features", "Extract MFCC features from WAV files");
  AddCommonOptions(features, &feat_common);
  features->add_option("--manifest", feat_manifest, "Audio corpus manifest")
      ->required();
  features->add_option("--window", feat_config.window_sec, "Window (seconds)");
  features->add_option("--shift", feat_config.shift_sec, "Shift (seconds)");
  features->add_option("--preemphasis", feat_config.preemphasis,
                       "Pre-emphasis coefficient");
  features->add_option("--mel-filters", feat_config.mel_filters,
                       "Mel filter count");
  features->add_option("--num-ceps", feat_config.num_ceps,
                       "Cepstral coefficients (C0 included)");
  features->add_option("--delta-window", feat_config.delta_window,
                       "Delta regression half-window");
  features->add_flag("--cmn", feat_config.cmn,
                     "Per-utterance cepstral mean normalization");

  // discover ----------------------------------------------------------------
  CommonOptions disc_common;
  std::string disc_manifest;
  DiscoveryConfig disc_config;
  std::vector<int> grid_m = {3}, grid_n = {8}, grid_l = {1};
  CLI::App *discover =
      app.add_subcommand("discover", "Train pattern sets over a grid");
  AddCommonOptions(discover, &disc_common);
  discover->add_option("--manifest", disc_manifest, "Feature corpus manifest")
      ->required();
  discover->add_option("--m", grid_m, "States per pattern (list)")
      ->delimiter(',');
  discover->add_option("--n", grid_n, "Patterns per set (list)")
      ->delimiter(',');
  discover->add_option("--l", grid_l, "Gaussians per state (list)")
      ->delimiter(',');
  discover->add_option("--seed", disc_config.seed, "Random seed");
  discover->add_option("--max-iterations", disc_config.max_iterations,
                       "Maximum training iterations");
  discover->add_option("--em-steps", disc_config.em_steps,
                       "Baum-Welch steps per label update");
  discover->add_option("--threshold", disc_config.convergence_threshold,
                       "Frame-label change fraction for convergence");

  // similarity ---------------------------------------------------------------
  CommonOptions simm_common;
  std::string simm_patterns, simm_mode = "soft";
  double simm_beta = 0.0;
  CLI::App *similarity = app.add_subcommand(
      "similarity", "Pattern-to-pattern similarity matrices");
  AddCommonOptions(similarity, &simm_common);
  similarity
      ->add_option("--patterns", simm_patterns, "Directory of .pset bundles")
      ->required();
  similarity->add_option("--mode", simm_mode, "hard or soft");
  similarity->add_option("--beta", simm_beta,
                         "Soft-mode temperature (default: 100*m per set)");

  // index ---------------------------------------------------------------------
  CommonOptions index_common;
  std::string index_patterns, index_manifest;
  int index_nbest = 5;
  CLI::App *index_cmd =
      app.add_subcommand("index", "Decode the corpus into archive indexes");
  AddCommonOptions(index_cmd, &index_common);
  index_cmd
      ->add_option("--patterns", index_patterns, "Directory of .pset bundles")
      ->required();
  index_cmd->add_option("--manifest", index_manifest,
                        "Feature corpus manifest")
      ->required();
  index_cmd->add_option("--nbest", index_nbest, "N-best depth");

  // search ---------------------------------------------------------------------
  CommonOptions search_common;
  std::string search_index, search_simm, search_manifest;
  std::string search_methods = "all", search_lambda = "all";
  bool search_dtw_raw = false;
  CLI::App *search =
      app.add_subcommand("search", "Score documents against queries");
  AddCommonOptions(search, &search_common);
  search->add_option("--index", search_index, "Directory of .indx files")
      ->required();
  search
      ->add_option("--similarity", search_simm, "Directory of .simm files")
      ->required();
  search
      ->add_option("--manifest", search_manifest, "Feature corpus manifest")
      ->required();
  search->add_option("--methods", search_methods,
                     "Comma-separated method tags (SND bits) or 'all'");
  search->add_option("--lambda", search_lambda,
                     "'all' or a lambda file enabling (psi, gamma) pairs");
  search->add_flag("--dtw-raw", search_dtw_raw,
                   "Unnormalized DTW scores (default: path-length "
                   "normalized)");

  // evaluate ---------------------------------------------------------------------
  CommonOptions eval_common;
  std::string eval_scores, eval_manifest, eval_plane_gamma = "100";
  int eval_budget = 0, eval_plane_l = 1;
  CLI::App *evaluate =
      app.add_subcommand("evaluate", "IR metrics and weight selection");
  AddCommonOptions(evaluate, &eval_common);
  evaluate->add_option("--scores", eval_scores, "scores.tsv from search")
      ->required();
  evaluate
      ->add_option("--manifest", eval_manifest,
                   "Corpus manifest carrying judgments")
      ->required();
  evaluate->add_option("--budget", eval_budget,
                       "Greedy selection budget (default: min(20, tables))");
  evaluate->add_option("--plane-gamma", eval_plane_gamma,
                       "Method tag for the marginal analyses");
  evaluate->add_option("--plane-l", eval_plane_l,
                       "Gaussians-per-state slice for the (m,n) plane");

  // bench ---------------------------------------------------------------------
  CommonOptions bench_common;
  std::string bench_manifest, bench_index, bench_simm;
  int bench_pairs = 200;
  CLI::App *bench = app.add_subcommand(
      "bench", "Per-pair latency: pattern search vs frame DTW");
  AddCommonOptions(bench, &bench_common);
  bench
      ->add_option("--manifest", bench_manifest, "Feature corpus manifest")
      ->required();
  bench->add_option("--index", bench_index, "Archive index (.indx)")
      ->required();
  bench->add_option("--similarity", bench_simm, "Similarity matrix (.simm)")
      ->required();
  bench->add_option("--pairs", bench_pairs, "Query-document pairs to time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  SetLogQuiet(quiet);
  try {
    if (synth->parsed())
      return CmdSynth(synth_common, synth_spec, synth_seed);
    if (features->parsed())
      return CmdFeatures(feat_common, feat_manifest, feat_config);
    if (discover->parsed())
      return CmdDiscover(disc_common, disc_manifest, disc_config, grid_m,
                         grid_n, grid_l);
    if (similarity->parsed())
      return CmdSimilarity(simm_common, simm_patterns, simm_mode, simm_beta);
    if (index_cmd->parsed())
      return CmdIndex(index_common, index_patterns, index_manifest,
                      index_nbest);
    if (search->parsed())
      return CmdSearch(search_common, search_index, search_simm,
                       search_manifest, search_methods, search_lambda,
                       search_dtw_raw);
    if (evaluate->parsed())
      return CmdEvaluate(eval_common, eval_scores, eval_manifest, eval_budget,
                         eval_plane_gamma, eval_plane_l);
    if (bench->parsed())
      return CmdBench(bench_common, bench_manifest, bench_index, bench_simm,
                      bench_pairs);
    throw UsageError("no command given");
  } catch (const UsageError &e) {
    fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError &e) {
    fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const InternalError &e) {
    fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const std::exception &e) {
    fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}

}  // namespace
}  // namespace patstd

int main(int argc, char **argv) { return patstd::Main(argc, argv); }
