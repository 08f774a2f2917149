// patstd/src/evaluation.cc

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

#include "patstd/evaluation.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "patstd/common.h"

namespace patstd {

double AveragePrecision(const std::vector<std::string> &ranking,
                        const std::set<std::string> &relevant) {
  if (relevant.empty())
    throw DataError("average precision undefined for an empty relevant set");
  int hits = 0;
  double sum = 0.0;
  for (size_t rank = 0; rank < ranking.size(); rank++) {
    if (relevant.count(ranking[rank]) == 0) continue;
    hits++;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits != static_cast<int>(relevant.size()))
    throw DataError(StringPrintf(
        "%zu judged documents missing from a ranking of %zu",
        relevant.size() - hits, ranking.size()));
  return sum / static_cast<double>(relevant.size());
}

double PrecisionAtK(const std::vector<std::string> &ranking,
                    const std::set<std::string> &relevant, int k) {
  if (k < 1) throw UsageError("precision at k requires k >= 1");
  int hits = 0;
  const size_t top = std::min(ranking.size(), static_cast<size_t>(k));
  for (size_t rank = 0; rank < top; rank++)
    if (relevant.count(ranking[rank]) > 0) hits++;
  return static_cast<double>(hits) / static_cast<double>(k);
}

namespace {

std::vector<std::string> DocIds(
    const std::vector<std::pair<std::string, double>> &ranked) {
  std::vector<std::string> ids;
  ids.reserve(ranked.size());
  for (const auto &[doc, score] : ranked) ids.push_back(doc);
  return ids;
}

}  // namespace

EvaluationReport Evaluate(const Rankings &rankings,
                          const Judgments &judgments) {
  EvaluationReport report;
  double ap_sum = 0.0, p5_sum = 0.0, p10_sum = 0.0;
  for (const auto &[query, ranked] : rankings) {
    auto it = judgments.find(query);
    if (it == judgments.end() || it->second.empty()) continue;
    std::vector<std::string> ids = DocIds(ranked);
    double ap = AveragePrecision(ids, it->second);
    report.per_query_ap[query] = ap;
    ap_sum += ap;
    p5_sum += PrecisionAtK(ids, it->second, 5);
    p10_sum += PrecisionAtK(ids, it->second, 10);
    report.num_queries++;
  }
  if (report.num_queries == 0)
    throw DataError("no ranked query has a non-empty judgment list");
  report.map = ap_sum / report.num_queries;
  report.p_at_5 = p5_sum / report.num_queries;
  report.p_at_10 = p10_sum / report.num_queries;
  return report;
}

double FusedMap(const RelevanceTable &tables, const LambdaSet &lambda,
                const Judgments &judgments) {
  return Evaluate(RankByQuery(Fuse(tables, lambda)), judgments).map;
}

std::map<std::pair<std::string, std::string>, double> PerMethodMap(
    const RelevanceTable &tables, const Judgments &judgments) {
  std::map<std::pair<std::string, std::string>, double> result;
  for (const auto &t : tables.tables) {
    LambdaSet one = {{t.psi, t.gamma.Bits()}};
    result[{t.psi.Tag(), t.gamma.Tag()}] = FusedMap(tables, one, judgments);
  }
  return result;
}

std::vector<SelectionStep> GreedySelect(const RelevanceTable &dev_tables,
                                        const Judgments &dev_judgments,
                                        int budget) {
  if (budget < 1) throw UsageError("selection budget must be >= 1");
  if (static_cast<size_t>(budget) > dev_tables.tables.size())
    throw UsageError(StringPrintf(
        "selection budget %d exceeds the %zu available score tables", budget,
        dev_tables.tables.size()));

  // Candidates in lexicographic (m, n, l, gamma bits) order, so that the
  // strict-improvement comparison keeps the first best on ties.
  std::vector<const ScoreTable *> candidates;
  for (const auto &t : dev_tables.tables) candidates.push_back(&t);
  std::sort(candidates.begin(), candidates.end(),
            [](const ScoreTable *a, const ScoreTable *b) {
              if (a->psi != b->psi) return a->psi < b->psi;
              return a->gamma < b->gamma;
            });

  std::map<std::pair<std::string, std::string>, double> fused;
  for (const auto &[key, value] : candidates.front()->scores) fused[key] = 0.0;

  std::vector<SelectionStep> steps;
  std::vector<bool> used(candidates.size(), false);
  for (int step = 0; step < budget; step++) {
    int best_index = -1;
    double best_map = 0.0;
    for (size_t c = 0; c < candidates.size(); c++) {
      if (used[c]) continue;
      if (candidates[c]->scores.size() != fused.size())
        throw DataError(StringPrintf(
            "score table %s %s covers %zu pairs, expected %zu",
            candidates[c]->psi.Tag().c_str(),
            candidates[c]->gamma.Tag().c_str(), candidates[c]->scores.size(),
            fused.size()));
      std::map<std::pair<std::string, std::string>, double> trial = fused;
      for (const auto &[key, value] : candidates[c]->scores)
        trial.at(key) += value;
      double map = Evaluate(RankByQuery(trial), dev_judgments).map;
      if (best_index < 0 || map > best_map) {
        best_index = static_cast<int>(c);
        best_map = map;
      }
    }
    used[best_index] = true;
    for (const auto &[key, value] : candidates[best_index]->scores)
      fused.at(key) += value;
    steps.push_back(
        {candidates[best_index]->psi, candidates[best_index]->gamma, best_map});
  }
  return steps;
}

std::vector<double> TraceOnSplit(const std::vector<SelectionStep> &steps,
                                 const RelevanceTable &tables,
                                 const Judgments &judgments) {
  std::vector<double> maps;
  LambdaSet lambda;
  for (const auto &step : steps) {
    lambda.insert({step.psi, step.gamma.Bits()});
    maps.push_back(FusedMap(tables, lambda, judgments));
  }
  return maps;
}

MarginalReport ComputeMarginals(const RelevanceTable &tables,
                                const Judgments &judgments,
                                const SearchMethod &gamma, int plane_l) {
  MarginalReport report;
  std::set<int> ms, ns, ls;
  std::set<GranularityConfig> present;
  for (const auto &t : tables.tables) {
    if (!(t.gamma == gamma)) continue;
    ms.insert(t.psi.m);
    ns.insert(t.psi.n);
    ls.insert(t.psi.l);
    present.insert(t.psi);
  }
  if (present.empty())
    throw DataError("no score tables for the requested search method");
  for (int m : ms)
    for (int n : ns)
      for (int l : ls)
        if (present.count({m, n, l}) == 0)
          report.warnings.push_back(StringPrintf(
              "missing grid cell m%d_n%d_l%d; marginals are partial", m, n,
              l));

  auto fused_map_where = [&](auto &&keep) -> double {
    LambdaSet lambda;
    for (const auto &psi : present)
      if (keep(psi)) lambda.insert({psi, gamma.Bits()});
    if (lambda.empty()) return -1.0;
    return FusedMap(tables, lambda, judgments);
  };

  for (int m : ms)
    report.m_curve[m] =
        fused_map_where([m](const GranularityConfig &p) { return p.m == m; });
  for (int n : ns)
    report.n_curve[n] =
        fused_map_where([n](const GranularityConfig &p) { return p.n == n; });
  for (int l : ls)
    report.l_curve[l] =
        fused_map_where([l](const GranularityConfig &p) { return p.l == l; });

  bool plane_seen = false;
  for (const auto &psi : present) {
    if (psi.l != plane_l) continue;
    plane_seen = true;
    LambdaSet one = {{psi, gamma.Bits()}};
    report.mn_plane[{psi.m, psi.n}] = FusedMap(tables, one, judgments);
  }
  if (!plane_seen)
    report.warnings.push_back(
        StringPrintf("no grid cell has l=%d; plane grid is empty", plane_l));
  return report;
}

namespace {

std::ofstream OpenOut(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path);
  return out;
}

void CloseOut(std::ofstream &out, const std::string &path) {
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

void WriteEvaluationCsv(const std::string &path,
                        const EvaluationReport &report) {
  std::ofstream out = OpenOut(path);
  out << "query,average_precision\n";
  for (const auto &[query, ap] : report.per_query_ap)
    out << query << "," << FormatDouble(ap) << "\n";
  CloseOut(out, path);
}

void WriteEvaluationSummary(const std::string &path,
                            const EvaluationReport &report) {
  std::ofstream out = OpenOut(path);
  out << "queries evaluated: " << report.num_queries << "\n";
  out << "MAP:  " << FormatDouble(report.map) << "\n";
  out << "P@5:  " << FormatDouble(report.p_at_5) << "\n";
  out << "P@10: " << FormatDouble(report.p_at_10) << "\n";
  CloseOut(out, path);
}

void WritePerMethodCsv(
    const std::string &path,
    const std::map<std::pair<std::string, std::string>, double> &per_method) {
  std::ofstream out = OpenOut(path);
  out << "psi,gamma,map\n";
  for (const auto &[key, map] : per_method)
    out << key.first << "," << key.second << "," << FormatDouble(map) << "\n";
  CloseOut(out, path);
}

void WriteSelectionTrace(const std::string &path,
                         const std::vector<SelectionStep> &steps,
                         const std::vector<double> &eval_maps) {
  if (!eval_maps.empty() && eval_maps.size() != steps.size())
    throw UsageError("eval trace length does not match selection length");
  std::ofstream out = OpenOut(path);
  out << "step,psi,gamma,dev_map,eval_map\n";
  for (size_t i = 0; i < steps.size(); i++) {
    out << (i + 1) << "," << steps[i].psi.Tag() << "," << steps[i].gamma.Tag()
        << "," << FormatDouble(steps[i].dev_map) << ",";
    if (!eval_maps.empty()) out << FormatDouble(eval_maps[i]);
    out << "\n";
  }
  CloseOut(out, path);
}

void WriteMarginalReport(const std::string &dir,
                         const MarginalReport &report) {
  std::filesystem::create_directories(dir);
  auto write_curve = [&](const std::string &name, const std::string &column,
                         const std::map<int, double> &curve) {
    std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out = OpenOut(path);
    out << column << ",map\n";
    for (const auto &[value, map] : curve)
      out << value << "," << FormatDouble(map) << "\n";
    CloseOut(out, path);
  };
  write_curve("marginal_m.csv", "m", report.m_curve);
  write_curve("marginal_n.csv", "n", report.n_curve);
  write_curve("marginal_l.csv", "l", report.l_curve);

  std::string path = (std::filesystem::path(dir) / "plane_mn.csv").string();
  std::ofstream out = OpenOut(path);
  out << "m,n,map\n";
  for (const auto &[key, map] : report.mn_plane)
    out << key.first << "," << key.second << "," << FormatDouble(map) << "\n";
  CloseOut(out, path);

  if (!report.warnings.empty()) {
    std::string wpath =
        (std::filesystem::path(dir) / "warnings.txt").string();
    std::ofstream wout = OpenOut(wpath);
    for (const auto &w : report.warnings) wout << w << "\n";
    CloseOut(wout, wpath);
  }
}

}  // namespace patstd
