// patstd/include/patstd/evaluation.h

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

#ifndef PATSTD_EVALUATION_H_
#define PATSTD_EVALUATION_H_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "patstd/retrieval.h"

namespace patstd {

// Judged relevant documents per query id.
using Judgments = std::map<std::string, std::set<std::string>>;

// Ranked document ids (best first) with scores, per query id.
using Rankings =
    std::map<std::string, std::vector<std::pair<std::string, double>>>;

// Average precision of one ranking against a non-empty relevant set.
// Every relevant document must appear somewhere in the ranking; unjudged
// documents count as irrelevant.  The denominator is the number of relevant
// documents.
double AveragePrecision(const std::vector<std::string> &ranking,
                        const std::set<std::string> &relevant);

// Fraction of the top-k ranks occupied by relevant documents.  The
// denominator is k even when the ranking is shorter.
double PrecisionAtK(const std::vector<std::string> &ranking,
                    const std::set<std::string> &relevant, int k);

struct EvaluationReport {
  std::map<std::string, double> per_query_ap;
  double map = 0.0;
  double p_at_5 = 0.0;
  double p_at_10 = 0.0;
  int num_queries = 0;
};

// Evaluates rankings against judgments over the queries present in both.
// Queries without judgments are skipped; if none remain, throws DataError.
EvaluationReport Evaluate(const Rankings &rankings, const Judgments &judgments);

// Mean average precision of the fused scores under the given enabled set.
double FusedMap(const RelevanceTable &tables, const LambdaSet &lambda,
                const Judgments &judgments);

// MAP of each single (psi, gamma) score table, keyed by (psi tag, gamma tag).
std::map<std::pair<std::string, std::string>, double> PerMethodMap(
    const RelevanceTable &tables, const Judgments &judgments);

struct SelectionStep {
  GranularityConfig psi;
  SearchMethod gamma;
  double dev_map = 0.0;  // cumulative fused MAP on the dev set after this step
};

// Forward selection of `budget` (psi, gamma) score tables maximizing fused
// MAP on the dev judgments.  Ties break toward the lexicographically first
// (m, n, l, gamma bits) candidate; selection continues to the full budget
// even when no candidate improves the MAP.
std::vector<SelectionStep> GreedySelect(const RelevanceTable &dev_tables,
                                        const Judgments &dev_judgments,
                                        int budget);

// Cumulative fused MAP on another split for each prefix of a selection.
std::vector<double> TraceOnSplit(const std::vector<SelectionStep> &steps,
                                 const RelevanceTable &tables,
                                 const Judgments &judgments);

struct MarginalReport {
  // Fused MAP per value of one grid dimension (scores summed over the two
  // remaining dimensions), at a fixed gamma.
  std::map<int, double> m_curve;
  std::map<int, double> n_curve;
  std::map<int, double> l_curve;
  // Single-table MAP per (m, n) at the chosen (gamma, l).
  std::map<std::pair<int, int>, double> mn_plane;
  std::vector<std::string> warnings;
};

// Marginal MAP curves over the granularity grid for one search method, plus
// the (m, n)-plane grid at `plane_l`.  An incomplete grid yields partial
// output with warnings rather than an error.
MarginalReport ComputeMarginals(const RelevanceTable &tables,
                                const Judgments &judgments,
                                const SearchMethod &gamma, int plane_l);

// CSV / text emission.  All files end with a trailing newline.
void WriteEvaluationCsv(const std::string &path,
                        const EvaluationReport &report);
void WriteEvaluationSummary(const std::string &path,
                            const EvaluationReport &report);
void WritePerMethodCsv(
    const std::string &path,
    const std::map<std::pair<std::string, std::string>, double> &per_method);
// step, psi, gamma, cumulative dev MAP, cumulative eval MAP (blank if absent).
void WriteSelectionTrace(const std::string &path,
                         const std::vector<SelectionStep> &steps,
                         const std::vector<double> &eval_maps);
// Writes marginal_m.csv, marginal_n.csv, marginal_l.csv, plane_mn.csv into
// `dir` (created if missing).
void WriteMarginalReport(const std::string &dir, const MarginalReport &report);

}  // namespace patstd

#endif  // PATSTD_EVALUATION_H_
