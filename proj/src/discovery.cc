// patstd/src/discovery.cc

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

#include "patstd/discovery.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "patstd/common.h"
#include "patstd/decode.h"
#include "patstd/rng.h"

namespace patstd {

namespace {

// One initial segment: its owning utterance, frame span, and mean vector.
struct Segment {
  int utterance;
  int start, end;
  std::vector<double> mean;
};

std::vector<Segment> TileSegments(const std::vector<FeatureSequence> &corpus,
                                  int m) {
  std::vector<Segment> segments;
  const int target = 3 * m;
  for (size_t u = 0; u < corpus.size(); u++) {
    const FeatureSequence &f = corpus[u];
    const int T = f.NumFrames();
    if (T < m)
      throw DataError(StringPrintf("utterance %s has %d frames, fewer than m=%d",
                                   f.utterance_id.c_str(), T, m));
    int count = std::max(1, T / target);
    for (int k = 0; k < count; k++) {
      Segment s;
      s.utterance = static_cast<int>(u);
      s.start = k * target;
      s.end = (k == count - 1) ? T - 1 : (k + 1) * target - 1;
      s.mean.assign(f.dim, 0.0);
      for (int t = s.start; t <= s.end; t++) {
        const float *x = f.Frame(t);
        for (int d = 0; d < f.dim; d++) s.mean[d] += x[d];
      }
      for (int d = 0; d < f.dim; d++) s.mean[d] /= (s.end - s.start + 1);
      segments.push_back(std::move(s));
    }
  }
  return segments;
}

double Distance2(const std::vector<double> &a, const std::vector<double> &b) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); i++) {
    double diff = a[i] - b[i];
    d2 += diff * diff;
  }
  return d2;
}

// Lloyd's algorithm with k-means++ seeding; returns assignments and the
// final distortion. Empty clusters steal the point farthest from its center.
double KMeansOnce(const std::vector<Segment> &segments, int k, Rng *rng,
                  std::vector<int> *assign) {
  const int num = static_cast<int>(segments.size());
  std::vector<std::vector<double>> centers;
  centers.reserve(k);

  // k-means++ seeding.
  centers.push_back(segments[rng->UniformInt(num)].mean);
  std::vector<double> min_d2(num);
  for (int c = 1; c < k; c++) {
    double total = 0.0;
    for (int i = 0; i < num; i++) {
      double best = std::numeric_limits<double>::max();
      for (const auto &ctr : centers)
        best = std::min(best, Distance2(segments[i].mean, ctr));
      min_d2[i] = best;
      total += best;
    }
    int pick = 0;
    if (total > 0.0) {
      double r = rng->Uniform() * total, cum = 0.0;
      for (int i = 0; i < num; i++) {
        cum += min_d2[i];
        if (r <= cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng->UniformInt(num);
    }
    centers.push_back(segments[pick].mean);
  }

  assign->assign(num, 0);
  const int dim = static_cast<int>(segments[0].mean.size());
  for (int iter = 0; iter < 50; iter++) {
    bool changed = false;
    for (int i = 0; i < num; i++) {
      int best = 0;
      double best_d2 = Distance2(segments[i].mean, centers[0]);
      for (int c = 1; c < k; c++) {
        double d2 = Distance2(segments[i].mean, centers[c]);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      if ((*assign)[i] != best) {
        (*assign)[i] = best;
        changed = true;
      }
    }
    // Repair empty clusters with the globally worst-fitting point.
    std::vector<int> counts(k, 0);
    for (int a : *assign) counts[a]++;
    for (int c = 0; c < k; c++) {
      if (counts[c] > 0) continue;
      int worst = -1;
      double worst_d2 = -1.0;
      for (int i = 0; i < num; i++) {
        if (counts[(*assign)[i]] <= 1) continue;
        double d2 = Distance2(segments[i].mean, centers[(*assign)[i]]);
        if (d2 > worst_d2) {
          worst_d2 = d2;
          worst = i;
        }
      }
      if (worst < 0) throw InternalError("cannot repair empty cluster");
      counts[(*assign)[worst]]--;
      (*assign)[worst] = c;
      counts[c] = 1;
      changed = true;
    }
    for (int c = 0; c < k; c++) {
      std::fill(centers[c].begin(), centers[c].end(), 0.0);
    }
    for (int i = 0; i < num; i++)
      for (int d = 0; d < dim; d++)
        centers[(*assign)[i]][d] += segments[i].mean[d];
    for (int c = 0; c < k; c++)
      for (int d = 0; d < dim; d++) centers[c][d] /= counts[c];
    if (!changed && iter > 0) break;
  }

  double distortion = 0.0;
  for (int i = 0; i < num; i++)
    distortion += Distance2(segments[i].mean, centers[(*assign)[i]]);
  return distortion;
}

// Shared inner loop of Discover and GrowGaussians: alternate re-estimation
// under fixed labels with free-pattern decoding until labels settle.
void RunTrainingLoop(PatternSet *set,
                     const std::vector<FeatureSequence> &corpus,
                     std::vector<Transcription> labels,
                     const DiscoveryConfig &config) {
  for (int iter = 1; iter <= config.max_iterations; iter++) {
    for (int e = 0; e < config.em_steps; e++)
      *set = BaumWelchStep(*set, corpus, labels, config.num_workers).set;
    ReseedDeadPatterns(set, labels);

    std::vector<Transcription> new_labels(corpus.size());
    ParallelFor(config.num_workers, static_cast<int>(corpus.size()),
                [&](int i) { new_labels[i] = ViterbiFreeDecode(*set, corpus[i]); });
    double ll = 0.0;
    for (const auto &t : new_labels) ll += t.log_likelihood;
    double change = LabelChangeFraction(labels, new_labels);
    set->training_log.push_back({iter, ll, change});
    labels = std::move(new_labels);
    if (change <= config.convergence_threshold) break;
  }
}

}  // namespace

void DiscoveryConfig::Validate() const {
  if (grid.empty()) throw UsageError("empty granularity grid");
  if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
  if (!(convergence_threshold > 0.0 && convergence_threshold <= 1.0))
    throw UsageError("convergence threshold must be in (0, 1]");
  if (em_steps < 1) throw UsageError("em_steps must be >= 1");
  for (const auto &psi : grid)
    if (psi.m < 1 || psi.n < 2 || psi.l < 1)
      throw UsageError("invalid granularity " + psi.Tag());
}

std::vector<double> ComputeVarianceFloor(
    const std::vector<FeatureSequence> &corpus) {
  if (corpus.empty()) throw DataError("empty corpus");
  const int dim = corpus[0].dim;
  std::vector<double> sum(dim, 0.0), sum2(dim, 0.0);
  double count = 0.0;
  for (const auto &f : corpus) {
    if (f.dim != dim) throw DataError("inconsistent feature dimensions");
    for (int t = 0; t < f.NumFrames(); t++) {
      const float *x = f.Frame(t);
      for (int d = 0; d < dim; d++) {
        sum[d] += x[d];
        sum2[d] += static_cast<double>(x[d]) * x[d];
      }
      count += 1.0;
    }
  }
  std::vector<double> floor(dim);
  for (int d = 0; d < dim; d++) {
    double mean = sum[d] / count;
    double var = sum2[d] / count - mean * mean;
    floor[d] = std::max(1e-3 * var, 1e-8);
  }
  return floor;
}

std::vector<Transcription> InitializeLabels(
    const std::vector<FeatureSequence> &corpus, const GranularityConfig &psi,
    uint64_t seed) {
  if (corpus.empty()) throw DataError("empty corpus");
  std::vector<Segment> segments = TileSegments(corpus, psi.m);
  if (static_cast<int>(segments.size()) < psi.n)
    throw DataError(StringPrintf("insufficient data for n patterns (%zu segments < n=%d)",
                                 segments.size(), psi.n));

  std::vector<int> best_assign, assign;
  double best_distortion = std::numeric_limits<double>::max();
  for (int restart = 0; restart < 10; restart++) {
    Rng rng(Rng::DeriveSeed(seed, restart));
    double distortion = KMeansOnce(segments, psi.n, &rng, &assign);
    if (distortion < best_distortion) {
      best_distortion = distortion;
      best_assign = assign;
    }
  }

  std::vector<Transcription> labels(corpus.size());
  for (size_t u = 0; u < corpus.size(); u++)
    labels[u].utterance_id = corpus[u].utterance_id;
  for (size_t i = 0; i < segments.size(); i++) {
    const Segment &s = segments[i];
    labels[s.utterance].tokens.push_back({best_assign[i], s.start, s.end});
  }
  return labels;
}

PatternSet InitialModelFromLabels(const std::vector<FeatureSequence> &corpus,
                                  const std::vector<Transcription> &labels,
                                  const GranularityConfig &psi,
                                  const std::vector<double> &variance_floor) {
  const int dim = corpus[0].dim;
  const int n = psi.n, m = psi.m;

  std::vector<double> occ((size_t)n * m, 0.0);
  std::vector<double> sum((size_t)n * m * dim, 0.0);
  std::vector<double> sum2((size_t)n * m * dim, 0.0);
  for (size_t u = 0; u < labels.size(); u++) {
    for (const Token &tok : labels[u].tokens) {
      const int L = tok.Length();
      for (int s = 0; s < m; s++) {
        int lo = tok.start + s * L / m;
        int hi = tok.start + (s + 1) * L / m - 1;
        for (int t = lo; t <= hi; t++) {
          const float *x = corpus[u].Frame(t);
          size_t idx = (size_t)tok.pattern * m + s;
          occ[idx] += 1.0;
          for (int d = 0; d < dim; d++) {
            sum[idx * dim + d] += x[d];
            sum2[idx * dim + d] += static_cast<double>(x[d]) * x[d];
          }
        }
      }
    }
  }

  PatternSet set;
  set.config = psi;
  set.config.l = 1;
  set.dim = dim;
  set.variance_floor = variance_floor;
  set.hmms.resize(n);
  for (int p = 0; p < n; p++) {
    PatternHmm &h = set.hmms[p];
    h.pattern_index = p;
    h.self_loop.assign(m, 0.5);
    h.states.resize(m);
    for (int s = 0; s < m; s++) {
      size_t idx = (size_t)p * m + s;
      if (occ[idx] <= 0.0)
        throw InternalError(StringPrintf(
            "initial labels leave pattern %d state %d empty", p, s));
      std::vector<double> mean(dim), var(dim);
      for (int d = 0; d < dim; d++) {
        mean[d] = sum[idx * dim + d] / occ[idx];
        double v = sum2[idx * dim + d] / occ[idx] - mean[d] * mean[d];
        var[d] = std::max(v, variance_floor[d]);
      }
      h.states[s] = MakeSingleGaussian(dim, mean, var);
    }
  }

  // Direct initialization above a single Gaussian: split up to l components.
  for (int grow = 1; grow < psi.l; grow++) {
    for (auto &h : set.hmms)
      for (auto &s : h.states) SplitLargestComponent(&s);
    set.config.l = grow + 1;
  }
  set.Check();
  return set;
}

double LabelChangeFraction(const std::vector<Transcription> &a,
                           const std::vector<Transcription> &b) {
  if (a.size() != b.size())
    throw InternalError("label sets differ in utterance count");
  long changed = 0, total = 0;
  for (size_t u = 0; u < a.size(); u++) {
    std::vector<int> la = a[u].FrameLabels(), lb = b[u].FrameLabels();
    if (la.size() != lb.size())
      throw InternalError("label sets differ in frame count");
    for (size_t t = 0; t < la.size(); t++) {
      total++;
      if (la[t] != lb[t]) changed++;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(changed) / total;
}

PatternSet Discover(const std::vector<FeatureSequence> &corpus,
                    const GranularityConfig &psi,
                    const DiscoveryConfig &config) {
  std::vector<Transcription> labels = InitializeLabels(corpus, psi, config.seed);
  PatternSet set = InitialModelFromLabels(corpus, labels, psi,
                                          ComputeVarianceFloor(corpus));
  RunTrainingLoop(&set, corpus, std::move(labels), config);
  return set;
}

PatternSet GrowGaussians(const PatternSet &base,
                         const std::vector<FeatureSequence> &corpus,
                         const DiscoveryConfig &config) {
  std::vector<Transcription> labels(corpus.size());
  ParallelFor(config.num_workers, static_cast<int>(corpus.size()),
              [&](int i) { labels[i] = ViterbiFreeDecode(base, corpus[i]); });

  PatternSet set = base;
  set.config.l = base.config.l + 1;
  set.derived_from = base.config.Tag();
  set.training_log.clear();
  for (auto &h : set.hmms)
    for (auto &s : h.states) SplitLargestComponent(&s);
  set.Check();
  RunTrainingLoop(&set, corpus, std::move(labels), config);
  return set;
}

GridResult RunGrid(const std::vector<FeatureSequence> &corpus,
                   const DiscoveryConfig &config) {
  config.Validate();

  // Group requested psi by (m,n) cell; the l-chain within a cell is
  // sequential, distinct cells are independent.
  std::map<std::pair<int, int>, std::set<int>> cells;
  for (const auto &psi : config.grid)
    cells[{psi.m, psi.n}].insert(psi.l);
  std::vector<std::pair<int, int>> cell_list;
  for (const auto &[mn, ls] : cells) cell_list.push_back(mn);

  struct CellResult {
    std::vector<std::pair<GranularityConfig, PatternSet>> sets;
    std::vector<std::pair<GranularityConfig, std::string>> errors;
  };
  std::vector<CellResult> results(cell_list.size());

  ParallelFor(config.num_workers, static_cast<int>(cell_list.size()),
              [&](int ci) {
    auto [m, n] = cell_list[ci];
    const std::set<int> &wanted = cells.at({m, n});
    const int max_l = *wanted.rbegin();
    DiscoveryConfig cell_config = config;
    cell_config.seed = Rng::DeriveSeed(
        config.seed, static_cast<uint64_t>(m) * 1000003u + n);
    cell_config.num_workers = 1;  // cells already run in parallel

    PatternSet current;
    int done_l = 0;
    try {
      for (int l = 1; l <= max_l; l++) {
        GranularityConfig psi{m, n, l};
        current = (l == 1) ? Discover(corpus, psi, cell_config)
                           : GrowGaussians(current, corpus, cell_config);
        done_l = l;
        if (wanted.count(l)) results[ci].sets.push_back({psi, current});
      }
    } catch (const std::exception &e) {
      for (int l : wanted)
        if (l > done_l)
          results[ci].errors.push_back({GranularityConfig{m, n, l}, e.what()});
    }
  });

  GridResult grid;
  for (const auto &cell : results) {
    for (const auto &[psi, set] : cell.sets) grid.sets.emplace(psi, set);
    for (const auto &[psi, err] : cell.errors) grid.errors.emplace(psi, err);
  }
  return grid;
}

std::vector<GranularityConfig> ExpandGrid(const std::vector<int> &m_values,
                                          const std::vector<int> &n_values,
                                          const std::vector<int> &l_values) {
  std::vector<GranularityConfig> grid;
  for (int m : m_values)
    for (int n : n_values)
      for (int l : l_values) grid.push_back({m, n, l});
  std::sort(grid.begin(), grid.end());
  return grid;
}

}  // namespace patstd
