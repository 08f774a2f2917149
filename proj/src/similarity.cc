// patstd/src/similarity.cc

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

#include "patstd/similarity.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patstd/common.h"

namespace patstd {

namespace {

constexpr char kSimMagic[8] = {'P', 'S', 'T', 'D', 'S', 'I', 'M', 'M'};
constexpr uint32_t kSimVersion = 1;
constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Closed-form KL between diagonal Gaussians (component a of `fa` vs
// component b of `fb`).
double GaussianKl(const GmmState &fa, int a, const GmmState &fb, int b) {
  const double *mu1 = fa.Mean(a), *v1 = fa.Var(a);
  const double *mu2 = fb.Mean(b), *v2 = fb.Var(b);
  double kl = 0.0;
  for (int d = 0; d < fa.dim; d++) {
    double diff = mu1[d] - mu2[d];
    kl += std::log(v2[d] / v1[d]) + (v1[d] + diff * diff) / v2[d] - 1.0;
  }
  return 0.5 * kl;
}

double LogSumExp(const std::vector<double> &xs) {
  double hi = kLogZero;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : xs)
    if (x != kLogZero) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

}  // namespace

double StateKl(const GmmState &a, const GmmState &b) {
  if (a.dim != b.dim)
    throw DataError(StringPrintf("state dimension mismatch: %d vs %d", a.dim,
                                 b.dim));
  const int na = a.NumComponents(), nb = b.NumComponents();
  double kl = 0.0;
  std::vector<double> terms;
  for (int c = 0; c < na; c++) {
    if (a.weights[c] <= 0.0) continue;
    terms.clear();
    for (int c2 = 0; c2 < na; c2++) {
      if (a.weights[c2] <= 0.0) continue;
      terms.push_back(std::log(a.weights[c2]) - GaussianKl(a, c, a, c2));
    }
    double num = LogSumExp(terms);
    terms.clear();
    for (int c2 = 0; c2 < nb; c2++) {
      if (b.weights[c2] <= 0.0) continue;
      terms.push_back(std::log(b.weights[c2]) - GaussianKl(a, c, b, c2));
    }
    double den = LogSumExp(terms);
    if (den == kLogZero)
      throw InternalError("empty mixture in KL computation");
    kl += a.weights[c] * (num - den);
  }
  return std::max(kl, 0.0);
}

double HmmKl(const PatternHmm &a, const PatternHmm &b) {
  if (a.NumStates() != b.NumStates())
    throw DataError(StringPrintf("state count mismatch: %d vs %d",
                                 a.NumStates(), b.NumStates()));
  double kl = 0.0;
  for (int s = 0; s < a.NumStates(); s++) kl += StateKl(a.states[s], b.states[s]);
  return kl;
}

double DefaultBeta(int m) { return 100.0 * m; }

SimilarityMatrix BuildSimilarity(const PatternSet &set, SimilarityMode mode,
                                 double beta, int num_workers) {
  const int n = set.config.n;
  SimilarityMatrix mat;
  mat.psi = set.config;
  mat.mode = mode;
  mat.n = n;
  mat.values.assign((size_t)n * n, 0.0f);
  for (int i = 0; i < n; i++) mat.values[(size_t)i * n + i] = 1.0f;
  if (mode == SimilarityMode::kHard) {
    mat.beta = 0.0;
    return mat;
  }

  if (!(beta > 0.0)) throw UsageError("soft similarity requires beta > 0");
  mat.beta = beta;
  // Upper-triangle pairs, filled in parallel and mirrored.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; i++)
    for (int j = i + 1; j < n; j++) pairs.push_back({i, j});
  ParallelFor(num_workers, static_cast<int>(pairs.size()), [&](int k) {
    auto [i, j] = pairs[k];
    double sym =
        0.5 * (HmmKl(set.hmms[i], set.hmms[j]) + HmmKl(set.hmms[j], set.hmms[i]));
    float s = static_cast<float>(std::exp(-sym / beta));
    mat.values[(size_t)i * n + j] = s;
    mat.values[(size_t)j * n + i] = s;
  });
  return mat;
}

void WriteSimilarityMatrix(const std::string &path,
                           const SimilarityMatrix &matrix,
                           const Provenance &prov) {
  BinaryWriter w(path);
  w.WriteMagic(kSimMagic);
  w.WriteU32(kSimVersion);
  WriteProvenance(w, prov);
  w.WriteU32(static_cast<uint32_t>(matrix.psi.m));
  w.WriteU32(static_cast<uint32_t>(matrix.psi.n));
  w.WriteU32(static_cast<uint32_t>(matrix.psi.l));
  w.WriteU8(static_cast<uint8_t>(matrix.mode));
  w.WriteF64(matrix.beta);
  w.WriteU32(static_cast<uint32_t>(matrix.n));
  w.WriteF32Array(matrix.values);
  w.Close();
}

SimilarityMatrix ReadSimilarityMatrix(const std::string &path,
                                      Provenance *prov) {
  BinaryReader r(path);
  r.ExpectMagic(kSimMagic);
  uint32_t version = r.ReadU32();
  if (version != kSimVersion)
    throw DataError(StringPrintf("unsupported similarity matrix version %u in %s",
                                 version, path.c_str()));
  Provenance p = ReadProvenance(r);
  if (prov) *prov = p;
  SimilarityMatrix mat;
  mat.psi.m = static_cast<int>(r.ReadU32());
  mat.psi.n = static_cast<int>(r.ReadU32());
  mat.psi.l = static_cast<int>(r.ReadU32());
  mat.mode = static_cast<SimilarityMode>(r.ReadU8());
  mat.beta = r.ReadF64();
  mat.n = static_cast<int>(r.ReadU32());
  mat.values = r.ReadF32Array();
  if (static_cast<int>(mat.values.size()) != mat.n * mat.n)
    throw DataError("similarity matrix size mismatch in " + path);
  return mat;
}

}  // namespace patstd
