// patstd/include/patstd/similarity.h

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

#ifndef PATSTD_SIMILARITY_H_
#define PATSTD_SIMILARITY_H_

#include <string>
#include <vector>

#include "patstd/binary-io.h"
#include "patstd/pattern-hmm.h"

namespace patstd {

enum class SimilarityMode : int { kHard = 0, kSoft = 1 };

// Pattern-to-pattern similarity: identity for hard mode, exp(-KLsym/beta)
// for soft mode. Symmetric with unit diagonal; entries in [0,1].
struct SimilarityMatrix {
  GranularityConfig psi;
  SimilarityMode mode = SimilarityMode::kHard;
  double beta = 0.0;  // soft mode only
  int n = 0;
  std::vector<float> values;  // n*n row-major

  float At(int i, int j) const { return values[(size_t)i * n + j]; }
};

// KL divergence KL(a||b) between two mixture states via the variational
// approximation; exact closed form when both are single Gaussians. Clamped
// to be nonnegative; 0 for identical states.
double StateKl(const GmmState &a, const GmmState &b);

// Sum of StateKl over positionally aligned states.
double HmmKl(const PatternHmm &a, const PatternHmm &b);

// Soft default: beta = 100 * m.
double DefaultBeta(int m);

// Hard mode ignores beta; soft mode requires beta > 0 and symmetrizes KL as
// (KL(i,j)+KL(j,i))/2 before exponentiation.
SimilarityMatrix BuildSimilarity(const PatternSet &set, SimilarityMode mode,
                                 double beta, int num_workers = 1);

void WriteSimilarityMatrix(const std::string &path,
                           const SimilarityMatrix &matrix,
                           const Provenance &prov);
SimilarityMatrix ReadSimilarityMatrix(const std::string &path,
                                      Provenance *prov = nullptr);

}  // namespace patstd

#endif  // PATSTD_SIMILARITY_H_
