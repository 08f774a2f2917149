// patstd/include/patstd/rng.h

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

#ifndef PATSTD_RNG_H_
#define PATSTD_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace patstd {

// Deterministic RNG. The engine is std::mt19937_64 (fully pinned by the
// standard); the uniform/gaussian mappings are implemented here rather than
// with std::*_distribution, whose output is implementation-defined. All
// artifacts that must be byte-identical across reruns draw through this class.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t Next() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1.
  int UniformInt(int n) {
    return static_cast<int>((static_cast<__uint128_t>(gen_()) *
                             static_cast<uint64_t>(n)) >> 64);
  }

  // Standard normal via Box-Muller; caches the second variate.
  double Gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = Uniform();
    double u2 = Uniform();
    // Avoid log(0).
    while (u1 <= 0.0) u1 = Uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  // Independent substream seed (splitmix64 finalizer over base ^ stream).
  static uint64_t DeriveSeed(uint64_t base, uint64_t stream) {
    uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace patstd

#endif  // PATSTD_RNG_H_
