// patstd/tests/test-common.cc

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
#include <atomic>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "patstd/binary-io.h"
#include "patstd/common.h"
#include "patstd/rng.h"
#include "testing-util.h"

using namespace patstd;

TEST_CASE("StringPrintf formats like printf") {
  CHECK(StringPrintf("x=%d y=%s", 7, "ab") == "x=7 y=ab");
  CHECK(StringPrintf("%05.2f", 3.14159) == "03.14");
  CHECK(StringPrintf("%s", std::string(500, 'q').c_str()).size() == 500);
}

TEST_CASE("FormatDouble round-trips doubles exactly") {
  Rng rng(7);
  for (int i = 0; i < 1000; i++) {
    double x = (rng.Uniform() - 0.5) * std::pow(10.0, rng.UniformInt(40) - 20.0);
    CHECK(std::stod(FormatDouble(x)) == x);
  }
  CHECK(std::stod(FormatDouble(0.1)) == 0.1);
  CHECK(std::stod(FormatDouble(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("Fnv1a matches the published 64-bit offset and test vectors") {
  CHECK(Fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(Fnv1a("ab") == Fnv1a("b", Fnv1a("a")));
}

TEST_CASE("Hex16 and ParseHex16 round-trip") {
  Rng rng(3);
  for (int i = 0; i < 200; i++) {
    uint64_t v = rng.Next();
    std::string hex = Hex16(v);
    CHECK(hex.size() == 16);
    CHECK(ParseHex16(hex) == v);
  }
  CHECK(Hex16(0) == "0000000000000000");
}

TEST_CASE("HashCombine is order-sensitive") {
  CHECK(HashCombine(1, 2) != HashCombine(2, 1));
  CHECK(HashCombine(1, 2) == HashCombine(1, 2));
}

TEST_CASE("ParallelFor visits every index exactly once") {
  for (int workers : {1, 2, 7}) {
    for (int count : {0, 1, 5, 100}) {
      std::vector<std::atomic<int>> hits(count);
      for (auto &h : hits) h = 0;
      ParallelFor(workers, count, [&](int i) { hits[i]++; });
      for (int i = 0; i < count; i++) CHECK(hits[i].load() == 1);
    }
  }
}

TEST_CASE("ParallelFor propagates exceptions") {
  CHECK_THROWS_AS(
      ParallelFor(4, 16,
                  [&](int i) {
                    if (i == 11) throw DataError("boom");
                  }),
      DataError);
}

TEST_CASE("Rng is deterministic per seed and stream") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; i++) {
    double x = a.Uniform(), y = b.Uniform(), z = c.Uniform();
    all_equal = all_equal && x == y;
    any_diff = any_diff || x != z;
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff);
  CHECK(Rng::DeriveSeed(5, 0) != Rng::DeriveSeed(5, 1));
  CHECK(Rng::DeriveSeed(5, 0) == Rng::DeriveSeed(5, 0));
}

TEST_CASE("Rng UniformInt stays in range and covers values") {
  Rng rng(11);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; i++) {
    uint64_t v = rng.UniformInt(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("Rng Gaussian has roughly standard moments") {
  Rng rng(17);
  double sum = 0.0, sq = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; i++) {
    double g = rng.Gaussian();
    sum += g;
    sq += g * g;
  }
  double mean = sum / trials;
  double var = sq / trials - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("binary writer and reader round-trip every type") {
  testing::TempDir tmp("binio");
  std::string path = tmp.Path("file.bin");
  {
    BinaryWriter w(path);
    w.WriteMagic("PSTDTEST");
    w.WriteU8(200);
    w.WriteU32(0xdeadbeefu);
    w.WriteU64(0x0123456789abcdefULL);
    w.WriteF32(1.5f);
    w.WriteF64(-0.1);
    w.WriteString("hello");
    w.WriteF32Array({1.0f, 2.0f, 3.0f});
    w.WriteF64Array({0.25, 0.75});
    WriteProvenance(w, {111, 222});
    w.Close();
  }
  BinaryReader r(path);
  r.ExpectMagic("PSTDTEST");
  CHECK(r.ReadU8() == 200);
  CHECK(r.ReadU32() == 0xdeadbeefu);
  CHECK(r.ReadU64() == 0x0123456789abcdefULL);
  CHECK(r.ReadF32() == 1.5f);
  CHECK(r.ReadF64() == -0.1);
  CHECK(r.ReadString() == "hello");
  CHECK(r.ReadF32Array() == std::vector<float>{1.0f, 2.0f, 3.0f});
  CHECK(r.ReadF64Array() == std::vector<double>{0.25, 0.75});
  Provenance p = ReadProvenance(r);
  CHECK(p.config_hash == 111);
  CHECK(p.parent_hash == 222);
}

TEST_CASE("binary reader rejects bad magic and truncation") {
  testing::TempDir tmp("binio2");
  std::string path = tmp.Path("file.bin");
  {
    BinaryWriter w(path);
    w.WriteMagic("PSTDTEST");
    w.WriteU8(1);
    w.Close();
  }
  {
    BinaryReader r(path);
    CHECK_THROWS_AS(r.ExpectMagic("PSTDWHAT"), DataError);
  }
  {
    BinaryReader r(path);
    r.ExpectMagic("PSTDTEST");
    r.ReadU8();
    CHECK_THROWS_AS(r.ReadU32(), DataError);
  }
  CHECK_THROWS_AS(BinaryReader("/nonexistent/nope.bin"), DataError);
}

TEST_CASE("exit codes match the documented contract") {
  CHECK(kExitOk == 0);
  CHECK(kExitUsage == 1);
  CHECK(kExitData == 2);
  CHECK(kExitInternal == 3);
}
