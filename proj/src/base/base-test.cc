// base/base-test.cc
//
// Copyright 2026  spkpt authors

// See ../../COPYING for clarification regarding multiple authors
//
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
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "base/error.h"
#include "base/io.h"
#include "base/rng.h"

namespace spkpt {
namespace {

TEST_CASE("fnv-1a reference vectors") {
  CHECK(Fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(HexU64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
  CHECK(HexU64(1) == "0000000000000001");
}

TEST_CASE("mix bits is the splitmix64 finalizer") {
  CHECK(MixBits(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("derived seeds are distinct and order sensitive") {
  std::set<uint64_t> seen;
  for (uint64_t s = 0; s < 20; ++s)
    for (uint64_t a = 0; a < 50; ++a) seen.insert(DeriveSeed(s, a));
  CHECK(seen.size() == 1000);
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(1, 3, 2));
  CHECK(DeriveSeed(1, 2, 3) == DeriveSeed(DeriveSeed(1, 2), 3));
}

TEST_CASE("little-endian encodings") {
  std::string b;
  AppendF32LE(&b, std::vector<float>{1.0f});
  CHECK(b == std::string("\x00\x00\x80\x3f", 4));
  b.clear();
  AppendF64LE(&b, std::vector<double>{-2.0});
  CHECK(b == std::string("\x00\x00\x00\x00\x00\x00\x00\xc0", 8));
  const std::vector<double> v{0.1, -1e300, 3.5, 0.0};
  b.clear();
  AppendF64LE(&b, v);
  CHECK(DecodeF64LE(b) == v);
  CHECK_THROWS_AS(DecodeF64LE(b.substr(1)), Error);
  CHECK_THROWS_AS(DecodeF32LE("abc"), Error);
}

TEST_CASE("rng reproducibility and ranges") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.NextU64() == b.NextU64());
  Rng r(3);
  std::map<int64_t, int> counts;
  for (int i = 0; i < 60000; ++i) {
    const int64_t x = r.UniformInt(-2, 3);
    REQUIRE(x >= -2);
    REQUIRE(x <= 3);
    ++counts[x];
  }
  CHECK(counts.size() == 6);
  for (const auto& [k, c] : counts) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS_AS(r.UniformInt(2, 1), Error);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.Gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(std::fabs(sq / n - 1.0) < 0.02);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.UniformOpen();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("text and json files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "spkpt-base-test";
  std::filesystem::remove_all(dir);
  WriteTextFile(dir / "sub" / "a.txt", "hello\n");
  CHECK(ReadTextFile(dir / "sub" / "a.txt") == "hello\n");
  const Json doc = {{"x", 1}, {"y", {1.5, 2.5}}};
  WriteJsonFile(dir / "doc.json", doc);
  CHECK(ReadJsonFile(dir / "doc.json") == doc);
  WriteTextFile(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(ReadJsonFile(dir / "bad.json"), Error);
  CHECK_THROWS_AS(ReadTextFile(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace spkpt
