// encoder/masking-test.cc
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

#include <algorithm>
#include <cmath>

#include "base/error.h"
#include "base/rng.h"
#include "encoder/masking.h"

namespace spkpt {
namespace {

TEST_CASE("mask probability extremes") {
  CHECK(SampleMask(50, 10, 0.0, 1).empty());
  const MaskSet all = SampleMask(50, 10, 1.0, 1);
  CHECK(all.size() == 50);
  CHECK(all.spans.size() == 1);
  CHECK(all.spans[0] == std::make_pair(0, 50));
}

TEST_CASE("ensure_nonempty yields one span when no frame starts") {
  const MaskSet m = SampleMask(40, 10, 0.0, 5, true);
  REQUIRE(m.spans.size() == 1);
  CHECK(m.size() == static_cast<size_t>(m.spans[0].second));
  CHECK(m.spans[0].second <= 10);
}

TEST_CASE("spans are sorted, merged and within bounds") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const int T = 20 + static_cast<int>(seed % 40);
    const MaskSet m = SampleMask(T, 7, 0.1, seed);
    std::vector<int> from_spans;
    int prev_end = -1;
    for (const auto& [s, l] : m.spans) {
      CHECK(s > prev_end);  // gap between merged spans
      CHECK(l >= 1);
      CHECK(s + l <= T);
      for (int t = s; t < s + l; ++t) from_spans.push_back(t);
      prev_end = s + l;
    }
    CHECK(from_spans == m.indices);
    for (int t = 0; t < T; ++t)
      CHECK(m.Contains(t) == std::binary_search(m.indices.begin(), m.indices.end(), t));
  }
}

TEST_CASE("mask sampling is seeded") {
  CHECK(SampleMask(100, 10, 0.08, 3) == SampleMask(100, 10, 0.08, 3));
  bool differs = false;
  for (uint64_t s = 4; s < 10; ++s) differs |= !(SampleMask(100, 10, 0.08, s) == SampleMask(100, 10, 0.08, 3));
  CHECK(differs);
}

TEST_CASE("each frame starts a span with the given probability") {
  // Span length 1 makes the masked fraction equal the start probability.
  int masked = 0;
  const int trials = 400, T = 100;
  for (int s = 0; s < trials; ++s) masked += static_cast<int>(SampleMask(T, 1, 0.3, s).size());
  const double frac = double(masked) / (trials * T);
  const double se = std::sqrt(0.3 * 0.7 / (trials * T));
  CHECK(std::fabs(frac - 0.3) < 4 * se);
}

TEST_CASE("FromIndices deduplicates and merges") {
  const MaskSet m = MaskSet::FromIndices({5, 1, 2, 2, 3, 9});
  CHECK(m.indices == std::vector<int>{1, 2, 3, 5, 9});
  CHECK(m.spans == std::vector<std::pair<int, int>>{{1, 3}, {5, 1}, {9, 1}});
}

TEST_CASE("corrupt replaces exactly the masked rows") {
  Rng rng(2);
  Mat x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Gaussian();
  Mat emb(1, 3);
  emb << 7.0, 8.0, 9.0;
  const MaskSet m = MaskSet::FromIndices({1, 4});
  const Mat y = Corrupt(x, m, emb);
  for (int t = 0; t < 6; ++t) {
    if (m.Contains(t)) CHECK(y.row(t) == emb);
    else CHECK(y.row(t) == x.row(t));
  }
  CHECK_THROWS_AS(Corrupt(x, MaskSet::FromIndices({6}), emb), Error);
  CHECK_THROWS_AS(Corrupt(x, m, Mat::Zero(1, 2)), Error);
}

}  // namespace
}  // namespace spkpt
