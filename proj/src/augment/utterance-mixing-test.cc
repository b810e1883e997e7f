// augment/utterance-mixing-test.cc
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
#include <cstring>

#include <boost/math/distributions/chi_squared.hpp>

#include "augment/utterance-mixing.h"
#include "base/error.h"
#include "base/rng.h"

namespace spkpt {
namespace {

Batch RandomBatch(size_t B, size_t L, uint64_t seed) {
  Rng rng(seed);
  Batch b;
  b.length = L;
  for (size_t i = 0; i < B; ++i) {
    Utterance u;
    u.id = "u" + std::to_string(i);
    u.waveform.samples.resize(L);
    for (auto& x : u.waveform.samples) x = static_cast<float>(0.2 * rng.Gaussian());
    b.utterances.push_back(std::move(u));
  }
  return b;
}

bool BitEqual(float a, float b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST_CASE("selection rate, length distribution and region bounds over 10000 batches") {
  const size_t B = 8, L = 40;
  const Batch batch = RandomBatch(B, L, 1);
  for (double p : {0.2, 0.5}) {
    std::vector<int64_t> length_counts(L / 2 + 1, 0);
    int64_t selected = 0;
    for (uint64_t k = 0; k < 10000; ++k) {
      const MixedBatch m = MixBatch(batch, p, GainPolicy::Fixed(0.7), DeriveSeed(123, k));
      selected += static_cast<int64_t>(m.specs.size());
      for (const auto& s : m.specs) {
        ++length_counts[s.mix_length];
        REQUIRE(s.mix_length <= L / 2);
        REQUIRE(s.target_start + s.mix_length <= L);
      }
      REQUIRE(VerifyMix(m).ok);
    }
    const double n = 10000.0 * B;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(selected / n - p) < 3 * se);
    CHECK(length_counts[0] == 0);
    const double expected = double(selected) / double(L / 2);
    double chi2 = 0;
    for (size_t l = 1; l <= L / 2; ++l)
      chi2 += std::pow(double(length_counts[l]) - expected, 2) / expected;
    const boost::math::chi_squared dist(double(L / 2 - 1));
    CHECK(1.0 - boost::math::cdf(dist, chi2) > 0.01);
  }
}

TEST_CASE("unmixed samples are bit-identical and the mixed region is exact") {
  const Batch batch = RandomBatch(6, 33, 2);
  for (uint64_t k = 0; k < 500; ++k) {
    const MixedBatch m = MixBatch(batch, 0.5, GainPolicy::UniformSnr(-5, 5), DeriveSeed(7, k));
    std::vector<const MixSpec*> by_target(6, nullptr);
    for (const auto& s : m.specs) by_target[s.target_index] = &s;
    for (size_t i = 0; i < 6; ++i) {
      const auto& got = m.batch.utterances[i].waveform.samples;
      const auto& clean = batch.utterances[i].waveform.samples;
      const MixSpec* s = by_target[i];
      for (size_t n = 0; n < 33; ++n) {
        const bool inside = s && n >= s->target_start && n < s->target_start + s->mix_length;
        if (!inside) {
          REQUIRE(BitEqual(got[n], clean[n]));
        } else {
          const float src = batch.utterances[s->source_index]
                                .waveform.samples[s->source_start + (n - s->target_start)];
          REQUIRE(BitEqual(got[n], clean[n] + s->gain * src));
        }
      }
      // The clean copy is untouched.
      CHECK(m.clean.utterances[i] == batch.utterances[i]);
    }
  }
}

TEST_CASE("p = 0 and p = 1") {
  const Batch batch = RandomBatch(5, 20, 3);
  const MixedBatch none = MixBatch(batch, 0.0, GainPolicy::Fixed(1), 4);
  CHECK(none.specs.empty());
  for (size_t i = 0; i < 5; ++i) CHECK(none.batch.utterances[i] == batch.utterances[i]);
  const MixedBatch all = MixBatch(batch, 1.0, GainPolicy::Fixed(1), 4);
  CHECK(all.specs.size() == 5);
}

TEST_CASE("mixing is seeded") {
  const Batch batch = RandomBatch(5, 64, 4);
  const MixedBatch a = MixBatch(batch, 0.5, GainPolicy::UniformSnr(-5, 5), 99);
  const MixedBatch b = MixBatch(batch, 0.5, GainPolicy::UniformSnr(-5, 5), 99);
  CHECK(a.specs == b.specs);
  for (size_t i = 0; i < 5; ++i) CHECK(a.batch.utterances[i] == b.batch.utterances[i]);
}

TEST_CASE("snr gain policy hits the drawn ratio") {
  const Batch batch = RandomBatch(4, 200, 5);
  const MixedBatch m = MixBatch(batch, 1.0, GainPolicy::UniformSnr(3.0, 3.0), 1);
  for (const auto& s : m.specs) {
    double et = 0, es = 0;
    for (size_t n = 0; n < s.mix_length; ++n) {
      const double t = batch.utterances[s.target_index].waveform.samples[s.target_start + n];
      const double x = s.gain * batch.utterances[s.source_index].waveform.samples[s.source_start + n];
      et += t * t;
      es += x * x;
    }
    CHECK(std::fabs(10.0 * std::log10(et / es) - 3.0) < 1e-4);
  }
}

TEST_CASE("exclude_self never picks the target") {
  const Batch batch = RandomBatch(3, 16, 6);
  MixOptions opts;
  opts.exclude_self = true;
  for (uint64_t k = 0; k < 300; ++k)
    for (const auto& s : MixBatch(batch, 1.0, GainPolicy::Fixed(1), k, opts).specs)
      CHECK(s.source_index != s.target_index);
}

TEST_CASE("verification catches tampering") {
  const Batch batch = RandomBatch(4, 30, 7);
  MixedBatch m = MixBatch(batch, 1.0, GainPolicy::Fixed(0.5), 3);
  REQUIRE(VerifyMix(m).ok);
  MixedBatch outside = m;
  const auto& s = outside.specs[0];
  const size_t n = s.target_start > 0 ? 0 : 29;
  outside.batch.utterances[s.target_index].waveform.samples[n] += 1e-3f;
  CHECK_FALSE(VerifyMix(outside).ok);
  MixedBatch too_long = m;
  too_long.specs[0].mix_length = 16;
  CHECK_FALSE(VerifyMix(too_long).ok);
  MixedBatch twice = m;
  twice.specs[1].target_index = twice.specs[0].target_index;
  CHECK_FALSE(VerifyMix(twice).ok);
}

TEST_CASE("MixSpec serialization is 1-based and round trips") {
  const Batch batch = RandomBatch(4, 30, 8);
  const MixedBatch m = MixBatch(batch, 1.0, GainPolicy::UniformSnr(-5, 5), 3);
  const Json j = MixSpecsToJson(17, m.specs);
  CHECK(j["batch_index"] == 17);
  CHECK(j["specs"][0]["target_index"] == m.specs[0].target_index + 1);
  CHECK(j["specs"][0]["s"] == m.specs[0].target_start + 1);
  CHECK(MixSpecsFromJson(j) == m.specs);
  Json bad = j;
  bad["specs"][0]["s"] = 0;
  CHECK_THROWS_AS(MixSpecsFromJson(bad), Error);
}

TEST_CASE("gain policy parsing and invalid input") {
  CHECK(GainPolicy::Parse("fixed:0.5").fixed_gain == 0.5);
  const GainPolicy g = GainPolicy::Parse("snr:-5:5");
  CHECK(g.snr_lo_db == -5.0);
  CHECK(g.snr_hi_db == 5.0);
  CHECK(GainPolicy::Parse(g.ToString()).snr_hi_db == 5.0);
  CHECK_THROWS_AS(GainPolicy::Parse("loud"), Error);
  CHECK_THROWS_AS(GainPolicy::Parse("snr:5:-5"), Error);
  const Batch batch = RandomBatch(2, 10, 9);
  CHECK_THROWS_AS(MixBatch(batch, 1.5, GainPolicy::Fixed(1), 1), Error);
  Batch ragged = batch;
  ragged.utterances[1].waveform.samples.pop_back();
  CHECK_THROWS_AS(MixBatch(ragged, 0.5, GainPolicy::Fixed(1), 1), Error);
}

}  // namespace
}  // namespace spkpt
