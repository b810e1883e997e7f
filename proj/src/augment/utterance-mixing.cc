// augment/utterance-mixing.cc
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

#include "augment/utterance-mixing.h"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include <spdlog/spdlog.h>

#include "base/error.h"
#include "base/rng.h"

namespace spkpt {

GainPolicy GainPolicy::Fixed(double gain) {
  GainPolicy g;
  g.kind = Kind::kFixed;
  g.fixed_gain = gain;
  return g;
}

GainPolicy GainPolicy::UniformSnr(double lo_db, double hi_db) {
  if (hi_db < lo_db) Fail("gain policy: SNR range [{}, {}] is empty", lo_db, hi_db);
  GainPolicy g;
  g.kind = Kind::kUniformSnr;
  g.snr_lo_db = lo_db;
  g.snr_hi_db = hi_db;
  return g;
}

GainPolicy GainPolicy::Parse(const std::string& text) {
  try {
    if (text.rfind("fixed:", 0) == 0) return Fixed(std::stod(text.substr(6)));
    if (text.rfind("snr:", 0) == 0) {
      const std::string rest = text.substr(4);
      const size_t colon = rest.find(':', 1);
      if (colon != std::string::npos)
        return UniformSnr(std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
    }
  } catch (const std::logic_error&) {
  }
  Fail("gain policy '{}' is not 'fixed:<g>' or 'snr:<lo_db>:<hi_db>'", text);
}

std::string GainPolicy::ToString() const {
  if (kind == Kind::kFixed) return fmt::format("fixed:{}", fixed_gain);
  return fmt::format("snr:{}:{}", snr_lo_db, snr_hi_db);
}

namespace {

// The single expression used both to mix and to verify.
inline float MixSample(float target, float gain, float source) { return target + gain * source; }

}  // namespace

MixedBatch MixBatch(const Batch& batch, double p, const GainPolicy& gain, uint64_t seed,
                    const MixOptions& opts) {
  if (!(p >= 0.0 && p <= 1.0)) Fail("mixing probability {} outside [0, 1]", p);
  const size_t B = batch.size();
  const size_t L = batch.length;
  for (const auto& u : batch.utterances)
    if (u.waveform.size() != L)
      Fail("utterance '{}' has {} samples, batch length is {}", u.id, u.waveform.size(), L);

  MixedBatch out;
  out.clean = batch;
  out.batch = batch;
  Rng rng(seed);

  std::vector<int> selected;
  for (size_t i = 0; i < B; ++i)
    if (rng.Bernoulli(p)) selected.push_back(static_cast<int>(i));
  if (selected.empty()) return out;

  const size_t half = L / 2;
  if (half < 1) Fail("utterance mixing needs a batch length of at least 2 samples, got {}", L);
  if (opts.exclude_self && B < 2) Fail("exclude_self requires a batch of at least 2");

  for (int target : selected) {
    MixSpec spec;
    spec.target_index = target;
    if (opts.exclude_self) {
      int src = static_cast<int>(rng.UniformInt(0, static_cast<int64_t>(B) - 2));
      spec.source_index = src >= target ? src + 1 : src;
    } else {
      spec.source_index = static_cast<int>(rng.UniformInt(0, static_cast<int64_t>(B) - 1));
    }
    spec.mix_length = static_cast<size_t>(rng.UniformInt(1, static_cast<int64_t>(half)));
    const auto last_start = static_cast<int64_t>(L - spec.mix_length);
    spec.target_start = static_cast<size_t>(rng.UniformInt(1, last_start) - 1);
    spec.source_start = static_cast<size_t>(rng.UniformInt(1, last_start) - 1);

    const auto& tgt = batch.utterances[target].waveform.samples;
    const auto& src = batch.utterances[spec.source_index].waveform.samples;
    if (gain.kind == GainPolicy::Kind::kFixed) {
      spec.gain = static_cast<float>(gain.fixed_gain);
    } else {
      const double snr_db = gain.snr_lo_db + (gain.snr_hi_db - gain.snr_lo_db) * rng.Uniform();
      double e_t = 0.0, e_s = 0.0;
      for (size_t n = 0; n < spec.mix_length; ++n) {
        e_t += double(tgt[spec.target_start + n]) * tgt[spec.target_start + n];
        e_s += double(src[spec.source_start + n]) * src[spec.source_start + n];
      }
      spec.gain = (e_t > 0.0 && e_s > 0.0)
                      ? static_cast<float>(std::sqrt(e_t / (e_s * std::pow(10.0, snr_db / 10.0))))
                      : 1.0f;
    }

    auto& dst = out.batch.utterances[target].waveform.samples;
    for (size_t n = 0; n < spec.mix_length; ++n)
      dst[spec.target_start + n] =
          MixSample(tgt[spec.target_start + n], spec.gain, src[spec.source_start + n]);
    out.specs.push_back(spec);
  }
  for (int target : selected)
    for (float x : out.batch.utterances[target].waveform.samples)
      if (std::fabs(x) > 1.0f) ++out.clipped_samples;
  if (out.clipped_samples > 0)
    spdlog::debug("utterance mixing: {} samples exceed unit amplitude", out.clipped_samples);
  return out;
}

MixReport VerifyMix(const MixedBatch& mixed) {
  MixReport report;
  auto problem = [&](std::string msg) {
    report.ok = false;
    report.problems.push_back(std::move(msg));
  };
  const size_t B = mixed.clean.size();
  const size_t L = mixed.clean.length;
  if (mixed.batch.size() != B) {
    problem(fmt::format("mixed batch has {} utterances, clean has {}", mixed.batch.size(), B));
    return report;
  }
  for (size_t i = 0; i < B; ++i)
    if (mixed.batch.utterances[i].waveform.size() != L ||
        mixed.clean.utterances[i].waveform.size() != L) {
      problem(fmt::format("utterance {} does not have the batch length {}", i, L));
      return report;
    }

  std::vector<int> owner(B, -1);
  for (size_t k = 0; k < mixed.specs.size(); ++k) {
    const MixSpec& s = mixed.specs[k];
    const std::string tag = fmt::format("MixSpec {} (target {})", k, s.target_index + 1);
    bool valid = true;
    if (s.target_index < 0 || static_cast<size_t>(s.target_index) >= B ||
        s.source_index < 0 || static_cast<size_t>(s.source_index) >= B) {
      problem(tag + ": batch index out of range");
      continue;
    }
    if (s.mix_length < 1 || s.mix_length > L / 2) {
      problem(fmt::format("{}: mix length l={} violates 1 <= l <= L/2 = {}", tag, s.mix_length,
                          L / 2));
      valid = false;
    }
    if (s.mix_length >= L || s.target_start + s.mix_length > L - 1 ||
        s.source_start + s.mix_length > L - 1) {
      problem(fmt::format("{}: start positions s={} s_b={} exceed L-l", tag, s.target_start + 1,
                          s.source_start + 1));
      valid = false;
    }
    if (owner[s.target_index] >= 0) {
      problem(fmt::format("{}: target already mixed by MixSpec {}", tag, owner[s.target_index]));
      valid = false;
    }
    owner[s.target_index] = valid ? static_cast<int>(k) : -2;
  }

  for (size_t i = 0; i < B; ++i) {
    const auto& got = mixed.batch.utterances[i].waveform.samples;
    const auto& clean = mixed.clean.utterances[i].waveform.samples;
    if (owner[i] == -2) continue;  // already reported
    size_t lo = L, hi = L;
    if (owner[i] >= 0) {
      const MixSpec& s = mixed.specs[owner[i]];
      lo = s.target_start;
      hi = s.target_start + s.mix_length;
      const auto& src = mixed.clean.utterances[s.source_index].waveform.samples;
      for (size_t n = lo; n < hi; ++n) {
        const float want = MixSample(clean[n], s.gain, src[s.source_start + (n - lo)]);
        if (std::memcmp(&want, &got[n], sizeof want) != 0) {
          problem(fmt::format("MixSpec {} (target {}): sample {} does not match the reconstruction",
                              owner[i], i + 1, n + 1));
          break;
        }
      }
    }
    for (size_t n = 0; n < L; ++n) {
      if (n >= lo && n < hi) continue;
      if (std::memcmp(&clean[n], &got[n], sizeof(float)) != 0) {
        problem(fmt::format("utterance {}: sample {} outside the mixed region differs from clean",
                            i + 1, n + 1));
        break;
      }
    }
  }
  return report;
}

Json MixSpecsToJson(int64_t batch_index, const std::vector<MixSpec>& specs) {
  Json arr = Json::array();
  for (const auto& s : specs)
    arr.push_back({{"target_index", s.target_index + 1},
                   {"source_index", s.source_index + 1},
                   {"l", s.mix_length},
                   {"s", s.target_start + 1},
                   {"s_b", s.source_start + 1},
                   {"gain", s.gain}});
  return {{"batch_index", batch_index}, {"specs", arr}};
}

std::vector<MixSpec> MixSpecsFromJson(const Json& record) {
  std::vector<MixSpec> out;
  for (const auto& j : record.at("specs")) {
    MixSpec s;
    s.target_index = j.at("target_index").get<int>() - 1;
    s.source_index = j.at("source_index").get<int>() - 1;
    s.mix_length = j.at("l").get<size_t>();
    const auto start = j.at("s").get<int64_t>();
    const auto start_b = j.at("s_b").get<int64_t>();
    if (start < 1 || start_b < 1) Fail("MixSpec positions are 1-based; got s={} s_b={}", start, start_b);
    s.target_start = static_cast<size_t>(start - 1);
    s.source_start = static_cast<size_t>(start_b - 1);
    s.gain = j.at("gain").get<float>();
    out.push_back(s);
  }
  return out;
}

}  // namespace spkpt
