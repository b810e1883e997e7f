// augment/utterance-mixing.h
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

#ifndef SPKPT_AUGMENT_UTTERANCE_MIXING_H_
#define SPKPT_AUGMENT_UTTERANCE_MIXING_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "base/io.h"
#include "corpus/corpus.h"

namespace spkpt {

/// Mixing ratios swept by `sweep-mix`; 0.2 is the default ratio.
inline constexpr std::array<double, 3> kMixSweepRatios = {0.0, 0.2, 0.5};
inline constexpr double kDefaultMixProbability = 0.2;

/// Scale applied to the chunk that is overlaid on the target utterance.
struct GainPolicy {
  enum class Kind { kFixed, kUniformSnr };
  Kind kind = Kind::kUniformSnr;
  double fixed_gain = 1.0;
  // Target-to-overlay energy ratio over the mixed region, drawn uniformly.
  double snr_lo_db = -5.0;
  double snr_hi_db = 5.0;

  static GainPolicy Fixed(double gain);
  static GainPolicy UniformSnr(double lo_db, double hi_db);
  /// "fixed:<g>" or "snr:<lo>:<hi>".
  static GainPolicy Parse(const std::string& text);
  std::string ToString() const;
};

/// One overlay. Positions are stored 0-based here and serialized 1-based.
struct MixSpec {
  int target_index = 0;
  int source_index = 0;
  size_t mix_length = 0;    // l, 1 <= l <= floor(L/2)
  size_t target_start = 0;  // s - 1, 0 <= s-1 <= L-l-1
  size_t source_start = 0;  // s_b - 1
  float gain = 1.0f;

  bool operator==(const MixSpec&) const = default;
};

struct MixOptions {
  // Algorithm-faithful default: the source may be the target itself.
  bool exclude_self = false;
};

struct MixedBatch {
  Batch batch;  // post-mix audio
  std::vector<MixSpec> specs;
  Batch clean;  // untouched input; content targets come from here
  size_t clipped_samples = 0;  // post-mix samples with |x| > 1
};

/// Utterance mixing. Each utterance is selected independently with
/// probability p; every selected target u receives
///   u[s, s+l) += gain * u_b[s_b, s_b+l)
/// with u_b uniform over the batch, l uniform on 1..floor(L/2) and s, s_b
/// uniform on 1..L-l. Sources are always read from the clean batch. All draws
/// come from one generator seeded with `seed`, in the order: B selection
/// coin flips, then (source, l, s, s_b, snr) per selected target.
MixedBatch MixBatch(const Batch& batch, double p, const GainPolicy& gain,
                    uint64_t seed, const MixOptions& opts = {});

struct MixReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Re-derives every mixed region from the clean batch and the specs and
/// checks the MixSpec bounds (l <= L/2 in particular) and bit equality
/// everywhere.
MixReport VerifyMix(const MixedBatch& mixed);

/// {batch_index, specs:[{target_index, source_index, l, s, s_b, gain}]},
/// all indices 1-based.
Json MixSpecsToJson(int64_t batch_index, const std::vector<MixSpec>& specs);
std::vector<MixSpec> MixSpecsFromJson(const Json& record);

}  // namespace spkpt

#endif  // SPKPT_AUGMENT_UTTERANCE_MIXING_H_
