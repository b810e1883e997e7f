// trainer/train-config.h
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

#ifndef SPKPT_TRAINER_TRAIN_CONFIG_H_
#define SPKPT_TRAINER_TRAIN_CONFIG_H_

#include <cstdint>
#include <string>

#include "augment/utterance-mixing.h"
#include "base/io.h"
#include "dsp/mfcc.h"
#include "encoder/encoder.h"
#include "losses/losses.h"
#include "quantizer/gumbel-quantizer.h"

namespace spkpt {

/// Every random stream of a run has its own seed.
struct TrainSeeds {
  uint64_t data = 1;       // batch selection
  uint64_t model = 2;      // parameter init
  uint64_t mixing = 3;     // utterance mixing
  uint64_t masking = 4;    // span masks
  uint64_t negatives = 5;  // contrastive negative draws
  uint64_t gumbel = 6;     // quantizer noise
};

void to_json(Json& j, const TrainSeeds& s);
void from_json(const Json& j, TrainSeeds& s);

struct TrainConfig {
  int64_t steps = 300;
  int batch_size = 8;
  // One utterance per speaker in every batch (needs speaker tags).
  bool distinct_speaker_batches = false;
  int64_t utterance_length = 8000;  // samples
  double learning_rate = 1e-3;      // peak
  double warmup_fraction = 0.08;    // then linear decay to zero
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-6;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
  double mix_probability = kDefaultMixProbability;
  std::string gain_policy = "snr:-5:5";
  bool mix_exclude_self = false;
  bool use_speaker_loss = true;  // false trains the content loss alone
  LossWeights loss;
  TrainSeeds seeds;
  int64_t checkpoint_every = 0;  // 0 = only the final checkpoint
  int metrics_tail = 64;         // records kept inside checkpoints
  EncoderConfig encoder;
  QuantizerConfig quantizer;
  MfccConfig mfcc;
  int sample_rate = 16000;

  void Validate() const;
  double LearningRate(int64_t step) const;
  int64_t WarmupSteps() const;
};

void to_json(Json& j, const TrainConfig& c);
/// Unknown keys anywhere in the document raise an Error naming the key.
void from_json(const Json& j, TrainConfig& c);

/// Applies "dotted.key=value"; value is parsed as JSON when possible and as
/// a bare string otherwise. The key must already exist.
void ApplyOverride(TrainConfig* cfg, const std::string& assignment);

/// Stable hash of the canonical JSON form.
std::string ConfigHash(const TrainConfig& cfg);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_TRAIN_CONFIG_H_
