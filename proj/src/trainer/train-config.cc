// trainer/train-config.cc
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

#include "trainer/train-config.h"

#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace spkpt {

void TrainConfig::Validate() const {
  if (steps < 1) Fail("config: steps must be >= 1");
  if (batch_size < 1) Fail("config: batch_size must be >= 1");
  if (utterance_length < 1) Fail("config: utterance_length must be >= 1");
  if (!(learning_rate >= 0.0)) Fail("config: learning_rate must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    Fail("config: warmup_fraction must be in [0, 1]");
  if (!(mix_probability >= 0.0 && mix_probability <= 1.0))
    Fail("config: mix_probability must be in [0, 1]");
  GainPolicy::Parse(gain_policy);
  loss.Validate();
  encoder.Validate();
  quantizer.Validate();
  mfcc.Validate();
  if (!encoder.UsesConv() && encoder.input_dim != mfcc.OutputDim())
    Fail("config: encoder.input_dim {} does not match the MFCC dimension {}", encoder.input_dim,
         mfcc.OutputDim());
}

int64_t TrainConfig::WarmupSteps() const {
  return std::max<int64_t>(1, std::llround(warmup_fraction * double(steps)));
}

double TrainConfig::LearningRate(int64_t step) const {
  const int64_t warm = WarmupSteps();
  if (step < warm) return learning_rate * double(step + 1) / double(warm);
  if (steps <= warm) return learning_rate;
  return learning_rate * std::max(0.0, double(steps - step) / double(steps - warm));
}

void to_json(Json& j, const TrainSeeds& s) {
  j = Json{{"data", s.data},         {"model", s.model},         {"mixing", s.mixing},
           {"masking", s.masking},   {"negatives", s.negatives}, {"gumbel", s.gumbel}};
}

void from_json(const Json& j, TrainSeeds& s) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "data") s.data = it->get<uint64_t>();
    else if (key == "model") s.model = it->get<uint64_t>();
    else if (key == "mixing") s.mixing = it->get<uint64_t>();
    else if (key == "masking") s.masking = it->get<uint64_t>();
    else if (key == "negatives") s.negatives = it->get<uint64_t>();
    else if (key == "gumbel") s.gumbel = it->get<uint64_t>();
    else Fail("unknown seed key 'seeds.{}'", key);
  }
}

void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"steps", c.steps},
           {"batch_size", c.batch_size},
           {"distinct_speaker_batches", c.distinct_speaker_batches},
           {"utterance_length", c.utterance_length},
           {"learning_rate", c.learning_rate},
           {"warmup_fraction", c.warmup_fraction},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps},
           {"grad_clip", c.grad_clip},
           {"mix_probability", c.mix_probability},
           {"gain_policy", c.gain_policy},
           {"mix_exclude_self", c.mix_exclude_self},
           {"use_speaker_loss", c.use_speaker_loss},
           {"loss", c.loss},
           {"seeds", c.seeds},
           {"checkpoint_every", c.checkpoint_every},
           {"metrics_tail", c.metrics_tail},
           {"encoder", c.encoder},
           {"quantizer", c.quantizer},
           {"mfcc", c.mfcc},
           {"sample_rate", c.sample_rate}};
}

void from_json(const Json& j, TrainConfig& c) {
  if (!j.is_object()) Fail("config: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    try {
      if (key == "steps") c.steps = it->get<int64_t>();
      else if (key == "batch_size") c.batch_size = it->get<int>();
      else if (key == "distinct_speaker_batches") c.distinct_speaker_batches = it->get<bool>();
      else if (key == "utterance_length") c.utterance_length = it->get<int64_t>();
      else if (key == "learning_rate") c.learning_rate = it->get<double>();
      else if (key == "warmup_fraction") c.warmup_fraction = it->get<double>();
      else if (key == "adam_beta1") c.adam_beta1 = it->get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = it->get<double>();
      else if (key == "adam_eps") c.adam_eps = it->get<double>();
      else if (key == "grad_clip") c.grad_clip = it->get<double>();
      else if (key == "mix_probability") c.mix_probability = it->get<double>();
      else if (key == "gain_policy") c.gain_policy = it->get<std::string>();
      else if (key == "mix_exclude_self") c.mix_exclude_self = it->get<bool>();
      else if (key == "use_speaker_loss") c.use_speaker_loss = it->get<bool>();
      else if (key == "loss") c.loss = it->get<LossWeights>();
      else if (key == "seeds") c.seeds = it->get<TrainSeeds>();
      else if (key == "checkpoint_every") c.checkpoint_every = it->get<int64_t>();
      else if (key == "metrics_tail") c.metrics_tail = it->get<int>();
      else if (key == "encoder") c.encoder = it->get<EncoderConfig>();
      else if (key == "quantizer") c.quantizer = it->get<QuantizerConfig>();
      else if (key == "mfcc") c.mfcc = it->get<MfccConfig>();
      else if (key == "sample_rate") c.sample_rate = it->get<int>();
      else Fail("unknown config key '{}'", key);
    } catch (const Json::type_error& e) {
      Fail("config key '{}' has the wrong type: {}", key, e.what());
    }
  }
}

void ApplyOverride(TrainConfig* cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    Fail("override '{}' is not of the form key=value", assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json doc = *cfg;
  Json* node = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) Fail("unknown config key '{}'", key);
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  *node = value;
  *cfg = doc.get<TrainConfig>();
}

std::string ConfigHash(const TrainConfig& cfg) {
  const Json doc = cfg;
  return HexU64(Fnv1a64(doc.dump()));
}

}  // namespace spkpt
