// trainer/trainer.h
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

#ifndef SPKPT_TRAINER_TRAINER_H_
#define SPKPT_TRAINER_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "base/io.h"
#include "corpus/corpus.h"
#include "pseudolabel/pseudo-labels.h"
#include "trainer/batch-loss.h"
#include "trainer/model.h"
#include "trainer/train-config.h"

namespace spkpt {

/// Corpus fitted to the training length with its clean-audio labels,
/// index-aligned.
struct TrainData {
  std::vector<Utterance> utterances;
  std::vector<PseudoLabelSequence> labels;

  const PseudoLabelSequence& LabelsFor(const std::string& utterance_id) const;
};

/// Fits every utterance to cfg.utterance_length and pairs it with its label
/// sequence by id. Labels must be clean-audio labels with one entry per
/// encoder frame of the fitted utterance.
TrainData PrepareTrainData(const TrainConfig& cfg, std::span<const Utterance> corpus,
                           std::span<const PseudoLabelSequence> labels);

/// Encoder input for a waveform: normalized MFCC frames, or the raw samples
/// as an N x 1 column for the convolutional front end.
Mat ModelInput(const TrainConfig& cfg, const Model& model, const Waveform& wave);

/// Encoder hidden states for an unmasked waveform: N + 1 matrices of T x d,
/// index 0 being the input projection.
std::vector<Mat> HiddenStates(const TrainConfig& cfg, const Model& model, const Waveform& wave);

struct TrainState {
  Model model;
  ModelParams adam_m;
  ModelParams adam_v;
  int64_t step = 0;  // steps completed
  std::vector<Json> metrics_tail;
};

/// Fresh model from seeds.model; input statistics from the clean corpus.
TrainState InitTrainState(const TrainConfig& cfg, const TrainData& data);

/// Everything a step feeds to the loss, before any parameter is touched.
struct StepBatch {
  BatchInputs inputs;
  std::vector<MixSpec> specs;
  std::vector<std::string> ids;
  size_t clipped_samples = 0;
};

/// batch selection -> mixing -> features on mixed audio -> masks, for `step`.
StepBatch MakeStepBatch(const TrainConfig& cfg, const TrainData& data, const Model& model,
                        int64_t step);

/// One optimizer step. Returns the metrics record of the step. A non-finite
/// loss or gradient raises an Error naming the step.
Json TrainStep(const TrainConfig& cfg, const TrainData& data, TrainState* state);

struct TrainOptions {
  std::filesystem::path out_dir;  // metrics.jsonl, checkpoints, summary.json
  std::optional<std::filesystem::path> resume_from;
  int64_t stop_after = -1;  // stop once this many steps are done (-1 = cfg.steps)
  bool write_final_checkpoint = true;
  std::function<void(const Json&)> on_record;
};

struct TrainResult {
  TrainState state;
  std::vector<Json> records;  // this invocation's records
  Json summary;
};

/// Runs steps from the initial (or resumed) state and writes one JSON line
/// per step to out_dir/metrics.jsonl. Periodic checkpoints go to
/// out_dir/checkpoint-<step>, the final one to out_dir/final.
TrainResult Train(const TrainConfig& cfg, const TrainData& data, const TrainOptions& opts);

/// Mean of the "total" field over the last ceil(fraction * n) records.
double TailMeanTotal(std::span<const Json> records, double fraction = 0.1);

/// Summary of a finished run: final losses, tail mean and early moving
/// average of the total loss, masked accuracy.
Json SummarizeRun(std::span<const Json> records);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_TRAINER_H_
