// trainer/checkpoint.h
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

#ifndef SPKPT_TRAINER_CHECKPOINT_H_
#define SPKPT_TRAINER_CHECKPOINT_H_

#include <filesystem>

#include "trainer/train-config.h"
#include "trainer/trainer.h"

namespace spkpt {

/// dir/checkpoint.json holds {config, step, metrics_tail, tensors:[{name,
/// offset, shape}]}; dir/checkpoint.bin holds every tensor as little-endian
/// float64, model parameters first, then input statistics and Adam moments.
void SaveCheckpoint(const std::filesystem::path& dir, const TrainConfig& cfg,
                    const TrainState& state);

struct LoadedCheckpoint {
  TrainConfig config;
  TrainState state;
};

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& dir);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_CHECKPOINT_H_
