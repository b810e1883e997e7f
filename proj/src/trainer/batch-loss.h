// trainer/batch-loss.h
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

#ifndef SPKPT_TRAINER_BATCH_LOSS_H_
#define SPKPT_TRAINER_BATCH_LOSS_H_

#include <cstdint>
#include <vector>

#include "encoder/masking.h"
#include "losses/losses.h"
#include "pseudolabel/pseudo-labels.h"
#include "trainer/model.h"

namespace spkpt {

/// Encoder inputs for one batch with their (clean-audio) targets and masks.
struct BatchInputs {
  std::vector<Mat> inputs;
  std::vector<PseudoLabelSequence> labels;
  std::vector<MaskSet> masks;
};

struct BatchLossOptions {
  LossWeights weights;
  bool use_speaker_loss = true;
  bool hard = true;  // straight-through quantizer; false = soft (gradient checks)
  double tau = 1.0;
  uint64_t noise_seed = 0;     // frame noise: DeriveSeed(DeriveSeed(noise_seed, b), t)
  uint64_t negative_seed = 0;  // contrastive negative draws
};

struct BatchLossResult {
  LossBreakdown loss;
  int64_t correct_masked = 0;  // argmax content prediction == pseudo-label
  Mat usage;                   // averaged codebook usage (G x V), empty if unused
};

/// Total loss over a batch: content cross-entropy averaged over every masked
/// frame of the batch, plus (when enabled) the contrastive and diversity
/// terms on the tap layer's masked steps. When grads is non-null the full
/// gradient is accumulated into it.
BatchLossResult ComputeBatchLoss(const Model& model, const BatchInputs& batch,
                                 const BatchLossOptions& opts, ModelParams* grads);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_BATCH_LOSS_H_
