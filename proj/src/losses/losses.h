// losses/losses.h
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

#ifndef SPKPT_LOSSES_LOSSES_H_
#define SPKPT_LOSSES_LOSSES_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "base/io.h"
#include "base/matrix.h"
#include "encoder/masking.h"
#include "pseudolabel/pseudo-labels.h"

namespace spkpt {

/// Which quantized vectors count as positives for an anchor l^b_t.
enum class PositiveSet {
  kSameStep,   // q^b_t only
  kUtterance,  // every masked q^b_s of the anchor's utterance
};

std::string PositiveSetName(PositiveSet p);
PositiveSet ParsePositiveSet(const std::string& name);

struct LossWeights {
  double alpha = 0.1;  // diversity weight inside the speaker loss
  double beta = 1.0;   // content weight
  double kappa = 0.1;  // contrastive temperature
  int num_negatives = 100;
  PositiveSet positives = PositiveSet::kSameStep;

  void Validate() const;
};

void to_json(Json& j, const LossWeights& w);
void from_json(const Json& j, LossWeights& w);

struct LossBreakdown {
  double contrastive = 0.0;
  double diversity = 0.0;
  double speaker = 0.0;  // contrastive + alpha * diversity
  double content = 0.0;
  double total = 0.0;  // speaker + beta * content
  int64_t positives = 0;
  int64_t negatives = 0;
  int64_t masked_frames = 0;
};

Json LossBreakdownToJson(const LossBreakdown& b);

struct ContentLossResult {
  double value = 0.0;
  Mat grad;  // dL/dlogits, zero outside the mask
  int64_t count = 0;
};

/// Mean over masked frames of -log softmax(logits_t)[z_t].
ContentLossResult ContentLoss(const Mat& logits, const PseudoLabelSequence& labels,
                              const MaskSet& mask);

/// One binary-logistic term: anchor latent (utterance, row) against a
/// quantized vector (utterance, row). Rows index the utterance's masked
/// steps in mask order.
struct ContrastiveTerm {
  int anchor_utt;
  int anchor_row;
  int target_utt;
  int target_row;
  bool positive;
};

struct ContrastiveResult {
  double value = 0.0;
  std::vector<Mat> grad_latents;    // per utterance, M_b x d
  std::vector<Mat> grad_quantized;  // per utterance, M_b x d
  std::vector<ContrastiveTerm> terms;
  bool sampled_with_replacement = false;
};

/// Utterance-wise contrastive loss over masked steps. For every masked latent
/// l_t of utterance b, the positive is its own quantized vector q_t, or with
/// PositiveSet::kUtterance every masked q of utterance b (terms
/// -log sigmoid(sim/kappa)), and K negatives are drawn uniformly from the
/// masked quantized vectors of the other utterances (term
/// -log sigmoid(-sim/kappa)); sim is cosine similarity and the loss is the
/// mean over all terms. Negatives are distinct per anchor when the pool has
/// at least K entries, otherwise drawn with replacement.
/// latents[b] and quantized[b] hold the masked rows of utterance b.
ContrastiveResult ContrastiveLoss(std::span<const Mat> latents, std::span<const Mat> quantized,
                                  double kappa, int num_negatives, uint64_t seed,
                                  PositiveSet positives = PositiveSet::kSameStep);

/// Same loss addressed by full tap outputs and masks; gradients come back as
/// T x d per utterance (zero on unmasked rows).
ContrastiveResult ContrastiveLossFromTaps(std::span<const Mat> taps,
                                          std::span<const Mat> quantized,
                                          std::span<const MaskSet> masks, const LossWeights& w,
                                          uint64_t seed);

struct DiversityResult {
  double value = 0.0;
  Mat grad;  // dL/dp_bar, G x V
};

/// (1/(G V)) sum p log p over averaged codebook usage, with 0 log 0 = 0.
DiversityResult DiversityLoss(const Mat& usage);

/// speaker = contrastive + alpha * diversity; total = speaker + beta * content.
LossBreakdown Combine(double contrastive, double diversity, double content,
                      const LossWeights& w);

}  // namespace spkpt

#endif  // SPKPT_LOSSES_LOSSES_H_
