// trainer/batch-loss.cc
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

#include "trainer/batch-loss.h"

#include <algorithm>

#include "base/error.h"
#include "base/rng.h"

namespace spkpt {

BatchLossResult ComputeBatchLoss(const Model& model, const BatchInputs& batch,
                                 const BatchLossOptions& opts, ModelParams* grads) {
  const size_t B = batch.inputs.size();
  if (B == 0) Fail("batch loss: empty batch");
  if (batch.labels.size() != B || batch.masks.size() != B)
    Fail("batch loss: {} inputs, {} label sequences, {} masks", B, batch.labels.size(),
         batch.masks.size());
  const auto& ecfg = model.encoder_cfg;
  const auto& qcfg = model.quantizer_cfg;

  std::vector<EncoderTrace> traces(B);
  std::vector<EncoderOutput> outs(B);
  int64_t total_masked = 0;
  for (size_t b = 0; b < B; ++b) {
    outs[b] = EncoderForward(ecfg, model.params.encoder, batch.inputs[b], batch.masks[b],
                             grads ? &traces[b] : nullptr);
    if (static_cast<Eigen::Index>(batch.labels[b].size()) != outs[b].content_logits.rows())
      Fail("batch loss: utterance '{}' has {} labels for {} frames", batch.labels[b].utterance_id,
           batch.labels[b].size(), outs[b].content_logits.rows());
    if (batch.masks[b].empty()) Fail("batch loss: utterance {} has an empty mask", b);
    total_masked += static_cast<int64_t>(batch.masks[b].size());
  }

  BatchLossResult res;
  // Content: mean over all masked frames of the batch.
  double content = 0.0;
  std::vector<Mat> d_logits(B);
  for (size_t b = 0; b < B; ++b) {
    const ContentLossResult c = ContentLoss(outs[b].content_logits, batch.labels[b], batch.masks[b]);
    const double share = double(c.count) / double(total_masked);
    content += share * c.value;
    d_logits[b] = (opts.weights.beta * share) * c.grad;
    for (int t : batch.masks[b].indices) {
      Eigen::Index arg;
      outs[b].content_logits.row(t).maxCoeff(&arg);
      if (arg == batch.labels[b].labels[t]) ++res.correct_masked;
    }
  }

  double contrastive = 0.0, diversity = 0.0;
  std::vector<Mat> d_taps(B);
  if (opts.use_speaker_loss) {
    std::vector<Mat> latents(B), quantized(B);
    std::vector<QuantizeOutput> qouts(B);
    for (size_t b = 0; b < B; ++b) {
      const MaskSet& m = batch.masks[b];
      latents[b].resize(static_cast<Eigen::Index>(m.size()), ecfg.model_dim);
      for (size_t i = 0; i < m.size(); ++i)
        latents[b].row(static_cast<Eigen::Index>(i)) = outs[b].tap.row(m.indices[i]);
      qouts[b] = Quantize(latents[b], model.params.quantizer, qcfg, opts.tau,
                          DeriveSeed(opts.noise_seed, b), opts.hard);
      quantized[b] = qouts[b].q;
    }
    // K is capped at the smallest candidate pool.
    int64_t available = total_masked;
    for (size_t b = 0; b < B; ++b)
      available = std::min<int64_t>(available, total_masked - static_cast<int64_t>(batch.masks[b].size()));
    const int num_negatives =
        available > 0 ? static_cast<int>(std::min<int64_t>(opts.weights.num_negatives, available))
                      : opts.weights.num_negatives;
    ContrastiveResult cr = ContrastiveLoss(latents, quantized, opts.weights.kappa, num_negatives,
                                           opts.negative_seed, opts.weights.positives);
    contrastive = cr.value;
    res.usage = UsageStats(qouts, qcfg.groups, qcfg.entries);
    const DiversityResult dr = DiversityLoss(res.usage);
    diversity = dr.value;
    for (const auto& term : cr.terms) {
      if (term.positive) ++res.loss.positives;
      else ++res.loss.negatives;
    }

    if (grads) {
      // dL_d/dp for every frame is (1/frames) dL_d/dp_bar.
      const RowVec d_usage =
          Eigen::Map<const RowVec>(dr.grad.data(), dr.grad.size()) *
          (opts.weights.alpha / double(total_masked));
      for (size_t b = 0; b < B; ++b) {
        Mat d_probs = d_usage.replicate(qouts[b].probs.rows(), 1);
        const Mat d_lat = QuantizeBackward(latents[b], qouts[b], model.params.quantizer, qcfg,
                                           cr.grad_quantized[b], d_probs, &grads->quantizer);
        d_taps[b] = Mat::Zero(outs[b].tap.rows(), outs[b].tap.cols());
        const MaskSet& m = batch.masks[b];
        for (size_t i = 0; i < m.size(); ++i) {
          const auto r = static_cast<Eigen::Index>(i);
          d_taps[b].row(m.indices[i]) += cr.grad_latents[b].row(r) + d_lat.row(r);
        }
      }
    }
  }

  const LossBreakdown combined = Combine(contrastive, diversity, content, opts.weights);
  res.loss.contrastive = combined.contrastive;
  res.loss.diversity = combined.diversity;
  res.loss.speaker = combined.speaker;
  res.loss.content = combined.content;
  res.loss.total = opts.use_speaker_loss ? combined.total : opts.weights.beta * content;
  if (!opts.use_speaker_loss) res.loss.speaker = 0.0;
  res.loss.masked_frames = total_masked;

  if (grads)
    for (size_t b = 0; b < B; ++b)
      EncoderBackward(ecfg, model.params.encoder, traces[b], d_logits[b],
                      d_taps[b].size() > 0 ? &d_taps[b] : nullptr, &grads->encoder);
  return res;
}

}  // namespace spkpt
