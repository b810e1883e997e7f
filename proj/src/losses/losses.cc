// losses/losses.cc
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

#include "losses/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "base/error.h"
#include "base/rng.h"

namespace spkpt {

std::string PositiveSetName(PositiveSet p) {
  return p == PositiveSet::kUtterance ? "utterance" : "same_step";
}

PositiveSet ParsePositiveSet(const std::string& name) {
  if (name == "same_step") return PositiveSet::kSameStep;
  if (name == "utterance") return PositiveSet::kUtterance;
  Fail("unknown positive set '{}' (expected same_step or utterance)", name);
}

void LossWeights::Validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) Fail("loss weights: alpha and beta must be >= 0");
  if (!(kappa > 0.0)) Fail("loss weights: kappa must be > 0");
  if (num_negatives < 0) Fail("loss weights: num_negatives must be >= 0");
}

void to_json(Json& j, const LossWeights& w) {
  j = Json{{"alpha", w.alpha}, {"beta", w.beta}, {"kappa", w.kappa},
           {"num_negatives", w.num_negatives}, {"positives", PositiveSetName(w.positives)}};
}

void from_json(const Json& j, LossWeights& w) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "alpha") w.alpha = it->get<double>();
    else if (it.key() == "beta") w.beta = it->get<double>();
    else if (it.key() == "kappa") w.kappa = it->get<double>();
    else if (it.key() == "num_negatives") w.num_negatives = it->get<int>();
    else if (it.key() == "positives") w.positives = ParsePositiveSet(it->get<std::string>());
    else Fail("unknown loss weight key '{}'", it.key());
  }
}

Json LossBreakdownToJson(const LossBreakdown& b) {
  return Json{{"contrastive", b.contrastive}, {"diversity", b.diversity},
              {"speaker", b.speaker},         {"content", b.content},
              {"total", b.total},             {"positives", b.positives},
              {"negatives", b.negatives},     {"masked_frames", b.masked_frames}};
}

ContentLossResult ContentLoss(const Mat& logits, const PseudoLabelSequence& labels,
                              const MaskSet& mask) {
  if (mask.empty()) Fail("content_loss: mask is empty");
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    Fail("content_loss: {} labels for {} frames", labels.size(), logits.rows());
  const Eigen::Index k = logits.cols();
  ContentLossResult r;
  r.grad = Mat::Zero(logits.rows(), k);
  r.count = static_cast<int64_t>(mask.size());
  const double inv = 1.0 / double(r.count);
  for (int t : mask.indices) {
    if (t < 0 || t >= logits.rows()) Fail("content_loss: masked frame {} out of range", t);
    const int z = labels.labels[t];
    if (z < 0 || z >= k) Fail("content_loss: label {} at frame {} is not below k={}", z, t, k);
    const double m = logits.row(t).maxCoeff();
    const RowVec e = (logits.row(t).array() - m).exp();
    const double sum = e.sum();
    r.value += (std::log(sum) + m - logits(t, z)) * inv;
    r.grad.row(t) = e / sum * inv;
    r.grad(t, z) -= inv;
  }
  return r;
}

namespace {

// -log sigmoid(x), stable for large |x|.
double NegLogSigmoid(double x) { return std::log1p(std::exp(-std::fabs(x))) + std::max(-x, 0.0); }
double Sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

constexpr double kNormFloor = 1e-8;

// Cosine similarity and its gradients w.r.t. both arguments.
double Cosine(const RowVec& a, const RowVec& b, RowVec* da, RowVec* db) {
  const double na = std::max(a.norm(), kNormFloor);
  const double nb = std::max(b.norm(), kNormFloor);
  const double s = a.dot(b) / (na * nb);
  if (da) *da = b / (na * nb) - s * a / (na * na);
  if (db) *db = a / (na * nb) - s * b / (nb * nb);
  return s;
}

}  // namespace

ContrastiveResult ContrastiveLoss(std::span<const Mat> latents, std::span<const Mat> quantized,
                                  double kappa, int num_negatives, uint64_t seed,
                                  PositiveSet positives) {
  if (!(kappa > 0.0)) Fail("contrastive_loss: kappa must be > 0");
  if (latents.size() != quantized.size())
    Fail("contrastive_loss: {} latent sets but {} quantized sets", latents.size(),
         quantized.size());
  const int B = static_cast<int>(latents.size());
  if (B == 0) Fail("contrastive_loss: empty batch");
  if (B == 1 && num_negatives > 0)
    Fail("contrastive_loss: a batch of one utterance has no negatives; set K=0 or use B >= 2");
  std::vector<int64_t> offset(static_cast<size_t>(B) + 1, 0);
  for (int b = 0; b < B; ++b) {
    if (latents[b].rows() == 0) Fail("contrastive_loss: utterance {} has no masked steps", b);
    if (latents[b].rows() != quantized[b].rows() || latents[b].cols() != quantized[b].cols())
      Fail("contrastive_loss: utterance {} latent/quantized shapes differ", b);
    offset[b + 1] = offset[b] + latents[b].rows();
  }

  ContrastiveResult r;
  Rng rng(seed);
  std::vector<int64_t> pool;
  for (int b = 0; b < B; ++b) {
    const int64_t pool_size = offset[B] - latents[b].rows();
    for (int i = 0; i < latents[b].rows(); ++i) {
      if (positives == PositiveSet::kUtterance) {
        for (int j = 0; j < latents[b].rows(); ++j) r.terms.push_back({b, i, b, j, true});
      } else {
        r.terms.push_back({b, i, b, i, true});
      }
      if (num_negatives == 0) continue;
      // Pool index p enumerates masked steps of the other utterances in
      // batch order; it skips utterance b.
      auto resolve = [&](int64_t p) {
        const int64_t flat = p < offset[b] ? p : p + latents[b].rows();
        const int nb = static_cast<int>(
            std::upper_bound(offset.begin(), offset.end(), flat) - offset.begin() - 1);
        return std::pair<int, int>(nb, static_cast<int>(flat - offset[nb]));
      };
      if (pool_size >= num_negatives) {
        pool.resize(static_cast<size_t>(pool_size));
        std::iota(pool.begin(), pool.end(), 0);
        for (int k = 0; k < num_negatives; ++k) {
          const auto j = static_cast<size_t>(rng.UniformInt(k, pool_size - 1));
          std::swap(pool[k], pool[j]);
          const auto [nb, ni] = resolve(pool[k]);
          r.terms.push_back({b, i, nb, ni, false});
        }
      } else {
        r.sampled_with_replacement = true;
        for (int k = 0; k < num_negatives; ++k) {
          const auto [nb, ni] = resolve(rng.UniformInt(0, pool_size - 1));
          r.terms.push_back({b, i, nb, ni, false});
        }
      }
    }
  }
  if (r.sampled_with_replacement)
    spdlog::debug("contrastive_loss: fewer than {} negative candidates; sampling with replacement",
                  num_negatives);

  for (int b = 0; b < B; ++b) {
    r.grad_latents.push_back(Mat::Zero(latents[b].rows(), latents[b].cols()));
    r.grad_quantized.push_back(Mat::Zero(quantized[b].rows(), quantized[b].cols()));
  }
  const double inv = 1.0 / double(r.terms.size());
  RowVec da, dq;
  for (const auto& term : r.terms) {
    const RowVec a = latents[term.anchor_utt].row(term.anchor_row);
    const RowVec q = quantized[term.target_utt].row(term.target_row);
    const double s = Cosine(a, q, &da, &dq) / kappa;
    double dl_ds;
    if (term.positive) {
      r.value += NegLogSigmoid(s) * inv;
      dl_ds = -(1.0 - Sigmoid(s)) / kappa;
    } else {
      r.value += NegLogSigmoid(-s) * inv;
      dl_ds = Sigmoid(s) / kappa;
    }
    r.grad_latents[term.anchor_utt].row(term.anchor_row) += (dl_ds * inv) * da;
    r.grad_quantized[term.target_utt].row(term.target_row) += (dl_ds * inv) * dq;
  }
  return r;
}

ContrastiveResult ContrastiveLossFromTaps(std::span<const Mat> taps,
                                          std::span<const Mat> quantized,
                                          std::span<const MaskSet> masks, const LossWeights& w,
                                          uint64_t seed) {
  if (taps.size() != masks.size() || taps.size() != quantized.size())
    Fail("contrastive_loss: taps, quantized and masks must have one entry per utterance");
  std::vector<Mat> latents;
  for (size_t b = 0; b < taps.size(); ++b) {
    if (masks[b].empty()) Fail("contrastive_loss: utterance {} has an empty mask", b);
    Mat rows(static_cast<Eigen::Index>(masks[b].size()), taps[b].cols());
    for (size_t i = 0; i < masks[b].size(); ++i) {
      const int t = masks[b].indices[i];
      if (t < 0 || t >= taps[b].rows()) Fail("contrastive_loss: masked frame {} out of range", t);
      rows.row(static_cast<Eigen::Index>(i)) = taps[b].row(t);
    }
    latents.push_back(std::move(rows));
  }
  ContrastiveResult r = ContrastiveLoss(latents, quantized, w.kappa, w.num_negatives, seed,
                                        w.positives);
  for (size_t b = 0; b < taps.size(); ++b) {
    Mat full = Mat::Zero(taps[b].rows(), taps[b].cols());
    for (size_t i = 0; i < masks[b].size(); ++i)
      full.row(masks[b].indices[i]) = r.grad_latents[b].row(static_cast<Eigen::Index>(i));
    r.grad_latents[b] = std::move(full);
  }
  return r;
}

DiversityResult DiversityLoss(const Mat& usage) {
  const Eigen::Index G = usage.rows(), V = usage.cols();
  if (G == 0 || V == 0) Fail("diversity_loss: empty usage matrix");
  for (Eigen::Index g = 0; g < G; ++g) {
    const double s = usage.row(g).sum();
    if (std::fabs(s - 1.0) > 1e-6) Fail("diversity_loss: codebook {} usage sums to {}", g, s);
  }
  const double inv = 1.0 / double(G * V);
  DiversityResult r;
  r.grad.resize(G, V);
  for (Eigen::Index g = 0; g < G; ++g)
    for (Eigen::Index v = 0; v < V; ++v) {
      const double p = usage(g, v);
      if (p < 0.0) Fail("diversity_loss: negative usage {} at ({}, {})", p, g, v);
      if (p > 0.0) r.value += p * std::log(p) * inv;
      // The derivative diverges at p = 0; it is evaluated at the smallest
      // positive double there.
      r.grad(g, v) = (std::log(std::max(p, std::numeric_limits<double>::min())) + 1.0) * inv;
    }
  return r;
}

LossBreakdown Combine(double contrastive, double diversity, double content,
                      const LossWeights& w) {
  if (!std::isfinite(contrastive) || !std::isfinite(diversity) || !std::isfinite(content))
    Fail("combine: non-finite loss term (contrastive={}, diversity={}, content={})", contrastive,
         diversity, content);
  LossBreakdown b;
  b.contrastive = contrastive;
  b.diversity = diversity;
  b.content = content;
  b.speaker = contrastive + w.alpha * diversity;
  b.total = b.speaker + w.beta * content;
  return b;
}

}  // namespace spkpt
