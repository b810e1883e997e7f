// quantizer/gumbel-quantizer.h
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

#ifndef SPKPT_QUANTIZER_GUMBEL_QUANTIZER_H_
#define SPKPT_QUANTIZER_GUMBEL_QUANTIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "base/io.h"
#include "base/matrix.h"
#include "base/rng.h"
#include "encoder/nn-ops.h"

namespace spkpt {

struct QuantizerConfig {
  int groups = 2;    // G codebooks
  int entries = 32;  // V entries per codebook
  int input_dim = 64;
  int output_dim = 64;
  int entry_dim = 32;  // output_dim / groups by default
  // Geometric anneal of the Gumbel-softmax temperature over training.
  double tau_start = 2.0;
  double tau_end = 0.5;

  void Validate() const;
  int NumLogits() const { return groups * entries; }
  /// Temperature at `step` of a run of `total_steps`.
  double Temperature(int64_t step, int64_t total_steps) const;
};

void to_json(Json& j, const QuantizerConfig& c);
void from_json(const Json& j, QuantizerConfig& c);

struct QuantizerParams {
  LinearParams proj_in;  // latent -> G*V logits
  Mat codebook;          // (G*V) x entry_dim, row g*V + v is entry v of codebook g
  LinearParams proj_out; // G*entry_dim -> output_dim

  void Visit(const std::string& prefix, const ParamVisitor& f);
};

QuantizerParams InitQuantizer(const QuantizerConfig& cfg, Rng* rng);

/// p_{g,v} = softmax_v((logits_{g,v} + noise_{g,v}) / tau) for each row g,
/// computed with max subtraction. logits and noise are G x V.
Mat GumbelProbs(const Mat& logits, double tau, const Mat& noise);

/// G x V i.i.d. Gumbel(0, 1) samples, -log(-log(u)).
Mat SampleGumbelNoise(int groups, int entries, Rng* rng);

struct QuantizeOutput {
  Mat q;       // T x output_dim
  Mat probs;   // T x (G*V), row-major over (g, v)
  Mat logits;  // T x (G*V), before noise
  Mat noise;   // T x (G*V)
  std::vector<int> hard_indices;  // T x G, argmax of the perturbed logits
  Mat selection;  // T x (G*V): one-hot (hard) or probs (soft) used in the forward
  Mat concat;     // T x (G*entry_dim), selected entries before proj_out
  double tau = 1.0;
  bool hard = true;

  Eigen::Index num_frames() const { return q.rows(); }
};

/// Quantizes every row of `latent`. Frame t uses Gumbel noise from the
/// stream DeriveSeed(noise_seed, t), so results do not depend on evaluation
/// order. With hard = true the forward pass uses one-hot selections and the
/// backward pass treats them as the soft probabilities (straight-through).
QuantizeOutput Quantize(const Mat& latent, const QuantizerParams& params,
                        const QuantizerConfig& cfg, double tau, uint64_t noise_seed,
                        bool hard);

/// Backward through Quantize. d_q is dL/dq (T x output_dim, may be empty);
/// d_probs is an additional dL/dprobs (e.g. from the diversity loss, may be
/// empty). Accumulates into grads and returns dL/dlatent.
Mat QuantizeBackward(const Mat& latent, const QuantizeOutput& out,
                     const QuantizerParams& params, const QuantizerConfig& cfg,
                     const Mat& d_q, const Mat& d_probs, QuantizerParams* grads);

/// Mean of probs over every frame of every output, as G x V.
Mat UsageStats(std::span<const QuantizeOutput> outputs, int groups, int entries);

/// JSON histogram of averaged codebook usage, one array per codebook.
Json UsageToJson(const Mat& usage);

}  // namespace spkpt

#endif  // SPKPT_QUANTIZER_GUMBEL_QUANTIZER_H_
