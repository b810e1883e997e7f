// quantizer/gumbel-quantizer.cc
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

#include "quantizer/gumbel-quantizer.h"

#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace spkpt {

void QuantizerConfig::Validate() const {
  if (groups < 1 || entries < 1 || entry_dim < 1 || input_dim < 1 || output_dim < 1)
    Fail("quantizer: groups, entries and dims must be >= 1");
  if (!(tau_start > 0.0) || !(tau_end > 0.0)) Fail("quantizer: temperatures must be positive");
}

double QuantizerConfig::Temperature(int64_t step, int64_t total_steps) const {
  if (total_steps <= 1) return tau_start;
  const double frac = std::clamp(double(step) / double(total_steps - 1), 0.0, 1.0);
  return tau_start * std::pow(tau_end / tau_start, frac);
}

void to_json(Json& j, const QuantizerConfig& c) {
  j = Json{{"groups", c.groups},         {"entries", c.entries},
           {"input_dim", c.input_dim},   {"output_dim", c.output_dim},
           {"entry_dim", c.entry_dim},   {"tau_start", c.tau_start},
           {"tau_end", c.tau_end}};
}

void from_json(const Json& j, QuantizerConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "groups") c.groups = it->get<int>();
    else if (key == "entries") c.entries = it->get<int>();
    else if (key == "input_dim") c.input_dim = it->get<int>();
    else if (key == "output_dim") c.output_dim = it->get<int>();
    else if (key == "entry_dim") c.entry_dim = it->get<int>();
    else if (key == "tau_start") c.tau_start = it->get<double>();
    else if (key == "tau_end") c.tau_end = it->get<double>();
    else Fail("unknown quantizer config key '{}'", key);
  }
}

void QuantizerParams::Visit(const std::string& prefix, const ParamVisitor& f) {
  proj_in.Visit(prefix + ".proj_in", f);
  f(prefix + ".codebook", codebook);
  proj_out.Visit(prefix + ".proj_out", f);
}

QuantizerParams InitQuantizer(const QuantizerConfig& cfg, Rng* rng) {
  cfg.Validate();
  QuantizerParams p;
  p.proj_in = InitLinear(cfg.input_dim, cfg.NumLogits(), rng);
  const double bound = 1.0 / std::sqrt(double(cfg.entry_dim));
  p.codebook.resize(cfg.NumLogits(), cfg.entry_dim);
  for (Eigen::Index i = 0; i < p.codebook.size(); ++i)
    p.codebook.data()[i] = bound * (2.0 * rng->Uniform() - 1.0);
  p.proj_out = InitLinear(cfg.groups * cfg.entry_dim, cfg.output_dim, rng);
  return p;
}

Mat GumbelProbs(const Mat& logits, double tau, const Mat& noise) {
  if (!(tau > 0.0)) Fail("gumbel_probs: temperature must be positive, got {}", tau);
  if (logits.rows() != noise.rows() || logits.cols() != noise.cols())
    Fail("gumbel_probs: logits {}x{} and noise {}x{} differ in shape", logits.rows(),
         logits.cols(), noise.rows(), noise.cols());
  if (!logits.allFinite()) Fail("gumbel_probs: non-finite logits");
  if (!noise.allFinite()) Fail("gumbel_probs: non-finite noise");
  const Mat z = (logits + noise) / tau;
  Mat p(z.rows(), z.cols());
  for (Eigen::Index g = 0; g < z.rows(); ++g) {
    const double m = z.row(g).maxCoeff();
    p.row(g) = (z.row(g).array() - m).exp();
    p.row(g) /= p.row(g).sum();
  }
  return p;
}

Mat SampleGumbelNoise(int groups, int entries, Rng* rng) {
  Mat n(groups, entries);
  for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = rng->Gumbel();
  return n;
}

QuantizeOutput Quantize(const Mat& latent, const QuantizerParams& params,
                        const QuantizerConfig& cfg, double tau, uint64_t noise_seed, bool hard) {
  if (latent.cols() != cfg.input_dim)
    Fail("quantize: latent dim {} does not match quantizer input dim {}", latent.cols(),
         cfg.input_dim);
  const int G = cfg.groups, V = cfg.entries, E = cfg.entry_dim;
  const Eigen::Index T = latent.rows();
  QuantizeOutput out;
  out.tau = tau;
  out.hard = hard;
  out.logits = LinearForward(params.proj_in, latent);
  out.noise.resize(T, G * V);
  out.probs.resize(T, G * V);
  out.selection = Mat::Zero(T, G * V);
  out.hard_indices.assign(static_cast<size_t>(T * G), 0);
  out.concat.resize(T, G * E);
  for (Eigen::Index t = 0; t < T; ++t) {
    Rng rng(DeriveSeed(noise_seed, static_cast<uint64_t>(t)));
    const Mat noise = SampleGumbelNoise(G, V, &rng);
    const Mat logits = Eigen::Map<const Mat>(out.logits.row(t).data(), G, V);
    const Mat probs = GumbelProbs(logits, tau, noise);
    out.noise.row(t) = Eigen::Map<const RowVec>(noise.data(), G * V);
    out.probs.row(t) = Eigen::Map<const RowVec>(probs.data(), G * V);
    for (int g = 0; g < G; ++g) {
      // Argmax of the perturbed logits (ties to the lowest index).
      int best = 0;
      double best_z = logits(g, 0) + noise(g, 0);
      for (int v = 1; v < V; ++v) {
        const double z = logits(g, v) + noise(g, v);
        if (z > best_z) {
          best_z = z;
          best = v;
        }
      }
      out.hard_indices[t * G + g] = best;
      if (hard) {
        out.selection(t, g * V + best) = 1.0;
        out.concat.block(t, g * E, 1, E) = params.codebook.row(g * V + best);
      } else {
        out.selection.block(t, g * V, 1, V) = probs.row(g);
        out.concat.block(t, g * E, 1, E) =
            probs.row(g) * params.codebook.middleRows(g * V, V);
      }
    }
  }
  out.q = LinearForward(params.proj_out, out.concat);
  return out;
}

Mat QuantizeBackward(const Mat& latent, const QuantizeOutput& out, const QuantizerParams& params,
                     const QuantizerConfig& cfg, const Mat& d_q, const Mat& d_probs,
                     QuantizerParams* grads) {
  const int G = cfg.groups, V = cfg.entries, E = cfg.entry_dim;
  const Eigen::Index T = out.probs.rows();
  Mat d_sel = Mat::Zero(T, G * V);
  if (d_q.size() > 0) {
    const Mat d_concat = LinearBackward(params.proj_out, out.concat, d_q, &grads->proj_out);
    for (int g = 0; g < G; ++g) {
      const auto dc = d_concat.middleCols(g * E, E);
      const auto entries = params.codebook.middleRows(g * V, V);
      grads->codebook.middleRows(g * V, V).noalias() +=
          out.selection.middleCols(g * V, V).transpose() * dc;
      d_sel.middleCols(g * V, V).noalias() += dc * entries.transpose();
    }
  }
  // Straight-through: gradients w.r.t. the one-hot selection are applied to
  // the soft probabilities.
  Mat d_p = d_sel;
  if (d_probs.size() > 0) d_p += d_probs;
  Mat d_logits(T, G * V);
  for (Eigen::Index t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g) {
      const auto p = out.probs.block(t, g * V, 1, V);
      const auto dp = d_p.block(t, g * V, 1, V);
      const double dot = p.cwiseProduct(dp).sum();
      d_logits.block(t, g * V, 1, V) = p.cwiseProduct((dp.array() - dot).matrix()) / out.tau;
    }
  return LinearBackward(params.proj_in, latent, d_logits, &grads->proj_in);
}

Mat UsageStats(std::span<const QuantizeOutput> outputs, int groups, int entries) {
  Eigen::Index frames = 0;
  RowVec sum = RowVec::Zero(groups * entries);
  for (const auto& o : outputs) {
    if (o.probs.cols() != groups * entries)
      Fail("usage_stats: output has {} probability columns, expected {}", o.probs.cols(),
           groups * entries);
    for (Eigen::Index t = 0; t < o.probs.rows(); ++t) sum += o.probs.row(t);
    frames += o.probs.rows();
  }
  if (frames == 0) Fail("usage_stats: no frames");
  sum /= double(frames);
  return Eigen::Map<const Mat>(sum.data(), groups, entries);
}

Json UsageToJson(const Mat& usage) {
  Json j = Json::array();
  for (Eigen::Index g = 0; g < usage.rows(); ++g) {
    std::vector<double> row(usage.row(g).data(), usage.row(g).data() + usage.cols());
    j.push_back(row);
  }
  return j;
}

}  // namespace spkpt
