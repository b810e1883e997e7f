// trainer/grad-check.cc
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

#include "trainer/grad-check.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "base/error.h"
#include "base/rng.h"

namespace spkpt {

GradCheckProblem MakeGradCheckProblem(const GradCheckOptions& opts) {
  EncoderConfig enc;
  enc.model_dim = 8;
  enc.num_layers = 2;
  enc.num_heads = 2;
  enc.ffn_dim = 16;
  enc.tap_layer = 1;
  enc.num_classes = 5;
  if (opts.conv_front_end) {
    enc.front_end = "conv";
    enc.input_dim = 1;
    enc.conv_channels = {4, 6};
    enc.conv_kernels = {4, 3};
    enc.conv_strides = {3, 2};
  } else {
    enc.input_dim = 5;
  }
  QuantizerConfig q;
  q.groups = 2;
  q.entries = 4;
  q.entry_dim = 4;

  GradCheckProblem prob;
  prob.model = InitModel(enc, q, DeriveSeed(opts.seed, 100));
  Rng rng(DeriveSeed(opts.seed, 101));
  // Move every parameter off its structured init (unit gains, zero biases).
  prob.model.params.Visit([&](const std::string&, Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 0.1 * rng.Gaussian();
  });

  const int B = 3, T = 6;
  const Eigen::Index rows = opts.conv_front_end ? 40 : T;
  for (int b = 0; b < B; ++b) {
    Mat x(rows, enc.input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Gaussian();
    if (EncoderFrames(enc, x.rows()) != T) Fail("grad check: front end does not yield {} frames", T);
    prob.batch.inputs.push_back(std::move(x));
    PseudoLabelSequence labels;
    labels.utterance_id = "u" + std::to_string(b);
    labels.k = enc.num_classes;
    for (int t = 0; t < T; ++t)
      labels.labels.push_back(static_cast<int>(rng.UniformInt(0, enc.num_classes - 1)));
    prob.batch.labels.push_back(std::move(labels));
    std::vector<int> idx;
    const int64_t start = rng.UniformInt(0, 2);
    for (int t = static_cast<int>(start); t < static_cast<int>(start) + 3; ++t) idx.push_back(t);
    prob.batch.masks.push_back(MaskSet::FromIndices(idx));
  }
  prob.options.weights.num_negatives = 4;
  prob.options.use_speaker_loss = opts.use_speaker_loss;
  prob.options.hard = false;
  prob.options.tau = 1.0;
  prob.options.noise_seed = DeriveSeed(opts.seed, 102);
  prob.options.negative_seed = DeriveSeed(opts.seed, 103);
  return prob;
}

GradCheckReport RunGradCheck(const GradCheckOptions& opts) {
  GradCheckProblem prob = MakeGradCheckProblem(opts);
  ModelParams grads = ZerosLike(prob.model.params);
  GradCheckReport report;
  report.loss = ComputeBatchLoss(prob.model, prob.batch, prob.options, &grads).loss.total;

  auto tensors = prob.model.params.Tensors();
  auto grad_tensors = grads.Tensors();
  std::vector<size_t> chosen;
  for (size_t i = 0; i < tensors.size(); ++i) {
    const std::string& name = tensors[i].first;
    if (opts.head_only && name.rfind("encoder.head.", 0) != 0) continue;
    chosen.push_back(i);
  }
  if (chosen.empty()) Fail("grad check: no tensors selected");

  // Even share per tensor, then top up from the largest tensors.
  Rng rng(DeriveSeed(opts.seed, 104));
  std::vector<std::set<int64_t>> picks(tensors.size());
  const int64_t share =
      (opts.num_coords + static_cast<int64_t>(chosen.size()) - 1) / static_cast<int64_t>(chosen.size());
  int64_t total = 0;
  for (size_t i : chosen) {
    const int64_t n = tensors[i].second->size();
    const int64_t want = std::min(share, n);
    while (static_cast<int64_t>(picks[i].size()) < want) picks[i].insert(rng.UniformInt(0, n - 1));
    total += want;
  }
  while (total < opts.num_coords) {
    bool added = false;
    for (size_t i : chosen) {
      const int64_t n = tensors[i].second->size();
      if (static_cast<int64_t>(picks[i].size()) >= n) continue;
      const size_t before = picks[i].size();
      while (picks[i].size() == before) picks[i].insert(rng.UniformInt(0, n - 1));
      added = true;
      if (++total >= opts.num_coords) break;
    }
    if (!added) break;
  }

  for (size_t i : chosen) {
    report.tensors.push_back(tensors[i].first);
    Mat& p = *tensors[i].second;
    for (int64_t j : picks[i]) {
      const double saved = p.data()[j];
      p.data()[j] = saved + opts.step;
      const double up = ComputeBatchLoss(prob.model, prob.batch, prob.options, nullptr).loss.total;
      p.data()[j] = saved - opts.step;
      const double down = ComputeBatchLoss(prob.model, prob.batch, prob.options, nullptr).loss.total;
      p.data()[j] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double analytic = grad_tensors[i].second->data()[j];
      const double abs_err = std::abs(analytic - numeric);
      const double rel =
          abs_err / std::max({std::abs(analytic), std::abs(numeric), opts.floor});
      report.coords.push_back({tensors[i].first, j, analytic, numeric, rel});
      report.max_rel_error = std::max(report.max_rel_error, rel);
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
    }
  }
  return report;
}

Json GradCheckReportToJson(const GradCheckReport& r) {
  Json j;
  j["max_rel_error"] = r.max_rel_error;
  j["max_abs_error"] = r.max_abs_error;
  j["num_coords"] = r.coords.size();
  j["loss"] = r.loss;
  j["tensors"] = r.tensors;
  Json worst = Json::array();
  std::vector<GradCheckCoord> sorted = r.coords;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.rel_error > b.rel_error; });
  for (size_t i = 0; i < std::min<size_t>(5, sorted.size()); ++i)
    worst.push_back({{"tensor", sorted[i].tensor},
                     {"index", sorted[i].index},
                     {"analytic", sorted[i].analytic},
                     {"numeric", sorted[i].numeric},
                     {"rel_error", sorted[i].rel_error}});
  j["worst"] = worst;
  return j;
}

}  // namespace spkpt
