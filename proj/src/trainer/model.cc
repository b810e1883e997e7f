// trainer/model.cc
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

#include "trainer/model.h"

#include <cmath>

#include "base/error.h"

namespace spkpt {

void ModelParams::Visit(const ParamVisitor& f) {
  encoder.Visit("encoder", f);
  quantizer.Visit("quantizer", f);
}

std::vector<std::pair<std::string, Mat*>> ModelParams::Tensors() {
  std::vector<std::pair<std::string, Mat*>> out;
  Visit([&](const std::string& name, Mat& m) { out.emplace_back(name, &m); });
  return out;
}

std::vector<std::pair<std::string, const Mat*>> ModelParams::Tensors() const {
  std::vector<std::pair<std::string, const Mat*>> out;
  for (auto& [name, m] : const_cast<ModelParams*>(this)->Tensors()) out.emplace_back(name, m);
  return out;
}

size_t ModelParams::NumScalars() const {
  size_t n = 0;
  for (const auto& [name, m] : Tensors()) n += static_cast<size_t>(m->size());
  return n;
}

ModelParams ZerosLike(const ModelParams& p) {
  ModelParams z = p;
  z.Visit([](const std::string&, Mat& m) { m.setZero(); });
  return z;
}

Model InitModel(const EncoderConfig& enc, QuantizerConfig quant, uint64_t seed) {
  enc.Validate();
  quant.input_dim = enc.model_dim;
  quant.output_dim = enc.model_dim;
  quant.Validate();
  Model m;
  m.encoder_cfg = enc;
  m.quantizer_cfg = quant;
  Rng enc_rng(DeriveSeed(seed, 1));
  Rng quant_rng(DeriveSeed(seed, 2));
  m.params.encoder = InitEncoder(enc, &enc_rng);
  m.params.quantizer = InitQuantizer(quant, &quant_rng);
  return m;
}

Mat NormalizeInput(const Model& model, const Mat& input) {
  if (model.input_mean.size() == 0) return input;
  if (input.cols() != model.input_mean.cols())
    Fail("input has {} columns, normalization expects {}", input.cols(), model.input_mean.cols());
  Mat out = input;
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    out.row(r) = (out.row(r) - model.input_mean).cwiseProduct(model.input_scale);
  return out;
}

void SetInputStats(Model* model, const Mat& frames) {
  if (frames.rows() < 2) Fail("input statistics need at least 2 frames");
  const double n = double(frames.rows());
  model->input_mean = frames.colwise().sum() / n;
  model->input_scale.resize(1, frames.cols());
  for (Eigen::Index c = 0; c < frames.cols(); ++c) {
    double ss = 0.0;
    for (Eigen::Index r = 0; r < frames.rows(); ++r) {
      const double d = frames(r, c) - model->input_mean(0, c);
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    model->input_scale(0, c) = sd < 1e-8 ? 1.0 : 1.0 / sd;
  }
}

}  // namespace spkpt
