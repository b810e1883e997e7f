// trainer/model.h
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

#ifndef SPKPT_TRAINER_MODEL_H_
#define SPKPT_TRAINER_MODEL_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "encoder/encoder.h"
#include "quantizer/gumbel-quantizer.h"

namespace spkpt {

struct ModelParams {
  EncoderParams encoder;
  QuantizerParams quantizer;

  void Visit(const ParamVisitor& f);
  /// Named views of every tensor, in a fixed order.
  std::vector<std::pair<std::string, Mat*>> Tensors();
  std::vector<std::pair<std::string, const Mat*>> Tensors() const;
  size_t NumScalars() const;
};

/// Same shapes, all zeros.
ModelParams ZerosLike(const ModelParams& p);

/// Encoder, quantizer and the parameters they share a lifetime with.
struct Model {
  EncoderConfig encoder_cfg;
  QuantizerConfig quantizer_cfg;
  ModelParams params;
  // Fixed per-dimension input standardization (1 x input_dim); empty = none.
  Mat input_mean;
  Mat input_scale;
};

/// (x - mean) * scale per row, or x unchanged when no statistics are set.
Mat NormalizeInput(const Model& model, const Mat& input);

/// Sets mean and inverse standard deviation from stacked frames
/// (dimensions with std below 1e-8 get scale 1).
void SetInputStats(Model* model, const Mat& frames);

/// Quantizer input/output dims are tied to the encoder model dim.
Model InitModel(const EncoderConfig& enc, QuantizerConfig quant, uint64_t seed);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_MODEL_H_
