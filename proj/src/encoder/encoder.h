// encoder/encoder.h
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

#ifndef SPKPT_ENCODER_ENCODER_H_
#define SPKPT_ENCODER_ENCODER_H_

#include <string>
#include <vector>

#include "base/io.h"
#include "base/matrix.h"
#include "base/rng.h"
#include "encoder/masking.h"
#include "encoder/nn-ops.h"

namespace spkpt {

struct EncoderConfig {
  int input_dim = 39;  // feature dim D; 1 for the waveform front end
  int model_dim = 64;
  int num_layers = 4;
  int num_heads = 4;
  int ffn_dim = 128;
  int tap_layer = 2;  // 0 = projected (corrupted) input
  int num_classes = 16;
  int mask_span = 10;
  double mask_start_prob = 0.08;
  std::string front_end = "precomputed";  // or "conv"
  // Strided convolution front end: receptive field 400 samples, stride 160,
  // so it yields exactly as many frames as the default MFCC framing.
  std::vector<int> conv_channels = {16, 32, 32};
  std::vector<int> conv_kernels = {5, 4, 20};
  std::vector<int> conv_strides = {5, 4, 8};

  void Validate() const;
  bool UsesConv() const { return front_end == "conv"; }
  int ProjectionInputDim() const;
};

void to_json(Json& j, const EncoderConfig& c);
void from_json(const Json& j, EncoderConfig& c);

struct TransformerLayerParams {
  LayerNormParams attn_norm;
  LinearParams query, key, value, attn_out;
  LayerNormParams ffn_norm;
  LinearParams ffn_in, ffn_out;

  void Visit(const std::string& prefix, const ParamVisitor& f);
};

struct EncoderParams {
  std::vector<LinearParams> conv;  // patch (kernel*in_ch) -> out_ch
  LinearParams proj;
  Mat mask_embedding;  // 1 x d
  std::vector<TransformerLayerParams> layers;
  LayerNormParams final_norm;
  LinearParams head;  // d -> num_classes

  void Visit(const std::string& prefix, const ParamVisitor& f);
};

EncoderParams InitEncoder(const EncoderConfig& cfg, Rng* rng);

struct ConvTrace {
  Eigen::Index in_len = 0;
  Mat patches;
  Mat pre;
};

struct LayerTrace {
  Mat input;
  LayerNormCache attn_norm;
  Mat normed_attn;
  Mat q, k, v;
  std::vector<Mat> attn;  // per head, T x T
  Mat context;
  Mat mid;
  LayerNormCache ffn_norm;
  Mat normed_ffn;
  Mat ffn_pre;
  Mat ffn_act;
};

struct EncoderTrace {
  std::vector<ConvTrace> conv;
  Mat proj_input;
  std::vector<LayerTrace> layers;
  LayerNormCache final_norm;
  Mat final_normed;
  MaskSet mask;
};

struct EncoderOutput {
  Mat tap;             // T x d at the tap layer
  Mat final;           // T x d, top of the residual stream
  Mat content_logits;  // T x num_classes
  MaskSet mask;
  std::vector<Mat> hidden;  // N + 1 states; hidden[0] is the corrupted projection
};

/// Frames the encoder produces for an input of `input_rows` rows.
int EncoderFrames(const EncoderConfig& cfg, Eigen::Index input_rows);

/// project -> corrupt -> pre-norm transformer layers (sinusoidal positions
/// added at the first layer input) -> final norm -> linear content head.
/// `input` is T x input_dim features, or N x 1 samples for the conv front
/// end. Utterances are processed independently.
EncoderOutput EncoderForward(const EncoderConfig& cfg, const EncoderParams& params,
                             const Mat& input, const MaskSet& mask,
                             EncoderTrace* trace = nullptr);

/// Accumulates parameter gradients for dL/dlogits and an optional dL/dtap.
void EncoderBackward(const EncoderConfig& cfg, const EncoderParams& params,
                     const EncoderTrace& trace, const Mat& d_logits, const Mat* d_tap,
                     EncoderParams* grads);

}  // namespace spkpt

#endif  // SPKPT_ENCODER_ENCODER_H_
