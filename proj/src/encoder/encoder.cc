// encoder/encoder.cc
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

#include "encoder/encoder.h"

#include <cmath>

#include "base/error.h"

namespace spkpt {

void EncoderConfig::Validate() const {
  if (model_dim < 1 || num_heads < 1 || model_dim % num_heads != 0)
    Fail("encoder: num_heads ({}) must divide model_dim ({})", num_heads, model_dim);
  if (num_layers < 0) Fail("encoder: num_layers must be >= 0");
  if (tap_layer < 0 || tap_layer > num_layers)
    Fail("encoder: tap_layer {} outside [0, {}]", tap_layer, num_layers);
  if (num_layers > 0 && tap_layer == 0)
    Fail("encoder: tap_layer 0 is only meaningful with num_layers = 0");
  if (mask_span < 1) Fail("encoder: mask_span must be >= 1");
  if (!(mask_start_prob >= 0.0 && mask_start_prob <= 1.0))
    Fail("encoder: mask_start_prob {} outside [0, 1]", mask_start_prob);
  if (ffn_dim < 1 || num_classes < 1 || input_dim < 1)
    Fail("encoder: ffn_dim, num_classes and input_dim must be >= 1");
  if (front_end != "precomputed" && front_end != "conv")
    Fail("encoder: front_end must be 'precomputed' or 'conv', got '{}'", front_end);
  if (UsesConv()) {
    if (input_dim != 1) Fail("encoder: the conv front end consumes raw samples (input_dim 1)");
    if (conv_channels.empty() || conv_channels.size() != conv_kernels.size() ||
        conv_channels.size() != conv_strides.size())
      Fail("encoder: conv channel/kernel/stride lists must be non-empty and equally long");
  }
}

int EncoderConfig::ProjectionInputDim() const {
  return UsesConv() ? conv_channels.back() : input_dim;
}

void to_json(Json& j, const EncoderConfig& c) {
  j = Json{{"input_dim", c.input_dim},         {"model_dim", c.model_dim},
           {"num_layers", c.num_layers},       {"num_heads", c.num_heads},
           {"ffn_dim", c.ffn_dim},             {"tap_layer", c.tap_layer},
           {"num_classes", c.num_classes},     {"mask_span", c.mask_span},
           {"mask_start_prob", c.mask_start_prob}, {"front_end", c.front_end},
           {"conv_channels", c.conv_channels}, {"conv_kernels", c.conv_kernels},
           {"conv_strides", c.conv_strides}};
}

void from_json(const Json& j, EncoderConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "input_dim") c.input_dim = it->get<int>();
    else if (key == "model_dim") c.model_dim = it->get<int>();
    else if (key == "num_layers") c.num_layers = it->get<int>();
    else if (key == "num_heads") c.num_heads = it->get<int>();
    else if (key == "ffn_dim") c.ffn_dim = it->get<int>();
    else if (key == "tap_layer") c.tap_layer = it->get<int>();
    else if (key == "num_classes") c.num_classes = it->get<int>();
    else if (key == "mask_span") c.mask_span = it->get<int>();
    else if (key == "mask_start_prob") c.mask_start_prob = it->get<double>();
    else if (key == "front_end") c.front_end = it->get<std::string>();
    else if (key == "conv_channels") c.conv_channels = it->get<std::vector<int>>();
    else if (key == "conv_kernels") c.conv_kernels = it->get<std::vector<int>>();
    else if (key == "conv_strides") c.conv_strides = it->get<std::vector<int>>();
    else Fail("unknown encoder config key '{}'", key);
  }
}

void TransformerLayerParams::Visit(const std::string& prefix, const ParamVisitor& f) {
  attn_norm.Visit(prefix + ".attn_norm", f);
  query.Visit(prefix + ".query", f);
  key.Visit(prefix + ".key", f);
  value.Visit(prefix + ".value", f);
  attn_out.Visit(prefix + ".attn_out", f);
  ffn_norm.Visit(prefix + ".ffn_norm", f);
  ffn_in.Visit(prefix + ".ffn_in", f);
  ffn_out.Visit(prefix + ".ffn_out", f);
}

void EncoderParams::Visit(const std::string& prefix, const ParamVisitor& f) {
  for (size_t i = 0; i < conv.size(); ++i) conv[i].Visit(prefix + ".conv" + std::to_string(i), f);
  proj.Visit(prefix + ".proj", f);
  f(prefix + ".mask_embedding", mask_embedding);
  for (size_t i = 0; i < layers.size(); ++i)
    layers[i].Visit(prefix + ".layer" + std::to_string(i), f);
  final_norm.Visit(prefix + ".final_norm", f);
  head.Visit(prefix + ".head", f);
}

EncoderParams InitEncoder(const EncoderConfig& cfg, Rng* rng) {
  cfg.Validate();
  EncoderParams p;
  const int d = cfg.model_dim;
  if (cfg.UsesConv()) {
    int in_ch = cfg.input_dim;
    for (size_t i = 0; i < cfg.conv_channels.size(); ++i) {
      p.conv.push_back(InitLinear(cfg.conv_kernels[i] * in_ch, cfg.conv_channels[i], rng));
      in_ch = cfg.conv_channels[i];
    }
  }
  p.proj = InitLinear(cfg.ProjectionInputDim(), d, rng);
  p.mask_embedding.resize(1, d);
  for (int i = 0; i < d; ++i) p.mask_embedding(0, i) = rng->Uniform();
  for (int l = 0; l < cfg.num_layers; ++l) {
    TransformerLayerParams layer;
    layer.attn_norm = InitLayerNorm(d);
    layer.query = InitLinear(d, d, rng);
    layer.key = InitLinear(d, d, rng);
    layer.value = InitLinear(d, d, rng);
    layer.attn_out = InitLinear(d, d, rng);
    layer.ffn_norm = InitLayerNorm(d);
    layer.ffn_in = InitLinear(d, cfg.ffn_dim, rng);
    layer.ffn_out = InitLinear(cfg.ffn_dim, d, rng);
    p.layers.push_back(std::move(layer));
  }
  p.final_norm = InitLayerNorm(d);
  p.head = InitLinear(d, cfg.num_classes, rng);
  return p;
}

int EncoderFrames(const EncoderConfig& cfg, Eigen::Index input_rows) {
  if (!cfg.UsesConv()) return static_cast<int>(input_rows);
  Eigen::Index len = input_rows;
  for (size_t i = 0; i < cfg.conv_kernels.size(); ++i) {
    if (len < cfg.conv_kernels[i]) return 0;
    len = (len - cfg.conv_kernels[i]) / cfg.conv_strides[i] + 1;
  }
  return static_cast<int>(len);
}

namespace {

Mat Im2Col(const Mat& x, int kernel, int stride) {
  const Eigen::Index out_len = (x.rows() - kernel) / stride + 1;
  const Eigen::Index ch = x.cols();
  Mat patches(out_len, kernel * ch);
  for (Eigen::Index t = 0; t < out_len; ++t)
    for (int k = 0; k < kernel; ++k)
      patches.block(t, k * ch, 1, ch) = x.row(t * stride + k);
  return patches;
}

Mat Col2Im(const Mat& d_patches, Eigen::Index in_len, Eigen::Index ch, int kernel, int stride) {
  Mat dx = Mat::Zero(in_len, ch);
  for (Eigen::Index t = 0; t < d_patches.rows(); ++t)
    for (int k = 0; k < kernel; ++k)
      dx.row(t * stride + k) += d_patches.block(t, k * ch, 1, ch);
  return dx;
}

void CheckFinite(const Mat& m, const char* what, int layer) {
  if (!m.allFinite()) Fail("encoder: non-finite activations in {} (layer {})", what, layer);
}

Mat LayerForward(const EncoderConfig& cfg, const TransformerLayerParams& p, const Mat& x,
                 LayerTrace* tr) {
  const int d = cfg.model_dim;
  const int heads = cfg.num_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));
  tr->input = x;
  tr->normed_attn = LayerNormForward(p.attn_norm, x, &tr->attn_norm);
  tr->q = LinearForward(p.query, tr->normed_attn);
  tr->k = LinearForward(p.key, tr->normed_attn);
  tr->v = LinearForward(p.value, tr->normed_attn);
  tr->context.resize(x.rows(), d);
  tr->attn.resize(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const auto qh = tr->q.middleCols(h * dh, dh);
    const auto kh = tr->k.middleCols(h * dh, dh);
    const auto vh = tr->v.middleCols(h * dh, dh);
    tr->attn[h] = SoftmaxRows((qh * kh.transpose()) * scale);
    tr->context.middleCols(h * dh, dh) = tr->attn[h] * vh;
  }
  tr->mid = x + LinearForward(p.attn_out, tr->context);
  tr->normed_ffn = LayerNormForward(p.ffn_norm, tr->mid, &tr->ffn_norm);
  tr->ffn_pre = LinearForward(p.ffn_in, tr->normed_ffn);
  tr->ffn_act = Gelu(tr->ffn_pre);
  return tr->mid + LinearForward(p.ffn_out, tr->ffn_act);
}

Mat LayerBackward(const EncoderConfig& cfg, const TransformerLayerParams& p, const LayerTrace& tr,
                  const Mat& dy, TransformerLayerParams* g) {
  const int d = cfg.model_dim;
  const int heads = cfg.num_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));

  Mat d_mid = dy;
  const Mat d_act = LinearBackward(p.ffn_out, tr.ffn_act, dy, &g->ffn_out);
  const Mat d_pre = d_act.cwiseProduct(GeluGrad(tr.ffn_pre));
  const Mat d_normed_ffn = LinearBackward(p.ffn_in, tr.normed_ffn, d_pre, &g->ffn_in);
  d_mid += LayerNormBackward(p.ffn_norm, tr.ffn_norm, d_normed_ffn, &g->ffn_norm);

  Mat dx = d_mid;
  const Mat d_context = LinearBackward(p.attn_out, tr.context, d_mid, &g->attn_out);
  Mat dq(tr.q.rows(), d), dk(tr.k.rows(), d), dv(tr.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const auto qh = tr.q.middleCols(h * dh, dh);
    const auto kh = tr.k.middleCols(h * dh, dh);
    const auto vh = tr.v.middleCols(h * dh, dh);
    const Mat& a = tr.attn[h];
    const Mat dctx = d_context.middleCols(h * dh, dh);
    const Mat da = dctx * vh.transpose();
    dv.middleCols(h * dh, dh) = a.transpose() * dctx;
    Mat ds(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double dot = da.row(r).dot(a.row(r));
      ds.row(r) = a.row(r).cwiseProduct((da.row(r).array() - dot).matrix());
    }
    dq.middleCols(h * dh, dh) = (ds * kh) * scale;
    dk.middleCols(h * dh, dh) = (ds.transpose() * qh) * scale;
  }
  Mat d_normed = LinearBackward(p.query, tr.normed_attn, dq, &g->query);
  d_normed += LinearBackward(p.key, tr.normed_attn, dk, &g->key);
  d_normed += LinearBackward(p.value, tr.normed_attn, dv, &g->value);
  dx += LayerNormBackward(p.attn_norm, tr.attn_norm, d_normed, &g->attn_norm);
  return dx;
}

}  // namespace

EncoderOutput EncoderForward(const EncoderConfig& cfg, const EncoderParams& params,
                             const Mat& input, const MaskSet& mask, EncoderTrace* trace) {
  EncoderTrace local;
  EncoderTrace* tr = trace ? trace : &local;
  *tr = EncoderTrace{};

  Mat x = input;
  if (cfg.UsesConv()) {
    if (input.cols() != 1) Fail("encoder: conv front end expects N x 1 samples, got {} columns", input.cols());
    if (EncoderFrames(cfg, input.rows()) < 1)
      Fail("encoder: {} samples are too short for the conv front end", input.rows());
    tr->conv.resize(params.conv.size());
    for (size_t i = 0; i < params.conv.size(); ++i) {
      ConvTrace& ct = tr->conv[i];
      ct.in_len = x.rows();
      ct.patches = Im2Col(x, cfg.conv_kernels[i], cfg.conv_strides[i]);
      ct.pre = LinearForward(params.conv[i], ct.patches);
      x = Gelu(ct.pre);
    }
  } else if (input.cols() != cfg.input_dim) {
    Fail("encoder: input dim {} does not match configured input_dim {}", input.cols(),
         cfg.input_dim);
  }
  if (x.rows() < 1) Fail("encoder: input has no frames");
  const int T = static_cast<int>(x.rows());
  for (int t : mask.indices)
    if (t < 0 || t >= T) Fail("encoder: masked index {} outside [0, {})", t, T);

  tr->proj_input = x;
  tr->mask = mask;
  EncoderOutput out;
  out.mask = mask;
  out.hidden.reserve(static_cast<size_t>(cfg.num_layers + 1));
  out.hidden.push_back(Corrupt(LinearForward(params.proj, x), mask, params.mask_embedding));
  CheckFinite(out.hidden[0], "projection", 0);

  tr->layers.resize(static_cast<size_t>(cfg.num_layers));
  for (int l = 0; l < cfg.num_layers; ++l) {
    Mat in = out.hidden.back();
    if (l == 0) in += SinusoidalPositions(T, cfg.model_dim);
    out.hidden.push_back(LayerForward(cfg, params.layers[l], in, &tr->layers[l]));
    CheckFinite(out.hidden.back(), "transformer layer", l + 1);
  }
  out.tap = out.hidden[cfg.tap_layer];
  out.final = out.hidden.back();
  tr->final_normed = LayerNormForward(params.final_norm, out.final, &tr->final_norm);
  out.content_logits = LinearForward(params.head, tr->final_normed);
  CheckFinite(out.content_logits, "content head", cfg.num_layers);
  return out;
}

void EncoderBackward(const EncoderConfig& cfg, const EncoderParams& params,
                     const EncoderTrace& trace, const Mat& d_logits, const Mat* d_tap,
                     EncoderParams* grads) {
  const Mat d_normed = LinearBackward(params.head, trace.final_normed, d_logits, &grads->head);
  Mat d_hidden = LayerNormBackward(params.final_norm, trace.final_norm, d_normed, &grads->final_norm);
  for (int l = cfg.num_layers; l >= 1; --l) {
    if (d_tap && l == cfg.tap_layer) d_hidden += *d_tap;
    d_hidden = LayerBackward(cfg, params.layers[l - 1], trace.layers[l - 1], d_hidden,
                             &grads->layers[l - 1]);
  }
  if (d_tap && cfg.tap_layer == 0) d_hidden += *d_tap;

  // Corruption: masked rows came from the mask embedding, not the projection.
  for (int t : trace.mask.indices) {
    grads->mask_embedding += d_hidden.row(t);
    d_hidden.row(t).setZero();
  }
  Mat dx = LinearBackward(params.proj, trace.proj_input, d_hidden, &grads->proj);
  for (size_t i = params.conv.size(); i-- > 0;) {
    const ConvTrace& ct = trace.conv[i];
    const Mat d_pre = dx.cwiseProduct(GeluGrad(ct.pre));
    const Mat d_patches = LinearBackward(params.conv[i], ct.patches, d_pre, &grads->conv[i]);
    if (i == 0) break;  // no gradient needed for raw samples
    const Eigen::Index in_ch = ct.patches.cols() / cfg.conv_kernels[i];
    dx = Col2Im(d_patches, ct.in_len, in_ch, cfg.conv_kernels[i], cfg.conv_strides[i]);
  }
}

}  // namespace spkpt
