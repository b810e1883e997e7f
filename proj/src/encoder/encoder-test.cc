// encoder/encoder-test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "base/error.h"
#include "base/rng.h"
#include "dsp/mfcc.h"
#include "encoder/encoder.h"

namespace spkpt {
namespace {

EncoderConfig Small() {
  EncoderConfig c;
  c.input_dim = 5;
  c.model_dim = 8;
  c.num_layers = 3;
  c.num_heads = 2;
  c.ffn_dim = 12;
  c.tap_layer = 2;
  c.num_classes = 4;
  return c;
}

Mat RandomMat(Eigen::Index r, Eigen::Index c, Rng* rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng->Gaussian();
  return m;
}

TEST_CASE("config validation") {
  EncoderConfig c = Small();
  CHECK_NOTHROW(c.Validate());
  c.num_heads = 3;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = Small();
  c.tap_layer = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c.tap_layer = 4;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = Small();
  c.front_end = "lstm";
  CHECK_THROWS_AS(c.Validate(), Error);
  c = Small();
  const Json j = c;
  CHECK(j.get<EncoderConfig>().ffn_dim == 12);
  Json bad = j;
  bad["depth"] = 3;
  CHECK_THROWS_AS(bad.get<EncoderConfig>(), Error);
}

TEST_CASE("forward shapes and hidden-state bookkeeping") {
  const EncoderConfig cfg = Small();
  Rng rng(1);
  const EncoderParams p = InitEncoder(cfg, &rng);
  const Mat x = RandomMat(9, 5, &rng);
  const MaskSet mask = MaskSet::FromIndices({2, 3, 7});
  const EncoderOutput out = EncoderForward(cfg, p, x, mask);
  CHECK(out.hidden.size() == 4);
  CHECK(out.tap == out.hidden[2]);
  CHECK(out.final == out.hidden[3]);
  CHECK(out.content_logits.rows() == 9);
  CHECK(out.content_logits.cols() == 4);
  for (int t : mask.indices) CHECK(out.hidden[0].row(t) == p.mask_embedding);
  const Mat proj = LinearForward(p.proj, x);
  for (int t : {0, 1, 4, 5, 6, 8}) CHECK(out.hidden[0].row(t) == proj.row(t));
}

TEST_CASE("masked input rows do not influence the output") {
  const EncoderConfig cfg = Small();
  Rng rng(2);
  const EncoderParams p = InitEncoder(cfg, &rng);
  Mat x = RandomMat(7, 5, &rng);
  const MaskSet mask = MaskSet::FromIndices({1, 5});
  const EncoderOutput a = EncoderForward(cfg, p, x, mask);
  x.row(1) *= 100.0;
  x.row(5).setConstant(-3.0);
  const EncoderOutput b = EncoderForward(cfg, p, x, mask);
  CHECK(a.content_logits == b.content_logits);
}

TEST_CASE("initialization is seeded") {
  const EncoderConfig cfg = Small();
  Rng a(5), b(5), c(6);
  EncoderParams pa = InitEncoder(cfg, &a), pb = InitEncoder(cfg, &b), pc = InitEncoder(cfg, &c);
  std::vector<Mat> va, vb, vc;
  pa.Visit("e", [&](const std::string&, Mat& m) { va.push_back(m); });
  pb.Visit("e", [&](const std::string&, Mat& m) { vb.push_back(m); });
  pc.Visit("e", [&](const std::string&, Mat& m) { vc.push_back(m); });
  CHECK(va == vb);
  CHECK_FALSE(va == vc);
}

TEST_CASE("backward matches finite differences on every tensor") {
  EncoderConfig cfg = Small();
  Rng rng(3);
  EncoderParams p = InitEncoder(cfg, &rng);
  p.Visit("e", [&](const std::string&, Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 0.1 * rng.Gaussian();
  });
  const Mat x = RandomMat(6, 5, &rng);
  const MaskSet mask = MaskSet::FromIndices({0, 3});
  const Mat w_logits = RandomMat(6, 4, &rng), w_tap = RandomMat(6, 8, &rng);
  auto loss = [&](const EncoderParams& q) {
    const EncoderOutput o = EncoderForward(cfg, q, x, mask);
    return o.content_logits.cwiseProduct(w_logits).sum() + o.tap.cwiseProduct(w_tap).sum();
  };
  EncoderTrace tr;
  EncoderForward(cfg, p, x, mask, &tr);
  EncoderParams g = p;
  g.Visit("e", [](const std::string&, Mat& m) { m.setZero(); });
  EncoderBackward(cfg, p, tr, w_logits, &w_tap, &g);

  std::vector<Mat*> params, grads;
  std::vector<std::string> names;
  p.Visit("e", [&](const std::string& n, Mat& m) {
    params.push_back(&m);
    names.push_back(n);
  });
  g.Visit("e", [&](const std::string&, Mat& m) { grads.push_back(&m); });
  const double h = 1e-5;
  for (size_t i = 0; i < params.size(); ++i) {
    Mat& m = *params[i];
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(m.size(), 6); ++j) {
      const double saved = m.data()[j];
      m.data()[j] = saved + h;
      const double up = loss(p);
      m.data()[j] = saved - h;
      const double down = loss(p);
      m.data()[j] = saved;
      const double fd = (up - down) / (2 * h);
      const double an = grads[i]->data()[j];
      INFO(names[i] << "[" << j << "] fd=" << fd << " analytic=" << an);
      CHECK(std::fabs(fd - an) <= 1e-6 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("conv front end matches the MFCC framing") {
  EncoderConfig cfg;
  cfg.front_end = "conv";
  cfg.input_dim = 1;
  MfccConfig mfcc;
  for (Eigen::Index n : {400, 401, 559, 560, 8000, 16000, 12345})
    CHECK(EncoderFrames(cfg, n) == NumFrames(static_cast<size_t>(n), mfcc));
  CHECK(EncoderFrames(cfg, 399) == 0);
}

TEST_CASE("conv front end forward runs on raw samples") {
  EncoderConfig cfg;
  cfg.front_end = "conv";
  cfg.input_dim = 1;
  cfg.model_dim = 8;
  cfg.num_heads = 2;
  cfg.num_layers = 1;
  cfg.tap_layer = 1;
  cfg.ffn_dim = 8;
  Rng rng(4);
  const EncoderParams p = InitEncoder(cfg, &rng);
  const Mat x = RandomMat(1600, 1, &rng);
  const EncoderOutput out = EncoderForward(cfg, p, x, MaskSet::FromIndices({1}));
  CHECK(out.content_logits.rows() == 8);
  CHECK_THROWS_AS(EncoderForward(cfg, p, RandomMat(100, 1, &rng), MaskSet{}), Error);
}

TEST_CASE("input checks") {
  const EncoderConfig cfg = Small();
  Rng rng(5);
  const EncoderParams p = InitEncoder(cfg, &rng);
  CHECK_THROWS_AS(EncoderForward(cfg, p, RandomMat(4, 6, &rng), MaskSet{}), Error);
  CHECK_THROWS_AS(EncoderForward(cfg, p, RandomMat(4, 5, &rng), MaskSet::FromIndices({4})), Error);
  Mat bad = RandomMat(4, 5, &rng);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(EncoderForward(cfg, p, bad, MaskSet{}), Error);
}

}  // namespace
}  // namespace spkpt
