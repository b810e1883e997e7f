// quantizer/gumbel-quantizer-test.cc
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
#include "quantizer/gumbel-quantizer.h"

namespace spkpt {
namespace {

QuantizerConfig Small() {
  QuantizerConfig c;
  c.groups = 2;
  c.entries = 5;
  c.input_dim = 6;
  c.output_dim = 7;
  c.entry_dim = 3;
  return c;
}

Mat RandomMat(Eigen::Index r, Eigen::Index c, Rng* rng, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng->Gaussian();
  return m;
}

TEST_CASE("probability rows sum to one") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat logits = RandomMat(4, 32, &rng, 10.0);
    const Mat noise = SampleGumbelNoise(4, 32, &rng);
    for (double tau : {0.05, 0.5, 1.0, 2.0, 50.0}) {
      const Mat p = GumbelProbs(logits, tau, noise);
      for (Eigen::Index g = 0; g < 4; ++g) CHECK(std::fabs(p.row(g).sum() - 1.0) < 1e-6);
      CHECK(p.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("probabilities match an extended-precision oracle") {
  Rng rng(2);
  const Mat logits = RandomMat(2, 6, &rng, 3.0), noise = SampleGumbelNoise(2, 6, &rng);
  const double tau = 0.7;
  const Mat p = GumbelProbs(logits, tau, noise);
  for (Eigen::Index g = 0; g < 2; ++g) {
    long double s = 0;
    for (Eigen::Index v = 0; v < 6; ++v) s += std::exp(((long double)logits(g, v) + noise(g, v)) / tau);
    for (Eigen::Index v = 0; v < 6; ++v)
      CHECK(std::fabs(p(g, v) - double(std::exp(((long double)logits(g, v) + noise(g, v)) / tau) / s)) <
            1e-15);
  }
}

TEST_CASE("max probability is non-increasing in tau") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat logits = RandomMat(3, 8, &rng, 2.0), noise = SampleGumbelNoise(3, 8, &rng);
    RowVec prev = RowVec::Constant(3, 2.0);
    for (double tau = 0.05; tau < 20.0; tau *= 1.3) {
      const Mat p = GumbelProbs(logits, tau, noise);
      for (Eigen::Index g = 0; g < 3; ++g) {
        CHECK(p.row(g).maxCoeff() <= prev(g) + 1e-15);
        prev(g) = p.row(g).maxCoeff();
      }
    }
  }
}

TEST_CASE("gumbel noise has the standard mean and variance") {
  Rng rng(4);
  const Mat n = SampleGumbelNoise(1, 200000, &rng);
  const double mean = n.mean();
  const double var = (n.array() - mean).square().mean();
  CHECK(std::fabs(mean - 0.5772156649) < 0.01);
  CHECK(std::fabs(var - M_PI * M_PI / 6.0) < 0.03);
}

TEST_CASE("straight-through forward uses the argmax entries") {
  const QuantizerConfig cfg = Small();
  Rng rng(5);
  const QuantizerParams p = InitQuantizer(cfg, &rng);
  const Mat latent = RandomMat(6, 6, &rng);
  const QuantizeOutput out = Quantize(latent, p, cfg, 0.8, 77, true);
  for (Eigen::Index t = 0; t < 6; ++t) {
    RowVec concat(cfg.groups * cfg.entry_dim);
    for (int g = 0; g < cfg.groups; ++g) {
      const RowVec z = out.logits.block(t, g * 5, 1, 5) + out.noise.block(t, g * 5, 1, 5);
      Eigen::Index arg;
      z.maxCoeff(&arg);
      CHECK(out.hard_indices[static_cast<size_t>(t * cfg.groups + g)] == arg);
      // The argmax of the perturbed logits is also the argmax of the probabilities.
      Eigen::Index prow, parg;
      out.probs.block(t, g * 5, 1, 5).maxCoeff(&prow, &parg);
      CHECK(parg == arg);
      concat.segment(g * 3, 3) = p.codebook.row(g * 5 + arg);
    }
    const RowVec expect = concat * p.proj_out.w + p.proj_out.b;
    CHECK((out.q.row(t) - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("soft mode forward is the probability-weighted codebook") {
  const QuantizerConfig cfg = Small();
  Rng rng(6);
  const QuantizerParams p = InitQuantizer(cfg, &rng);
  const Mat latent = RandomMat(3, 6, &rng);
  const QuantizeOutput out = Quantize(latent, p, cfg, 1.3, 5, false);
  for (Eigen::Index t = 0; t < 3; ++t)
    for (int g = 0; g < cfg.groups; ++g) {
      RowVec e = RowVec::Zero(3);
      for (int v = 0; v < 5; ++v) e += out.probs(t, g * 5 + v) * p.codebook.row(g * 5 + v);
      CHECK((out.concat.block(t, g * 3, 1, 3) - e).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("frame noise depends only on the seed and the frame index") {
  const QuantizerConfig cfg = Small();
  Rng rng(7);
  const QuantizerParams p = InitQuantizer(cfg, &rng);
  const Mat latent = RandomMat(5, 6, &rng);
  const QuantizeOutput all = Quantize(latent, p, cfg, 1.0, 9, true);
  const QuantizeOutput again = Quantize(latent, p, cfg, 1.0, 9, true);
  CHECK(all.q == again.q);
  const QuantizeOutput head = Quantize(latent.topRows(3), p, cfg, 1.0, 9, true);
  CHECK(head.noise == all.noise.topRows(3));
  CHECK_FALSE(Quantize(latent, p, cfg, 1.0, 10, true).noise == all.noise);
}

TEST_CASE("temperature anneal endpoints and geometric midpoint") {
  QuantizerConfig cfg;
  CHECK(cfg.Temperature(0, 300) == 2.0);
  CHECK(std::fabs(cfg.Temperature(299, 300) - 0.5) < 1e-15);
  const double mid = cfg.Temperature(1, 3);
  CHECK(std::fabs(mid - 1.0) < 1e-15);
  CHECK(cfg.Temperature(0, 1) == 2.0);
}

TEST_CASE("soft-mode backward matches finite differences") {
  const QuantizerConfig cfg = Small();
  Rng rng(8);
  QuantizerParams p = InitQuantizer(cfg, &rng);
  const Mat latent = RandomMat(4, 6, &rng);
  const Mat wq = RandomMat(4, 7, &rng), wp = RandomMat(4, 10, &rng);
  auto loss = [&](const QuantizerParams& q, const Mat& l) {
    const QuantizeOutput o = Quantize(l, q, cfg, 0.9, 3, false);
    return o.q.cwiseProduct(wq).sum() + o.probs.cwiseProduct(wp).sum();
  };
  const QuantizeOutput out = Quantize(latent, p, cfg, 0.9, 3, false);
  QuantizerParams g = p;
  g.Visit("q", [](const std::string&, Mat& m) { m.setZero(); });
  const Mat dl = QuantizeBackward(latent, out, p, cfg, wq, wp, &g);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < latent.size(); ++i) {
    Mat up = latent, down = latent;
    up.data()[i] += h;
    down.data()[i] -= h;
    CHECK(std::fabs((loss(p, up) - loss(p, down)) / (2 * h) - dl.data()[i]) < 1e-7);
  }
  std::vector<Mat*> ps, gs;
  p.Visit("q", [&](const std::string&, Mat& m) { ps.push_back(&m); });
  g.Visit("q", [&](const std::string&, Mat& m) { gs.push_back(&m); });
  for (size_t k = 0; k < ps.size(); ++k)
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(ps[k]->size(), 8); ++i) {
      const double saved = ps[k]->data()[i];
      ps[k]->data()[i] = saved + h;
      const double up = loss(p, latent);
      ps[k]->data()[i] = saved - h;
      const double down = loss(p, latent);
      ps[k]->data()[i] = saved;
      CHECK(std::fabs((up - down) / (2 * h) - gs[k]->data()[i]) < 1e-7);
    }
}

TEST_CASE("usage statistics average probabilities over frames") {
  const QuantizerConfig cfg = Small();
  Rng rng(9);
  const QuantizerParams p = InitQuantizer(cfg, &rng);
  std::vector<QuantizeOutput> outs{Quantize(RandomMat(3, 6, &rng), p, cfg, 1.0, 1, true),
                                   Quantize(RandomMat(5, 6, &rng), p, cfg, 1.0, 2, true)};
  const Mat u = UsageStats(outs, 2, 5);
  CHECK(u.rows() == 2);
  CHECK(u.cols() == 5);
  RowVec sum = RowVec::Zero(10);
  for (const auto& o : outs)
    for (Eigen::Index t = 0; t < o.probs.rows(); ++t) sum += o.probs.row(t);
  sum /= 8.0;
  for (int g = 0; g < 2; ++g) {
    CHECK(std::fabs(u.row(g).sum() - 1.0) < 1e-12);
    for (int v = 0; v < 5; ++v) CHECK(std::fabs(u(g, v) - sum(g * 5 + v)) < 1e-15);
  }
  const Json j = UsageToJson(u);
  CHECK(j.size() == 2);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(GumbelProbs(Mat::Zero(2, 3), 0.0, Mat::Zero(2, 3)), Error);
  CHECK_THROWS_AS(GumbelProbs(Mat::Zero(2, 3), 1.0, Mat::Zero(2, 4)), Error);
  Mat bad = Mat::Zero(2, 3);
  bad(0, 0) = INFINITY;
  CHECK_THROWS_AS(GumbelProbs(bad, 1.0, Mat::Zero(2, 3)), Error);
}

}  // namespace
}  // namespace spkpt
