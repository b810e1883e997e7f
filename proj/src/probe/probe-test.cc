// probe/probe-test.cc
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "base/error.h"
#include "base/rng.h"
#include "corpus/corpus.h"
#include "probe/probe.h"
#include "trainer/model.h"

namespace spkpt {
namespace {

Mat Gaussian(Eigen::Index r, Eigen::Index c, Rng* rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng->Gaussian();
  return m;
}

// Leave-one-out nearest centroid written out directly from its definition.
double NaiveSeparability(const Mat& x, const std::vector<int>& cls) {
  std::vector<int> labels = cls;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  int correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c : labels) {
      RowVec sum = RowVec::Zero(x.cols());
      int count = 0;
      for (Eigen::Index j = 0; j < x.rows(); ++j)
        if (j != i && cls[size_t(j)] == c) {
          sum += x.row(j);
          ++count;
        }
      const double d = (x.row(i) - sum / count).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == cls[size_t(i)]) ++correct;
  }
  return double(correct) / double(x.rows());
}

std::vector<int> Classes(int S, int per) {
  std::vector<int> c;
  for (int s = 0; s < S; ++s)
    for (int u = 0; u < per; ++u) c.push_back(s);
  return c;
}

TEST_CASE("separability matches the naive oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cls = Classes(2 + trial % 4, 2 + trial % 3);
    Mat x = Gaussian(static_cast<Eigen::Index>(cls.size()), 3, &rng);
    for (size_t i = 0; i < cls.size(); ++i) x(Eigen::Index(i), 0) += 0.8 * cls[i];
    CHECK(SpeakerSeparability(x, cls) == NaiveSeparability(x, cls));
  }
}

TEST_CASE("separated clusters score one and collapsed ones fall to the lowest class") {
  const auto cls = Classes(3, 4);
  Mat x(12, 2);
  for (int i = 0; i < 12; ++i) x.row(i) << 10.0 * cls[size_t(i)], 0.01 * i;
  CHECK(SpeakerSeparability(x, cls) == 1.0);
  // All points identical: every distance ties, so everything is assigned class 0.
  CHECK(SpeakerSeparability(Mat::Zero(12, 2), cls) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("separability on structureless embeddings sits near chance") {
  Rng rng(2);
  const int S = 4;
  const auto cls = Classes(S, 50);
  double sum = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) sum += SpeakerSeparability(Gaussian(200, 4, &rng), cls);
  CHECK(std::fabs(sum / trials - 1.0 / S) < 0.02);
}

TEST_CASE("separability is invariant to utterance order") {
  Rng rng(3);
  auto cls = Classes(4, 5);
  Mat x = Gaussian(20, 6, &rng);
  for (int i = 0; i < 20; ++i) x(i, 1) += 0.7 * cls[size_t(i)];
  const double base = SpeakerSeparability(x, cls);
  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[11]);
  Mat px(20, 6);
  std::vector<int> pc(20);
  for (int i = 0; i < 20; ++i) {
    px.row(i) = x.row(perm[size_t(i)]);
    pc[size_t(i)] = cls[size_t(perm[size_t(i)])];
  }
  CHECK(SpeakerSeparability(px, pc) == base);
}

TEST_CASE("separability input checks") {
  CHECK_THROWS_AS(SpeakerSeparability(Mat::Zero(4, 2), std::vector<int>{0, 0, 0, 0}), Error);
  CHECK_THROWS_AS(SpeakerSeparability(Mat::Zero(4, 2), std::vector<int>{0, 0, 0, 1}), Error);
  CHECK_THROWS_AS(SpeakerSeparability(Mat::Zero(3, 2), std::vector<int>{0, 1}), Error);
}

TEST_CASE("layer weights: uniform, one-hot and softmax oracle") {
  Rng rng(4);
  std::vector<Mat> layers;
  for (int j = 0; j < 3; ++j) layers.push_back(Gaussian(5, 4, &rng));
  const LayerWeights u = LayerWeights::Uniform(3);
  CHECK((u.Weights().array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  CHECK((WeightedSum(layers, u) - (layers[0] + layers[1] + layers[2]) / 3.0).cwiseAbs().maxCoeff() <
        1e-14);
  LayerWeights one;
  one.logits = RowVec::Constant(3, -800.0);
  one.logits(1) = 0.0;
  CHECK(WeightedSum(layers, one) == layers[1]);
  LayerWeights w;
  w.logits = RowVec(3);
  w.logits << 0.3, -1.2, 2.0;
  const double z = std::exp(0.3) + std::exp(-1.2) + std::exp(2.0);
  const Mat expect = (std::exp(0.3) * layers[0] + std::exp(-1.2) * layers[1] + std::exp(2.0) * layers[2]) / z;
  CHECK((WeightedSum(layers, w) - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::fabs(w.Weights().sum() - 1.0) < 1e-15);
  std::vector<Mat> ragged{Mat::Zero(2, 2), Mat::Zero(3, 2)};
  CHECK_THROWS_AS(WeightedSum(ragged, LayerWeights::Uniform(2)), Error);
  CHECK_THROWS_AS(WeightedSum(layers, LayerWeights::Uniform(2)), Error);
}

TEST_CASE("layer weight fit finds the informative layer") {
  Rng rng(5);
  const auto cls = Classes(3, 20);
  std::vector<Mat> layers;
  for (int j = 0; j < 4; ++j) layers.push_back(Gaussian(60, 5, &rng));
  for (int i = 0; i < 60; ++i) layers[2](i, cls[size_t(i)]) += 3.0;
  const LayerWeightFit fit = FitLayerWeights(layers, cls);
  Eigen::Index arg;
  fit.weights.Weights().maxCoeff(&arg);
  CHECK(arg == 2);
  CHECK(fit.task_accuracy > 0.9);
  const Json j = LayerWeightFitToJson(fit);
  CHECK(j["layers"].size() == 4);
  CHECK_FALSE(RenderBarChart(fit.weights.Weights()).empty());
}

TEST_CASE("layer weight fit with zero learning rate keeps uniform weights") {
  Rng rng(6);
  const auto cls = Classes(2, 5);
  std::vector<Mat> layers{Gaussian(10, 3, &rng), Gaussian(10, 3, &rng)};
  LayerWeightFitOptions opts;
  opts.learning_rate = 0.0;
  const LayerWeightFit fit = FitLayerWeights(layers, cls, opts);
  CHECK(fit.weights.logits == RowVec::Zero(2));
  CHECK(fit.final_loss == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(FitLayerWeights(layers, std::vector<int>(10, 1)), Error);
}

TEST_CASE("embeddings from a model") {
  TrainConfig cfg;
  cfg.encoder.model_dim = 16;
  cfg.encoder.num_layers = 2;
  cfg.encoder.num_heads = 2;
  cfg.encoder.ffn_dim = 32;
  cfg.encoder.tap_layer = 1;
  const Model model = InitModel(cfg.encoder, cfg.quantizer, 3);
  const auto corpus = SynthCorpus(3, 2, 0.1, 16000, 1);
  const auto all = AllLayerEmbeddings(cfg, model, corpus);
  REQUIRE(all.size() == 3);
  for (const auto& m : all) {
    CHECK(m.rows() == 6);
    CHECK(m.cols() == 16);
  }
  CHECK(UtteranceEmbeddings(cfg, model, corpus, 1) == all[1]);
  CHECK(SpeakerClasses(corpus) == std::vector<int>{0, 0, 1, 1, 2, 2});
  const double sep = SpeakerSeparabilityAtLayer(cfg, model, corpus, 2);
  CHECK(sep >= 0.0);
  CHECK(sep <= 1.0);
  CHECK_THROWS_AS(UtteranceEmbeddings(cfg, model, corpus, 3), Error);
}

}  // namespace
}  // namespace spkpt
