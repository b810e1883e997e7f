// probe/probe.cc
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

#include "probe/probe.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "base/error.h"
#include "trainer/trainer.h"

namespace spkpt {

LayerWeights LayerWeights::Uniform(int num_layers) {
  if (num_layers < 1) Fail("layer weights: need at least one layer");
  LayerWeights w;
  w.logits = RowVec::Zero(num_layers);
  return w;
}

RowVec LayerWeights::Weights() const {
  if (logits.size() == 0) Fail("layer weights: empty");
  const double mx = logits.maxCoeff();
  RowVec e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

Mat WeightedSum(std::span<const Mat> layers, const LayerWeights& weights) {
  if (static_cast<int>(layers.size()) != weights.size())
    Fail("weighted sum: {} layers, {} weights", layers.size(), weights.size());
  const RowVec w = weights.Weights();
  Mat out = Mat::Zero(layers[0].rows(), layers[0].cols());
  for (size_t j = 0; j < layers.size(); ++j) {
    if (layers[j].rows() != out.rows() || layers[j].cols() != out.cols())
      Fail("weighted sum: layer {} is {}x{}, layer 0 is {}x{}", j, layers[j].rows(),
           layers[j].cols(), out.rows(), out.cols());
    out += w(static_cast<Eigen::Index>(j)) * layers[j];
  }
  return out;
}

double SpeakerSeparability(const Mat& embeddings, std::span<const int> classes) {
  const Eigen::Index n = embeddings.rows();
  if (static_cast<Eigen::Index>(classes.size()) != n)
    Fail("separability: {} embeddings, {} class tags", n, classes.size());
  std::map<int, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < n; ++i) members[classes[static_cast<size_t>(i)]].push_back(i);
  if (members.size() < 2) Fail("separability: need at least 2 speakers, got {}", members.size());
  for (const auto& [c, rows] : members)
    if (rows.size() < 2) Fail("separability: speaker {} has fewer than 2 utterances", c);

  std::vector<int> ids;
  Mat sums(static_cast<Eigen::Index>(members.size()), embeddings.cols());
  std::vector<double> counts;
  for (const auto& [c, rows] : members) {
    const auto r = static_cast<Eigen::Index>(ids.size());
    ids.push_back(c);
    sums.row(r).setZero();
    for (Eigen::Index i : rows) sums.row(r) += embeddings.row(i);
    counts.push_back(double(rows.size()));
  }
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = classes[static_cast<size_t>(i)];
    int best = -1;
    double best_d = 0.0;
    for (size_t c = 0; c < ids.size(); ++c) {
      const auto r = static_cast<Eigen::Index>(c);
      RowVec centroid;
      if (ids[c] == own)
        centroid = (sums.row(r) - embeddings.row(i)) / (counts[c] - 1.0);
      else
        centroid = sums.row(r) / counts[c];
      const double d = (embeddings.row(i) - centroid).squaredNorm();
      if (best < 0 || d < best_d) {
        best = static_cast<int>(c);
        best_d = d;
      }
    }
    if (ids[static_cast<size_t>(best)] == own) ++correct;
  }
  return double(correct) / double(n);
}

std::vector<int> SpeakerClasses(std::span<const Utterance> corpus) {
  std::map<std::string, int> index;
  for (const auto& u : corpus) {
    if (!u.speaker) Fail("utterance '{}' has no speaker tag", u.id);
    index.emplace(*u.speaker, 0);
  }
  int next = 0;
  for (auto& [name, id] : index) id = next++;
  std::vector<int> out;
  for (const auto& u : corpus) out.push_back(index.at(*u.speaker));
  return out;
}

std::vector<Mat> AllLayerEmbeddings(const TrainConfig& cfg, const Model& model,
                                    std::span<const Utterance> corpus) {
  const int layers = model.encoder_cfg.num_layers + 1;
  const auto n = static_cast<Eigen::Index>(corpus.size());
  std::vector<Mat> out(static_cast<size_t>(layers), Mat(n, model.encoder_cfg.model_dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Waveform wave =
        FitToLength(corpus[static_cast<size_t>(i)].waveform, static_cast<size_t>(cfg.utterance_length));
    const std::vector<Mat> hidden = HiddenStates(cfg, model, wave);
    for (int j = 0; j < layers; ++j)
      out[static_cast<size_t>(j)].row(i) = hidden[static_cast<size_t>(j)].colwise().mean();
  }
  return out;
}

Mat UtteranceEmbeddings(const TrainConfig& cfg, const Model& model,
                        std::span<const Utterance> corpus, int layer) {
  if (layer < 0 || layer > model.encoder_cfg.num_layers)
    Fail("layer {} outside [0, {}]", layer, model.encoder_cfg.num_layers);
  return AllLayerEmbeddings(cfg, model, corpus)[static_cast<size_t>(layer)];
}

double SpeakerSeparabilityAtLayer(const TrainConfig& cfg, const Model& model,
                                  std::span<const Utterance> corpus, int layer) {
  const std::vector<int> classes = SpeakerClasses(corpus);
  return SpeakerSeparability(UtteranceEmbeddings(cfg, model, corpus, layer), classes);
}

LayerWeightFit FitLayerWeights(std::span<const Mat> layers, std::span<const int> targets,
                               const LayerWeightFitOptions& opts) {
  if (layers.empty()) Fail("fit_layer_weights: no layers");
  const Eigen::Index n = layers[0].rows(), d = layers[0].cols();
  for (const auto& x : layers)
    if (x.rows() != n || x.cols() != d) Fail("fit_layer_weights: layer shapes differ");
  if (static_cast<Eigen::Index>(targets.size()) != n)
    Fail("fit_layer_weights: {} examples, {} targets", n, targets.size());
  std::map<int, int> dense;
  for (int t : targets) dense.emplace(t, 0);
  if (dense.size() < 2) Fail("fit_layer_weights: degenerate targets (a single class)");
  int next = 0;
  for (auto& [t, id] : dense) id = next++;
  const int C = next;
  std::vector<int> y;
  for (int t : targets) y.push_back(dense.at(t));

  const int J = static_cast<int>(layers.size());
  LayerWeightFit fit;
  fit.weights = LayerWeights::Uniform(J);
  Mat W = Mat::Zero(d, C);
  RowVec bias = RowVec::Zero(C);
  RowVec m_l = RowVec::Zero(J), v_l = RowVec::Zero(J);
  Mat m_w = Mat::Zero(d, C), v_w = Mat::Zero(d, C);
  RowVec m_b = RowVec::Zero(C), v_b = RowVec::Zero(C);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  auto forward = [&](Mat* z_out, Mat* probs) {
    *z_out = WeightedSum(layers, fit.weights);
    Mat logits = (*z_out) * W;
    logits.rowwise() += bias;
    *probs = logits;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = probs->row(i).maxCoeff();
      probs->row(i) = (probs->row(i).array() - mx).exp().matrix();
      const double s = probs->row(i).sum();
      probs->row(i) /= s;
      loss -= std::log(std::max((*probs)(i, y[static_cast<size_t>(i)]), 1e-300));
    }
    return loss / double(n);
  };

  Mat z, P;
  for (int step = 0; step < opts.steps; ++step) {
    forward(&z, &P);
    Mat dlogits = P;
    for (Eigen::Index i = 0; i < n; ++i) dlogits(i, y[static_cast<size_t>(i)]) -= 1.0;
    dlogits /= double(n);
    const Mat dW = z.transpose() * dlogits;
    const RowVec db = dlogits.colwise().sum();
    const Mat dz = dlogits * W.transpose();
    const RowVec w = fit.weights.Weights();
    RowVec dw(J);
    for (int j = 0; j < J; ++j) dw(j) = dz.cwiseProduct(layers[static_cast<size_t>(j)]).sum();
    const double mean = w.dot(dw);
    const RowVec dl = w.cwiseProduct((dw.array() - mean).matrix());

    const double c1 = 1.0 - std::pow(b1, step + 1), c2 = 1.0 - std::pow(b2, step + 1);
    auto adam = [&](auto& p, const auto& g, auto& m, auto& v) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
      p.array() -= opts.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    adam(fit.weights.logits, dl, m_l, v_l);
    adam(W, dW, m_w, v_w);
    adam(bias, db, m_b, v_b);
  }
  fit.final_loss = forward(&z, &P);
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg;
    P.row(i).maxCoeff(&arg);
    if (arg == y[static_cast<size_t>(i)]) ++correct;
  }
  fit.task_accuracy = double(correct) / double(n);
  return fit;
}

Json LayerWeightFitToJson(const LayerWeightFit& fit) {
  const RowVec w = fit.weights.Weights();
  Json layers = Json::array();
  for (Eigen::Index j = 0; j < w.size(); ++j)
    layers.push_back({{"layer", j}, {"weight", w(j)}, {"logit", fit.weights.logits(j)}});
  return {{"layers", layers}, {"task_accuracy", fit.task_accuracy}, {"final_loss", fit.final_loss}};
}

std::string RenderBarChart(const RowVec& weights, int width) {
  std::string out;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    const int len = static_cast<int>(std::lround(weights(j) * width));
    out += fmt::format("layer {:>2} | {:<{}} {:.3f}\n", j, std::string(static_cast<size_t>(len), '#'),
                       width, weights(j));
  }
  return out;
}

}  // namespace spkpt
