// probe/probe.h
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

#ifndef SPKPT_PROBE_PROBE_H_
#define SPKPT_PROBE_PROBE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "base/io.h"
#include "base/matrix.h"
#include "corpus/corpus.h"
#include "trainer/model.h"
#include "trainer/train-config.h"

namespace spkpt {

/// One logit per layer (N + 1, the input projection included); the weights
/// are their softmax.
struct LayerWeights {
  RowVec logits;

  static LayerWeights Uniform(int num_layers);
  int size() const { return static_cast<int>(logits.size()); }
  RowVec Weights() const;
};

/// sum_j w_j X_j over equally shaped layer outputs.
Mat WeightedSum(std::span<const Mat> layers, const LayerWeights& weights);

/// Leave-one-out nearest-centroid accuracy of the rows of `embeddings`
/// (one per utterance) against integer classes. The centroid of the held
/// out row's own class excludes that row; distances are squared Euclidean
/// and ties go to the lowest class index. Every class needs at least two
/// rows and there must be at least two classes.
double SpeakerSeparability(const Mat& embeddings, std::span<const int> classes);

/// Dense class indices in sorted order of the distinct speaker tags.
std::vector<int> SpeakerClasses(std::span<const Utterance> corpus);

/// Mean-pooled hidden state `layer` for every utterance (fitted to the
/// training length, no masking), one row each.
Mat UtteranceEmbeddings(const TrainConfig& cfg, const Model& model,
                        std::span<const Utterance> corpus, int layer);

/// Mean-pooled embeddings of every layer: N + 1 matrices, one row per
/// utterance.
std::vector<Mat> AllLayerEmbeddings(const TrainConfig& cfg, const Model& model,
                                    std::span<const Utterance> corpus);

/// Separability of the model's layer-`layer` utterance embeddings.
double SpeakerSeparabilityAtLayer(const TrainConfig& cfg, const Model& model,
                                  std::span<const Utterance> corpus, int layer);

struct LayerWeightFitOptions {
  int steps = 300;
  double learning_rate = 0.05;
  uint64_t seed = 0;  // unused by the full-batch optimizer, kept in reports
};

struct LayerWeightFit {
  LayerWeights weights;
  double task_accuracy = 0.0;
  double final_loss = 0.0;
};

/// Trains only the layer logits and a linear softmax head (zero-initialized)
/// on frozen representations with full-batch Adam. layers[j] is the n x d
/// representation of every example at layer j; targets has n entries.
LayerWeightFit FitLayerWeights(std::span<const Mat> layers, std::span<const int> targets,
                               const LayerWeightFitOptions& opts = {});

/// {layers:[{layer, weight}], task_accuracy, ...}.
Json LayerWeightFitToJson(const LayerWeightFit& fit);

/// Horizontal bar per layer, scaled to `width` characters at weight 1.
std::string RenderBarChart(const RowVec& weights, int width = 50);

}  // namespace spkpt

#endif  // SPKPT_PROBE_PROBE_H_
