// pseudolabel/recluster.h
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

#ifndef SPKPT_PSEUDOLABEL_RECLUSTER_H_
#define SPKPT_PSEUDOLABEL_RECLUSTER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "corpus/corpus.h"
#include "pseudolabel/kmeans.h"
#include "pseudolabel/pseudo-labels.h"
#include "trainer/train-config.h"
#include "trainer/model.h"

namespace spkpt {

struct ReclusterResult {
  KmeansModel model;
  std::vector<PseudoLabelSequence> labels;
};

/// Runs the frozen encoder on clean utterances (fitted to the training
/// length), stacks the frames of hidden state `layer`, fits k-means and
/// assigns every frame. Labels carry source "embedding:layer<j>".
ReclusterResult ReclusterFromEmbeddings(const TrainConfig& cfg, const Model& model,
                                        std::span<const Utterance> corpus, int layer, int k,
                                        uint64_t seed, const KmeansOptions& opts = {});

}  // namespace spkpt

#endif  // SPKPT_PSEUDOLABEL_RECLUSTER_H_
