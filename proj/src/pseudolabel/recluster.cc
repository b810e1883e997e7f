// pseudolabel/recluster.cc
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

#include "pseudolabel/recluster.h"

#include "base/error.h"
#include "trainer/trainer.h"

namespace spkpt {

ReclusterResult ReclusterFromEmbeddings(const TrainConfig& cfg, const Model& model,
                                        std::span<const Utterance> corpus, int layer, int k,
                                        uint64_t seed, const KmeansOptions& opts) {
  if (layer < 0 || layer > model.encoder_cfg.num_layers)
    Fail("recluster: layer {} outside [0, {}]", layer, model.encoder_cfg.num_layers);
  if (corpus.empty()) Fail("recluster: empty corpus");
  const size_t L = static_cast<size_t>(cfg.utterance_length);
  std::vector<Mat> frames;
  Eigen::Index rows = 0;
  for (const auto& u : corpus) {
    const Waveform wave = FitToLength(u.waveform, L);
    if (!model.encoder_cfg.UsesConv() && model.input_mean.size() > 0 &&
        model.input_mean.cols() != cfg.mfcc.OutputDim())
      Fail("recluster: checkpoint expects {}-dim features, corpus features are {}-dim",
           model.input_mean.cols(), cfg.mfcc.OutputDim());
    frames.push_back(HiddenStates(cfg, model, wave)[static_cast<size_t>(layer)]);
    rows += frames.back().rows();
  }
  Mat all(rows, model.encoder_cfg.model_dim);
  Eigen::Index r = 0;
  for (const auto& f : frames) {
    all.middleRows(r, f.rows()) = f;
    r += f.rows();
  }
  ReclusterResult out;
  out.model = KmeansFit(all, k, seed, opts);
  for (size_t i = 0; i < corpus.size(); ++i) {
    PseudoLabelSequence seq;
    seq.utterance_id = corpus[i].id;
    seq.k = k;
    seq.source = fmt::format("embedding:layer{}", layer);
    seq.provenance = "clean";
    seq.labels = AssignRows(out.model, frames[i]);
    out.labels.push_back(std::move(seq));
  }
  return out;
}

}  // namespace spkpt
