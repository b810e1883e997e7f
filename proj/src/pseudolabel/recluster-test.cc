// pseudolabel/recluster-test.cc
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

#include "base/error.h"
#include "corpus/corpus.h"
#include "pseudolabel/recluster.h"
#include "trainer/model.h"

namespace spkpt {
namespace {

TrainConfig Tiny() {
  TrainConfig cfg;
  cfg.encoder.model_dim = 16;
  cfg.encoder.num_layers = 2;
  cfg.encoder.num_heads = 2;
  cfg.encoder.ffn_dim = 32;
  cfg.encoder.tap_layer = 1;
  return cfg;
}

TEST_CASE("recluster labels every frame and is seeded") {
  const TrainConfig cfg = Tiny();
  const Model model = InitModel(cfg.encoder, cfg.quantizer, 1);
  const auto corpus = SynthCorpus(2, 2, 0.2, 16000, 3);
  const ReclusterResult a = ReclusterFromEmbeddings(cfg, model, corpus, 1, 5, 9);
  const ReclusterResult b = ReclusterFromEmbeddings(cfg, model, corpus, 1, 5, 9);
  REQUIRE(a.labels.size() == 4);
  CHECK(a.labels == b.labels);
  CHECK(a.model.centers == b.model.centers);
  CHECK(a.model.k() == 5);
  CHECK(a.model.dim() == 16);
  std::vector<int> occupancy(5, 0);
  for (size_t i = 0; i < 4; ++i) {
    const auto& l = a.labels[i];
    CHECK(l.utterance_id == corpus[i].id);
    CHECK(l.source == "embedding:layer1");
    CHECK(l.provenance == "clean");
    CHECK(l.k == 5);
    CHECK(static_cast<int>(l.size()) == NumFrames(size_t(cfg.utterance_length), cfg.mfcc));
    for (int x : l.labels) ++occupancy[size_t(x)];
  }
  for (int c : occupancy) CHECK(c > 0);
}

TEST_CASE("one cluster gives all zeros") {
  const TrainConfig cfg = Tiny();
  const Model model = InitModel(cfg.encoder, cfg.quantizer, 1);
  const auto corpus = SynthCorpus(2, 1, 0.1, 16000, 3);
  for (const auto& l : ReclusterFromEmbeddings(cfg, model, corpus, 2, 1, 0).labels)
    for (int x : l.labels) CHECK(x == 0);
}

TEST_CASE("invalid layer") {
  const TrainConfig cfg = Tiny();
  const Model model = InitModel(cfg.encoder, cfg.quantizer, 1);
  const auto corpus = SynthCorpus(2, 1, 0.1, 16000, 3);
  CHECK_THROWS_AS(ReclusterFromEmbeddings(cfg, model, corpus, 3, 2, 0), Error);
  CHECK_THROWS_AS(ReclusterFromEmbeddings(cfg, model, corpus, -1, 2, 0), Error);
}

}  // namespace
}  // namespace spkpt
