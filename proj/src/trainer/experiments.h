// trainer/experiments.h
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

#ifndef SPKPT_TRAINER_EXPERIMENTS_H_
#define SPKPT_TRAINER_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "base/io.h"
#include "corpus/corpus.h"
#include "pseudolabel/kmeans.h"
#include "pseudolabel/pseudo-labels.h"
#include "trainer/train-config.h"
#include "trainer/trainer.h"

namespace spkpt {

/// Synthetic desk-scale corpus and clustering knobs.
struct DeskSetup {
  int num_speakers = 8;
  int utts_per_speaker = 16;
  double duration_sec = 0.5;
  uint64_t corpus_seed = 7;
  uint64_t kmeans_seed = 11;
  int kmeans_restarts = 3;
  SynthOptions synth;
};

struct DeskData {
  std::vector<Utterance> corpus;
  std::vector<PseudoLabelSequence> labels;
  KmeansModel kmeans;
};

/// Synthesizes the corpus, extracts MFCCs from the clean audio (fitted to
/// the training length) and clusters them into encoder.num_classes labels.
DeskData PrepareDeskData(const TrainConfig& cfg, const DeskSetup& setup);

/// Every utterance of the corpus with a chunk of another utterance mixed in
/// (probability 1, never the utterance itself); speaker tags stay those of
/// the main speaker.
std::vector<Utterance> MakeOverlapSet(std::span<const Utterance> corpus, const TrainConfig& cfg,
                                      uint64_t seed);

/// Independent per-stream seeds derived from one run seed.
TrainSeeds SeedsFromBase(uint64_t base);

struct DeskRun {
  double mix_probability = 0.0;
  bool use_speaker_loss = true;
  uint64_t seed = 0;
  Json summary;
  double separability_clean = 0.0;
  double separability_overlap = 0.0;
};

Json DeskRunToJson(const DeskRun& r);

/// Trains with cfg (seeds replaced by SeedsFromBase(seed)) and scores tap
/// layer separability on the clean corpus and on the overlap set.
/// out_dir may be empty to skip writing artifacts.
DeskRun RunDesk(TrainConfig cfg, const DeskData& data, uint64_t seed,
                const std::filesystem::path& out_dir = {});

/// Pretraining at each mixing probability and seed.
std::vector<DeskRun> RunMixSweep(const TrainConfig& cfg, const DeskData& data,
                                 std::span<const double> ratios, std::span<const uint64_t> seeds,
                                 const std::filesystem::path& out_dir = {});

/// Fixed-width table of sweep rows plus per-ratio means.
std::string FormatSweepTable(std::span<const DeskRun> runs);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_EXPERIMENTS_H_
