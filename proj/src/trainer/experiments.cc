// trainer/experiments.cc
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

#include "trainer/experiments.h"

#include <map>

#include <spdlog/spdlog.h>

#include "augment/utterance-mixing.h"
#include "base/error.h"
#include "base/rng.h"
#include "dsp/mfcc.h"
#include "probe/probe.h"

namespace spkpt {

DeskData PrepareDeskData(const TrainConfig& cfg, const DeskSetup& setup) {
  DeskData out;
  out.corpus = SynthCorpus(setup.num_speakers, setup.utts_per_speaker, setup.duration_sec,
                           cfg.sample_rate, setup.corpus_seed, setup.synth);
  const size_t L = static_cast<size_t>(cfg.utterance_length);
  std::vector<FeatureSequence> feats;
  Eigen::Index rows = 0;
  for (const auto& u : out.corpus) {
    feats.push_back(Mfcc(FitToLength(u.waveform, L), cfg.mfcc, u.id));
    rows += feats.back().frames.rows();
  }
  Mat all(rows, cfg.mfcc.OutputDim());
  Eigen::Index r = 0;
  for (const auto& f : feats) {
    all.middleRows(r, f.frames.rows()) = f.frames;
    r += f.frames.rows();
  }
  KmeansOptions opts;
  opts.restarts = setup.kmeans_restarts;
  out.kmeans = KmeansFit(all, cfg.encoder.num_classes, setup.kmeans_seed, opts);
  for (const auto& f : feats) out.labels.push_back(Assign(out.kmeans, f));
  return out;
}

std::vector<Utterance> MakeOverlapSet(std::span<const Utterance> corpus, const TrainConfig& cfg,
                                      uint64_t seed) {
  Batch batch;
  batch.length = static_cast<size_t>(cfg.utterance_length);
  for (const auto& u : corpus) {
    Utterance fitted = u;
    fitted.waveform = FitToLength(u.waveform, batch.length);
    batch.utterances.push_back(std::move(fitted));
  }
  MixOptions opts;
  opts.exclude_self = true;
  MixedBatch mixed = MixBatch(batch, 1.0, GainPolicy::Parse(cfg.gain_policy), seed, opts);
  return std::move(mixed.batch.utterances);
}

TrainSeeds SeedsFromBase(uint64_t base) {
  TrainSeeds s;
  s.data = DeriveSeed(base, 1);
  s.model = DeriveSeed(base, 2);
  s.mixing = DeriveSeed(base, 3);
  s.masking = DeriveSeed(base, 4);
  s.negatives = DeriveSeed(base, 5);
  s.gumbel = DeriveSeed(base, 6);
  return s;
}

Json DeskRunToJson(const DeskRun& r) {
  return {{"mix_probability", r.mix_probability},
          {"use_speaker_loss", r.use_speaker_loss},
          {"seed", r.seed},
          {"summary", r.summary},
          {"separability_clean", r.separability_clean},
          {"separability_overlap", r.separability_overlap}};
}

DeskRun RunDesk(TrainConfig cfg, const DeskData& data, uint64_t seed,
                const std::filesystem::path& out_dir) {
  cfg.seeds = SeedsFromBase(seed);
  const TrainData td = PrepareTrainData(cfg, data.corpus, data.labels);
  TrainOptions opts;
  opts.out_dir = out_dir;
  const TrainResult res = Train(cfg, td, opts);
  DeskRun run;
  run.mix_probability = cfg.mix_probability;
  run.use_speaker_loss = cfg.use_speaker_loss;
  run.seed = seed;
  run.summary = res.summary;
  const int tap = cfg.encoder.tap_layer;
  run.separability_clean = SpeakerSeparabilityAtLayer(cfg, res.state.model, data.corpus, tap);
  const std::vector<Utterance> overlap = MakeOverlapSet(data.corpus, cfg, DeriveSeed(seed, 99));
  run.separability_overlap = SpeakerSeparabilityAtLayer(cfg, res.state.model, overlap, tap);
  if (!out_dir.empty()) WriteJsonFile(out_dir / "desk-run.json", DeskRunToJson(run));
  return run;
}

std::vector<DeskRun> RunMixSweep(const TrainConfig& cfg, const DeskData& data,
                                 std::span<const double> ratios, std::span<const uint64_t> seeds,
                                 const std::filesystem::path& out_dir) {
  std::vector<DeskRun> runs;
  for (double p : ratios)
    for (uint64_t seed : seeds) {
      TrainConfig c = cfg;
      c.mix_probability = p;
      const std::filesystem::path dir =
          out_dir.empty() ? out_dir : out_dir / fmt::format("p{:.1f}-seed{}", p, seed);
      spdlog::info("sweep: p={} seed={}", p, seed);
      runs.push_back(RunDesk(c, data, seed, dir));
    }
  return runs;
}

std::string FormatSweepTable(std::span<const DeskRun> runs) {
  std::string out = fmt::format("{:>5} {:>6} {:>10} {:>10} {:>8} {:>10} {:>10}\n", "p", "seed",
                                "tail_total", "content", "acc", "sep_clean", "sep_overlap");
  std::map<double, std::vector<const DeskRun*>> by_p;
  for (const auto& r : runs) {
    out += fmt::format("{:>5.2f} {:>6} {:>10.4f} {:>10.4f} {:>8.3f} {:>10.3f} {:>10.3f}\n",
                       r.mix_probability, r.seed, r.summary.at("tail_mean_total").get<double>(),
                       r.summary.at("tail_mean_content").get<double>(),
                       r.summary.at("tail_masked_accuracy").get<double>(), r.separability_clean,
                       r.separability_overlap);
    by_p[r.mix_probability].push_back(&r);
  }
  for (const auto& [p, rs] : by_p) {
    double total = 0, clean = 0, overlap = 0;
    for (const DeskRun* r : rs) {
      total += r->summary.at("tail_mean_total").get<double>();
      clean += r->separability_clean;
      overlap += r->separability_overlap;
    }
    const double n = double(rs.size());
    out += fmt::format("{:>5.2f} {:>6} {:>10.4f} {:>10} {:>8} {:>10.3f} {:>10.3f}\n", p, "mean",
                       total / n, "", "", clean / n, overlap / n);
  }
  return out;
}

}  // namespace spkpt
