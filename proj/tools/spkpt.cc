// tools/spkpt.cc
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

// Command-line entry point: corpus synthesis, features, clustering, mixing,
// pre-training, re-clustering, probing and gradient checks.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "augment/utterance-mixing.h"
#include "base/error.h"
#include "base/io.h"
#include "corpus/corpus.h"
#include "corpus/wav-io.h"
#include "dsp/feature-io.h"
#include "dsp/mfcc.h"
#include "probe/probe.h"
#include "pseudolabel/kmeans.h"
#include "pseudolabel/recluster.h"
#include "run-manifest.h"
#include "trainer/checkpoint.h"
#include "trainer/experiments.h"
#include "trainer/grad-check.h"
#include "trainer/trainer.h"

namespace spkpt {
namespace {

namespace fs = std::filesystem;

/// Flags shared by every subcommand.
struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<uint64_t> seed_data, seed_model, seed_mixing, seed_masking, seed_negatives,
      seed_gumbel;

  void Register(CLI::App* app, bool out_required = true) {
    app->add_option("--config", config_path, "JSON configuration document");
    app->add_option("--set", overrides, "Override a configuration key (key=value)");
    auto* out = app->add_option("--out", out_dir, "Output directory");
    if (out_required) out->required();
    app->add_option("--seed-data", seed_data, "Batch selection seed");
    app->add_option("--seed-model", seed_model, "Parameter initialization seed");
    app->add_option("--seed-mixing", seed_mixing, "Utterance mixing seed");
    app->add_option("--seed-masking", seed_masking, "Span masking seed");
    app->add_option("--seed-negatives", seed_negatives, "Negative sampling seed");
    app->add_option("--seed-gumbel", seed_gumbel, "Quantizer noise seed");
  }

  TrainConfig Config() const {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = ReadJsonFile(config_path).get<TrainConfig>();
    for (const auto& o : overrides) ApplyOverride(&cfg, o);
    if (seed_data) cfg.seeds.data = *seed_data;
    if (seed_model) cfg.seeds.model = *seed_model;
    if (seed_mixing) cfg.seeds.mixing = *seed_mixing;
    if (seed_masking) cfg.seeds.masking = *seed_masking;
    if (seed_negatives) cfg.seeds.negatives = *seed_negatives;
    if (seed_gumbel) cfg.seeds.gumbel = *seed_gumbel;
    cfg.Validate();
    return cfg;
  }
};

struct SynthArgs {
  int speakers = 8;
  int utts = 16;
  double duration = 0.5;
  uint64_t seed = 7;
  SynthOptions synth;

  void Register(CLI::App* app) {
    app->add_option("--speakers", speakers, "Number of speakers")->capture_default_str();
    app->add_option("--utts", utts, "Utterances per speaker")->capture_default_str();
    app->add_option("--duration", duration, "Utterance duration in seconds")->capture_default_str();
    app->add_option("--corpus-seed", seed, "Corpus synthesis seed")->capture_default_str();
    app->add_option("--speaker-color", synth.speaker_color)->capture_default_str();
    app->add_option("--channel-color", synth.channel_color)->capture_default_str();
    app->add_option("--f0-jitter", synth.f0_jitter)->capture_default_str();
    app->add_option("--noise-std", synth.noise_std)->capture_default_str();
  }
};

void WriteCorpus(const fs::path& dir, std::span<const Utterance> corpus) {
  std::vector<UtteranceDescriptor> descs;
  for (const auto& u : corpus) {
    const std::string rel = "wav/" + u.id + ".wav";
    WriteWav(dir / rel, u.waveform);
    descs.push_back({u.id, rel, u.speaker});
  }
  WriteManifest(dir / "manifest.jsonl", descs);
}

int RunSynth(const CommonArgs& common, const SynthArgs& args) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("synth", cfg);
  const fs::path out = common.out_dir;
  const auto corpus = SynthCorpus(args.speakers, args.utts, args.duration, cfg.sample_rate,
                                  args.seed, args.synth);
  WriteCorpus(out, corpus);
  mw.manifest().seeds["corpus"] = args.seed;
  mw.manifest().outputs = {(out / "manifest.jsonl").string(), (out / "wav").string()};
  mw.Finish(out);
  std::printf("wrote %zu utterances to %s\n", corpus.size(), out.c_str());
  return 0;
}

int RunMfcc(const CommonArgs& common, const std::string& manifest) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("mfcc", cfg);
  const fs::path out = common.out_dir;
  const auto corpus = LoadCorpus(manifest);
  for (const auto& u : corpus) {
    const Waveform w = FitToLength(u.waveform, static_cast<size_t>(cfg.utterance_length));
    WriteFeatureDump(out, Mfcc(w, cfg.mfcc, u.id));
  }
  WriteJsonFile(out / "mfcc-config.json", Json(cfg.mfcc));
  mw.manifest().inputs = {manifest};
  mw.manifest().outputs = {out.string()};
  mw.Finish(out);
  std::printf("wrote features for %zu utterances to %s\n", corpus.size(), out.c_str());
  return 0;
}

int RunCluster(const CommonArgs& common, const std::string& manifest, const std::string& features,
               int k, uint64_t seed, int restarts) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("cluster", cfg);
  const fs::path out = common.out_dir;
  const auto descs = LoadManifest(manifest);
  std::vector<FeatureSequence> feats;
  Eigen::Index rows = 0;
  for (const auto& d : descs) {
    feats.push_back(ReadFeatureDump(features, d.id));
    rows += feats.back().frames.rows();
  }
  if (feats.empty()) Fail("cluster: manifest '{}' is empty", manifest);
  Mat all(rows, feats[0].frames.cols());
  Eigen::Index r = 0;
  for (const auto& f : feats) {
    if (f.frames.cols() != all.cols()) Fail("cluster: feature dims differ for '{}'", f.id);
    all.middleRows(r, f.frames.rows()) = f.frames;
    r += f.frames.rows();
  }
  KmeansOptions opts;
  opts.restarts = restarts;
  const KmeansModel model = KmeansFit(all, k, seed, opts);
  std::vector<PseudoLabelSequence> labels;
  for (const auto& f : feats) labels.push_back(Assign(model, f));
  WriteKmeansModel(out / "kmeans.bin", model);
  WriteLabelDump(out / "labels.jsonl", labels);
  mw.manifest().seeds["kmeans"] = seed;
  mw.manifest().inputs = {manifest, features};
  mw.manifest().outputs = {(out / "kmeans.bin").string(), (out / "labels.jsonl").string()};
  mw.Finish(out);
  std::printf("k=%d inertia=%.6g iterations=%d\n", k, model.inertia, model.iterations_run);
  return 0;
}

int RunMix(const CommonArgs& common, const std::string& manifest, uint64_t seed) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("mix", cfg);
  const fs::path out = common.out_dir;
  const auto corpus = LoadCorpus(manifest);
  const uint64_t batch_seed = DeriveSeed(cfg.seeds.data, 0);
  const Batch batch = MakeBatch(corpus, static_cast<size_t>(cfg.batch_size),
                                static_cast<size_t>(cfg.utterance_length), batch_seed);
  MixOptions opts;
  opts.exclude_self = cfg.mix_exclude_self;
  const MixedBatch mixed =
      MixBatch(batch, cfg.mix_probability, GainPolicy::Parse(cfg.gain_policy), seed, opts);
  const MixReport report = VerifyMix(mixed);
  for (const auto& u : mixed.batch.utterances) WriteWav(out / "wav" / (u.id + ".wav"), u.waveform);
  WriteTextFile(out / "mix-specs.jsonl", MixSpecsToJson(0, mixed.specs).dump() + "\n");
  WriteJsonFile(out / "mix-report.json", {{"ok", report.ok},
                                          {"problems", report.problems},
                                          {"mixed", mixed.specs.size()},
                                          {"clipped_samples", mixed.clipped_samples}});
  mw.manifest().seeds["mix"] = seed;
  mw.manifest().inputs = {manifest};
  mw.manifest().outputs = {(out / "mix-specs.jsonl").string(), (out / "wav").string()};
  mw.Finish(out);
  std::printf("mixed %zu of %zu utterances; verification %s\n", mixed.specs.size(), batch.size(),
              report.ok ? "passed" : "FAILED");
  for (const auto& p : report.problems) std::fprintf(stderr, "  %s\n", p.c_str());
  return report.ok ? 0 : 1;
}

int RunPretrain(const CommonArgs& common, const std::string& manifest, const std::string& labels,
                const std::string& resume, int64_t stop_after) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("pretrain", cfg);
  const fs::path out = common.out_dir;
  const auto corpus = LoadCorpus(manifest);
  const auto label_seqs = ReadLabelDump(labels);
  const TrainData data = PrepareTrainData(cfg, corpus, label_seqs);
  WriteJsonFile(out / "config.json", Json(cfg));
  TrainOptions opts;
  opts.out_dir = out;
  if (!resume.empty()) opts.resume_from = resume;
  opts.stop_after = stop_after;
  const TrainResult res = Train(cfg, data, opts);
  mw.manifest().inputs = {manifest, labels};
  if (!resume.empty()) mw.manifest().inputs.push_back(resume);
  mw.manifest().outputs = {(out / "metrics.jsonl").string(), (out / "final").string(),
                           (out / "summary.json").string()};
  mw.Finish(out);
  std::printf("%s\n", res.summary.dump(2).c_str());
  return 0;
}

int RunRecluster(const CommonArgs& common, const std::string& checkpoint,
                 const std::string& manifest, int layer, int k, uint64_t seed) {
  const LoadedCheckpoint ck = LoadCheckpoint(checkpoint);
  ManifestWriter mw("recluster", ck.config);
  const fs::path out = common.out_dir;
  const auto corpus = LoadCorpus(manifest);
  const ReclusterResult res =
      ReclusterFromEmbeddings(ck.config, ck.state.model, corpus, layer, k, seed);
  WriteKmeansModel(out / "kmeans.bin", res.model);
  WriteLabelDump(out / "labels.jsonl", res.labels);
  std::vector<int> occupancy(static_cast<size_t>(k), 0);
  for (const auto& seq : res.labels)
    for (int z : seq.labels) ++occupancy[static_cast<size_t>(z)];
  WriteJsonFile(out / "occupancy.json", Json(occupancy));
  mw.manifest().seeds["kmeans"] = seed;
  mw.manifest().inputs = {checkpoint, manifest};
  mw.manifest().outputs = {(out / "kmeans.bin").string(), (out / "labels.jsonl").string()};
  mw.Finish(out);
  int used = 0;
  for (int c : occupancy) used += c > 0;
  std::printf("layer %d, k=%d: %d clusters occupied, inertia %.6g\n", layer, k, used,
              res.model.inertia);
  return 0;
}

int RunProbe(const CommonArgs& common, const std::string& checkpoint, const std::string& manifest,
             int steps, double lr) {
  const LoadedCheckpoint ck = LoadCheckpoint(checkpoint);
  ManifestWriter mw("probe", ck.config);
  const fs::path out = common.out_dir;
  const auto corpus = LoadCorpus(manifest);
  const std::vector<Mat> layers = AllLayerEmbeddings(ck.config, ck.state.model, corpus);
  const std::vector<int> classes = SpeakerClasses(corpus);
  Json sep = Json::array();
  for (size_t j = 0; j < layers.size(); ++j)
    sep.push_back({{"layer", j}, {"speaker_separability", SpeakerSeparability(layers[j], classes)}});
  LayerWeightFitOptions opts;
  opts.steps = steps;
  opts.learning_rate = lr;
  const LayerWeightFit fit = FitLayerWeights(layers, classes, opts);
  Json report = LayerWeightFitToJson(fit);
  report["task"] = "speaker";
  report["separability"] = sep;
  report["tap_layer"] = ck.config.encoder.tap_layer;
  WriteJsonFile(out / "probe-report.json", report);
  const std::string chart = RenderBarChart(fit.weights.Weights());
  WriteTextFile(out / "layer-weights.txt", chart);
  mw.manifest().inputs = {checkpoint, manifest};
  mw.manifest().outputs = {(out / "probe-report.json").string()};
  mw.Finish(out);
  std::printf("speaker-id layer weights (task accuracy %.3f)\n%s", fit.task_accuracy,
              chart.c_str());
  for (const auto& s : sep)
    std::printf("layer %d separability %.3f\n", s["layer"].get<int>(),
                s["speaker_separability"].get<double>());
  return 0;
}

int RunGradcheck(const CommonArgs& common, uint64_t seed, int coords, bool conv, bool head_only) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("gradcheck", cfg);
  GradCheckOptions opts;
  opts.seed = seed;
  opts.num_coords = coords;
  opts.conv_front_end = conv;
  opts.head_only = head_only;
  const GradCheckReport report = RunGradCheck(opts);
  const double bound = head_only ? 1e-6 : 1e-4;
  Json j = GradCheckReportToJson(report);
  j["bound"] = bound;
  j["passed"] = report.max_rel_error < bound;
  std::printf("%s\n", j.dump(2).c_str());
  if (!common.out_dir.empty()) {
    WriteJsonFile(fs::path(common.out_dir) / "gradcheck.json", j);
    mw.manifest().seeds["gradcheck"] = seed;
    mw.Finish(common.out_dir);
  }
  return report.max_rel_error < bound ? 0 : 1;
}

int RunSweep(const CommonArgs& common, const SynthArgs& synth, std::vector<double> ratios,
             std::vector<uint64_t> seeds) {
  const TrainConfig cfg = common.Config();
  ManifestWriter mw("sweep-mix", cfg);
  const fs::path out = common.out_dir;
  DeskSetup setup;
  setup.num_speakers = synth.speakers;
  setup.utts_per_speaker = synth.utts;
  setup.duration_sec = synth.duration;
  setup.corpus_seed = synth.seed;
  setup.synth = synth.synth;
  const DeskData data = PrepareDeskData(cfg, setup);
  const std::vector<DeskRun> runs = RunMixSweep(cfg, data, ratios, seeds, out);
  Json rows = Json::array();
  for (const auto& r : runs) rows.push_back(DeskRunToJson(r));
  WriteJsonFile(out / "sweep.json", rows);
  const std::string table = FormatSweepTable(runs);
  WriteTextFile(out / "sweep.txt", table);
  mw.manifest().seeds["corpus"] = synth.seed;
  mw.manifest().seeds["runs"] = seeds;
  mw.manifest().outputs = {(out / "sweep.json").string(), (out / "sweep.txt").string()};
  mw.Finish(out);
  std::printf("%s", table.c_str());
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Speaker-aware self-supervised speech pre-training at desk scale", "spkpt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  CommonArgs common;
  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Synthesize a speaker-tagged corpus");
  common.Register(synth);
  synth_args.Register(synth);

  std::string manifest, features, labels, checkpoint, resume;
  auto* mfcc = app.add_subcommand("mfcc", "Extract MFCC features");
  common.Register(mfcc);
  mfcc->add_option("--manifest", manifest, "Corpus manifest (JSON Lines)")->required();

  int k = 16, restarts = 3, layer = -1, steps = 300;
  uint64_t seed = 1;
  auto* cluster = app.add_subcommand("cluster", "k-means pseudo-labels from features");
  common.Register(cluster);
  cluster->add_option("--manifest", manifest)->required();
  cluster->add_option("--features", features, "Feature dump directory")->required();
  cluster->add_option("--k", k)->capture_default_str();
  cluster->add_option("--seed", seed)->capture_default_str();
  cluster->add_option("--restarts", restarts)->capture_default_str();

  auto* mix = app.add_subcommand("mix", "Mix one seeded batch and verify it");
  common.Register(mix);
  mix->add_option("--manifest", manifest)->required();
  mix->add_option("--seed", seed)->capture_default_str();

  int64_t stop_after = -1;
  auto* pretrain = app.add_subcommand("pretrain", "Pre-train the encoder");
  common.Register(pretrain);
  pretrain->add_option("--manifest", manifest)->required();
  pretrain->add_option("--labels", labels, "Label dump (JSON Lines)")->required();
  pretrain->add_option("--resume", resume, "Checkpoint directory to resume from");
  pretrain->add_option("--stop-after", stop_after, "Stop once this many steps are done");

  auto* recluster = app.add_subcommand("recluster", "Re-cluster a trained layer's outputs");
  common.Register(recluster);
  recluster->add_option("--checkpoint", checkpoint)->required();
  recluster->add_option("--manifest", manifest)->required();
  recluster->add_option("--layer", layer, "Hidden state index (default: tap layer)");
  recluster->add_option("--k", k)->capture_default_str();
  recluster->add_option("--seed", seed)->capture_default_str();

  double probe_lr = 0.05;
  auto* probe = app.add_subcommand("probe", "Layer-weight and separability analysis");
  common.Register(probe);
  probe->add_option("--checkpoint", checkpoint)->required();
  probe->add_option("--manifest", manifest)->required();
  probe->add_option("--steps", steps)->capture_default_str();
  probe->add_option("--lr", probe_lr)->capture_default_str();

  int coords = 200;
  bool conv = false, head_only = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  common.Register(gradcheck, false);
  gradcheck->add_option("--seed", seed)->capture_default_str();
  gradcheck->add_option("--coords", coords)->capture_default_str();
  gradcheck->add_flag("--conv", conv, "Use the convolutional front end");
  gradcheck->add_flag("--head-only", head_only, "Check only the content head");

  std::vector<double> ratios(kMixSweepRatios.begin(), kMixSweepRatios.end());
  std::vector<uint64_t> seeds = {1, 2, 3};
  SynthArgs sweep_synth;
  auto* sweep = app.add_subcommand("sweep-mix", "Pre-train across mixing probabilities");
  common.Register(sweep);
  sweep_synth.Register(sweep);
  sweep->add_option("--ratios", ratios)->delimiter(',')->capture_default_str();
  sweep->add_option("--seeds", seeds)->delimiter(',')->capture_default_str();

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  if (*synth) return RunSynth(common, synth_args);
  if (*mfcc) return RunMfcc(common, manifest);
  if (*cluster) return RunCluster(common, manifest, features, k, seed, restarts);
  if (*mix) return RunMix(common, manifest, seed);
  if (*pretrain) return RunPretrain(common, manifest, labels, resume, stop_after);
  if (*recluster) {
    if (layer < 0) layer = LoadCheckpoint(checkpoint).config.encoder.tap_layer;
    return RunRecluster(common, checkpoint, manifest, layer, k, seed);
  }
  if (*probe) return RunProbe(common, checkpoint, manifest, steps, probe_lr);
  if (*gradcheck) return RunGradcheck(common, seed, coords, conv, head_only);
  if (*sweep) return RunSweep(common, sweep_synth, ratios, seeds);
  std::cerr << app.help();
  return 2;
}

}  // namespace
}  // namespace spkpt

int main(int argc, char** argv) {
  try {
    return spkpt::Main(argc, argv);
  } catch (const spkpt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
