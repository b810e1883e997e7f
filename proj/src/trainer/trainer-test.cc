// trainer/trainer-test.cc
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
#include <filesystem>
#include <set>

#include "base/error.h"
#include "base/io.h"
#include "trainer/checkpoint.h"
#include "trainer/experiments.h"
#include "trainer/trainer.h"

namespace spkpt {
namespace {

namespace fs = std::filesystem;

TrainConfig TinyConfig() {
  TrainConfig cfg;
  cfg.steps = 8;
  cfg.batch_size = 4;
  cfg.utterance_length = 4000;
  cfg.encoder.model_dim = 16;
  cfg.encoder.num_layers = 2;
  cfg.encoder.num_heads = 2;
  cfg.encoder.ffn_dim = 32;
  cfg.encoder.tap_layer = 1;
  cfg.encoder.num_classes = 4;
  cfg.encoder.mask_span = 3;
  cfg.encoder.mask_start_prob = 0.2;
  cfg.quantizer.entries = 4;
  cfg.quantizer.entry_dim = 8;
  cfg.mix_probability = 0.5;
  return cfg;
}

const DeskData& TinyData() {
  static const DeskData data = [] {
    DeskSetup setup;
    setup.num_speakers = 4;
    setup.utts_per_speaker = 3;
    setup.duration_sec = 0.25;
    setup.kmeans_restarts = 1;
    return PrepareDeskData(TinyConfig(), setup);
  }();
  return data;
}

fs::path TempDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

bool SameParams(const ModelParams& a, const ModelParams& b) {
  const auto ta = a.Tensors(), tb = b.Tensors();
  if (ta.size() != tb.size()) return false;
  for (size_t i = 0; i < ta.size(); ++i)
    if (ta[i].first != tb[i].first || !(*ta[i].second == *tb[i].second)) return false;
  return true;
}

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  cfg.steps = 100;
  cfg.learning_rate = 1.0;
  CHECK(cfg.WarmupSteps() == 8);
  CHECK(cfg.LearningRate(0) == doctest::Approx(1.0 / 8));
  CHECK(cfg.LearningRate(7) == 1.0);
  CHECK(cfg.LearningRate(8) == 1.0);
  CHECK(cfg.LearningRate(54) == doctest::Approx(0.5));
  CHECK(cfg.LearningRate(99) == doctest::Approx(1.0 / 92));
  for (int64_t s = 9; s < 100; ++s) CHECK(cfg.LearningRate(s) < cfg.LearningRate(s - 1));
  cfg.steps = 1;
  CHECK(cfg.LearningRate(0) == 1.0);
}

TEST_CASE("config json, overrides and unknown keys") {
  TrainConfig cfg = TinyConfig();
  const Json j = cfg;
  const TrainConfig back = j.get<TrainConfig>();
  CHECK(ConfigHash(back) == ConfigHash(cfg));
  ApplyOverride(&cfg, "loss.kappa=0.25");
  CHECK(cfg.loss.kappa == 0.25);
  ApplyOverride(&cfg, "seeds.data=17");
  CHECK(cfg.seeds.data == 17);
  ApplyOverride(&cfg, "gain_policy=fixed:1");
  CHECK(cfg.gain_policy == "fixed:1");
  CHECK(ConfigHash(cfg) != ConfigHash(back));
  CHECK_THROWS_AS(ApplyOverride(&cfg, "loss.bogus=1"), Error);
  CHECK_THROWS_AS(ApplyOverride(&cfg, "no_equals_sign"), Error);
  Json bad = j;
  bad["encoder"]["mystery"] = 3;
  CHECK_THROWS_AS(bad.get<TrainConfig>(), Error);
  TrainConfig invalid = TinyConfig();
  invalid.encoder.input_dim = 13;
  CHECK_THROWS_AS(invalid.Validate(), Error);
}

TEST_CASE("training data checks provenance, k and alignment") {
  const TrainConfig cfg = TinyConfig();
  const DeskData& d = TinyData();
  CHECK_NOTHROW(PrepareTrainData(cfg, d.corpus, d.labels));
  auto mixed = d.labels;
  mixed[2].provenance = "mixed";
  CHECK_THROWS_WITH_AS(PrepareTrainData(cfg, d.corpus, mixed), doctest::Contains("provenance"),
                       Error);
  auto short_labels = d.labels;
  short_labels[0].labels.pop_back();
  CHECK_THROWS_WITH_AS(PrepareTrainData(cfg, d.corpus, short_labels),
                       doctest::Contains("misalignment"), Error);
  auto wrong_k = d.labels;
  wrong_k[1].k = 5;
  CHECK_THROWS_AS(PrepareTrainData(cfg, d.corpus, wrong_k), Error);
  auto missing = d.labels;
  missing.pop_back();
  CHECK_THROWS_AS(PrepareTrainData(cfg, d.corpus, missing), Error);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  TrainConfig cfg = TinyConfig();
  cfg.learning_rate = 0.0;
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  const TrainState init = InitTrainState(cfg, data);
  const TrainResult r = Train(cfg, data, {});
  CHECK(r.state.step == cfg.steps);
  CHECK(SameParams(r.state.model.params, init.model.params));
  CHECK(r.records.size() == static_cast<size_t>(cfg.steps));
}

TEST_CASE("a single step produces a complete record") {
  TrainConfig cfg = TinyConfig();
  cfg.steps = 1;
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  const TrainResult r = Train(cfg, data, {});
  REQUIRE(r.records.size() == 1);
  const Json& rec = r.records[0];
  for (const char* key : {"step", "total", "content", "contrastive", "diversity", "speaker",
                          "learning_rate", "tau", "grad_norm", "masked_accuracy",
                          "mixed_utterances", "codebook_perplexity"})
    CHECK_MESSAGE(rec.contains(key), key);
  CHECK(rec["step"] == 0);
  const double total = rec["total"].get<double>();
  const double expect = rec["speaker"].get<double>() + cfg.loss.beta * rec["content"].get<double>();
  CHECK(std::fabs(total - expect) < 1e-12);
  CHECK(rec["tau"].get<double>() == cfg.quantizer.tau_start);
}

TEST_CASE("disabling the speaker loss trains on content alone") {
  TrainConfig cfg = TinyConfig();
  cfg.steps = 2;
  cfg.use_speaker_loss = false;
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  for (const auto& rec : Train(cfg, data, {}).records) {
    CHECK(rec["speaker"].get<double>() == 0.0);
    CHECK(rec["total"].get<double>() == cfg.loss.beta * rec["content"].get<double>());
  }
}

TEST_CASE("identical seeds give bit-identical metrics logs") {
  const TrainConfig cfg = TinyConfig();
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  const auto a = TempDir("spkpt-train-a"), b = TempDir("spkpt-train-b");
  TrainOptions oa, ob;
  oa.out_dir = a;
  ob.out_dir = b;
  Train(cfg, data, oa);
  Train(cfg, data, ob);
  CHECK(ReadTextFile(a / "metrics.jsonl") == ReadTextFile(b / "metrics.jsonl"));
  CHECK(ReadTextFile(a / "final" / "checkpoint.bin") == ReadTextFile(b / "final" / "checkpoint.bin"));
  TrainConfig other = cfg;
  other.seeds.masking = 99;
  TrainOptions oc;
  oc.out_dir = TempDir("spkpt-train-c");
  Train(other, data, oc);
  CHECK(ReadTextFile(a / "metrics.jsonl") != ReadTextFile(oc.out_dir / "metrics.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(oc.out_dir);
}

TEST_CASE("resuming mid-run matches an uninterrupted run") {
  TrainConfig cfg = TinyConfig();
  cfg.checkpoint_every = 3;
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  const auto full = TempDir("spkpt-resume-full"), part = TempDir("spkpt-resume-part");
  TrainOptions of;
  of.out_dir = full;
  const TrainResult whole = Train(cfg, data, of);

  TrainOptions o1;
  o1.out_dir = part;
  o1.stop_after = 5;
  Train(cfg, data, o1);
  CHECK(fs::exists(part / "checkpoint-3"));
  TrainOptions o2;
  o2.out_dir = part;
  o2.resume_from = part / "checkpoint-3";
  const TrainResult resumed = Train(cfg, data, o2);
  CHECK(resumed.records.size() == 5);
  CHECK(ReadTextFile(full / "metrics.jsonl") == ReadTextFile(part / "metrics.jsonl"));
  CHECK(SameParams(whole.state.model.params, resumed.state.model.params));
  CHECK(ReadTextFile(full / "final" / "checkpoint.bin") ==
        ReadTextFile(part / "final" / "checkpoint.bin"));
  fs::remove_all(full);
  fs::remove_all(part);
}

TEST_CASE("checkpoint round trip") {
  const TrainConfig cfg = TinyConfig();
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  TrainState st = InitTrainState(cfg, data);
  TrainStep(cfg, data, &st);
  TrainStep(cfg, data, &st);
  const auto dir = TempDir("spkpt-ckpt");
  SaveCheckpoint(dir, cfg, st);
  const LoadedCheckpoint ck = LoadCheckpoint(dir);
  CHECK(ck.state.step == 2);
  CHECK(ConfigHash(ck.config) == ConfigHash(cfg));
  CHECK(SameParams(ck.state.model.params, st.model.params));
  CHECK(SameParams(ck.state.adam_m, st.adam_m));
  CHECK(SameParams(ck.state.adam_v, st.adam_v));
  CHECK(ck.state.model.input_mean == st.model.input_mean);
  CHECK(ck.state.model.input_scale == st.model.input_scale);
  CHECK(ck.state.metrics_tail.size() == 2);

  std::string blob = ReadTextFile(dir / "checkpoint.bin");
  blob.resize(blob.size() - 8);
  WriteTextFile(dir / "checkpoint.bin", blob);
  CHECK_THROWS_AS(LoadCheckpoint(dir), Error);
  CHECK_THROWS_AS(LoadCheckpoint(dir / "absent"), Error);
  fs::remove_all(dir);
}

TEST_CASE("non-finite loss aborts with the step number") {
  const TrainConfig cfg = TinyConfig();
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  TrainState st = InitTrainState(cfg, data);
  TrainStep(cfg, data, &st);
  st.model.params.Tensors().back().second->data()[0] = NAN;
  CHECK_THROWS_WITH_AS(TrainStep(cfg, data, &st), doctest::Contains("step 1"), Error);
}

TEST_CASE("speaker-distinct batches train") {
  TrainConfig cfg = TinyConfig();
  cfg.steps = 2;
  cfg.distinct_speaker_batches = true;
  const TrainData data = PrepareTrainData(cfg, TinyData().corpus, TinyData().labels);
  TrainState st = InitTrainState(cfg, data);
  const StepBatch b = MakeStepBatch(cfg, data, st.model, 0);
  std::set<std::string> speakers;
  for (const auto& id : b.ids) speakers.insert(id.substr(0, 5));
  CHECK(speakers.size() == 4);
  CHECK_NOTHROW(Train(cfg, data, {}));
}

TEST_CASE("run summary") {
  std::vector<Json> recs;
  for (int i = 0; i < 20; ++i)
    recs.push_back({{"step", i}, {"total", 20.0 - i}, {"content", 1.0}, {"contrastive", 0.5},
                    {"masked_accuracy", 0.25}});
  const Json s = SummarizeRun(recs);
  CHECK(s["steps"] == 20);
  CHECK(s["first_total"] == 20.0);
  CHECK(s["final_total"] == 1.0);
  CHECK(s["early_mean_total"].get<double>() == doctest::Approx(15.5));
  CHECK(s["tail_mean_total"].get<double>() == doctest::Approx(1.5));
  CHECK(TailMeanTotal(recs, 0.5) == doctest::Approx(5.5));
  CHECK_THROWS_AS(SummarizeRun(std::vector<Json>{}), Error);
}

}  // namespace
}  // namespace spkpt
