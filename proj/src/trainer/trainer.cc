// trainer/trainer.cc
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

#include "trainer/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

#include "augment/utterance-mixing.h"
#include "base/error.h"
#include "base/rng.h"
#include "dsp/mfcc.h"
#include "encoder/masking.h"
#include "trainer/checkpoint.h"

namespace spkpt {

const PseudoLabelSequence& TrainData::LabelsFor(const std::string& utterance_id) const {
  for (size_t i = 0; i < utterances.size(); ++i)
    if (utterances[i].id == utterance_id) return labels[i];
  Fail("no labels for utterance '{}'", utterance_id);
}

static int FramesForLength(const TrainConfig& cfg, size_t length) {
  if (cfg.encoder.UsesConv()) return EncoderFrames(cfg.encoder, static_cast<Eigen::Index>(length));
  return NumFrames(length, cfg.mfcc);
}

TrainData PrepareTrainData(const TrainConfig& cfg, std::span<const Utterance> corpus,
                           std::span<const PseudoLabelSequence> labels) {
  cfg.Validate();
  if (corpus.size() < static_cast<size_t>(cfg.batch_size))
    Fail("corpus has {} utterances, batch_size is {}", corpus.size(), cfg.batch_size);
  std::map<std::string, const PseudoLabelSequence*> by_id;
  for (const auto& l : labels) by_id[l.utterance_id] = &l;
  const size_t L = static_cast<size_t>(cfg.utterance_length);
  const int frames = FramesForLength(cfg, L);
  TrainData data;
  for (const auto& u : corpus) {
    auto it = by_id.find(u.id);
    if (it == by_id.end()) Fail("utterance '{}' has no label sequence", u.id);
    const PseudoLabelSequence& seq = *it->second;
    seq.Validate();
    if (seq.provenance != "clean")
      Fail("labels for '{}' have provenance '{}', content targets must come from clean audio",
           u.id, seq.provenance);
    if (seq.k != cfg.encoder.num_classes)
      Fail("labels for '{}' have k={}, encoder.num_classes is {}", u.id, seq.k,
           cfg.encoder.num_classes);
    if (static_cast<int>(seq.size()) != frames)
      Fail("label/feature misalignment for '{}': {} labels, {} frames at length {}", u.id,
           seq.size(), frames, L);
    Utterance fitted = u;
    fitted.waveform = FitToLength(u.waveform, L);
    data.utterances.push_back(std::move(fitted));
    data.labels.push_back(seq);
  }
  return data;
}

Mat ModelInput(const TrainConfig& cfg, const Model& model, const Waveform& wave) {
  if (cfg.encoder.UsesConv()) {
    Mat col(static_cast<Eigen::Index>(wave.samples.size()), 1);
    for (size_t i = 0; i < wave.samples.size(); ++i)
      col(static_cast<Eigen::Index>(i), 0) = wave.samples[i];
    return col;
  }
  return NormalizeInput(model, Mfcc(wave, cfg.mfcc).frames);
}

std::vector<Mat> HiddenStates(const TrainConfig& cfg, const Model& model, const Waveform& wave) {
  const Mat input = ModelInput(cfg, model, wave);
  return EncoderForward(model.encoder_cfg, model.params.encoder, input, MaskSet{}).hidden;
}

TrainState InitTrainState(const TrainConfig& cfg, const TrainData& data) {
  cfg.Validate();
  TrainState st;
  st.model = InitModel(cfg.encoder, cfg.quantizer, cfg.seeds.model);
  if (!cfg.encoder.UsesConv()) {
    std::vector<Mat> feats;
    Eigen::Index rows = 0;
    for (const auto& u : data.utterances) {
      feats.push_back(Mfcc(u.waveform, cfg.mfcc).frames);
      rows += feats.back().rows();
    }
    Mat all(rows, cfg.mfcc.OutputDim());
    Eigen::Index r = 0;
    for (const auto& f : feats) {
      all.middleRows(r, f.rows()) = f;
      r += f.rows();
    }
    SetInputStats(&st.model, all);
  }
  st.adam_m = ZerosLike(st.model.params);
  st.adam_v = ZerosLike(st.model.params);
  return st;
}

StepBatch MakeStepBatch(const TrainConfig& cfg, const TrainData& data, const Model& model,
                        int64_t step) {
  const auto s = static_cast<uint64_t>(step);
  const auto B = static_cast<size_t>(cfg.batch_size);
  const auto L = static_cast<size_t>(cfg.utterance_length);
  const Batch batch = cfg.distinct_speaker_batches
                          ? MakeSpeakerDistinctBatch(data.utterances, B, L,
                                                     DeriveSeed(cfg.seeds.data, s))
                          : MakeBatch(data.utterances, B, L, DeriveSeed(cfg.seeds.data, s));
  MixOptions mix_opts;
  mix_opts.exclude_self = cfg.mix_exclude_self;
  const MixedBatch mixed = MixBatch(batch, cfg.mix_probability, GainPolicy::Parse(cfg.gain_policy),
                                    DeriveSeed(cfg.seeds.mixing, s), mix_opts);
  StepBatch out;
  out.specs = mixed.specs;
  out.clipped_samples = mixed.clipped_samples;
  for (size_t b = 0; b < mixed.batch.size(); ++b) {
    const Utterance& u = mixed.batch.utterances[b];
    const PseudoLabelSequence& labels = data.LabelsFor(mixed.clean.utterances[b].id);
    if (labels.utterance_id != u.id || labels.provenance != "clean")
      Fail("step {}: content targets for '{}' are not clean-audio labels of that utterance", step,
           u.id);
    Mat input = ModelInput(cfg, model, u.waveform);
    const int frames = EncoderFrames(cfg.encoder, input.rows());
    if (static_cast<int>(labels.size()) != frames)
      Fail("step {}: label/feature misalignment for '{}' ({} labels, {} frames)", step, u.id,
           labels.size(), frames);
    out.inputs.masks.push_back(SampleMask(frames, cfg.encoder.mask_span,
                                          cfg.encoder.mask_start_prob,
                                          DeriveSeed(cfg.seeds.masking, s, b), true));
    out.inputs.inputs.push_back(std::move(input));
    out.inputs.labels.push_back(labels);
    out.ids.push_back(u.id);
  }
  return out;
}

static double GlobalNorm(const ModelParams& g) {
  double ss = 0.0;
  for (const auto& [name, m] : g.Tensors()) ss += m->squaredNorm();
  return std::sqrt(ss);
}

static double Perplexity(const Mat& usage) {
  if (usage.size() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index g = 0; g < usage.rows(); ++g) {
    double h = 0.0;
    for (Eigen::Index v = 0; v < usage.cols(); ++v)
      if (usage(g, v) > 0.0) h -= usage(g, v) * std::log(usage(g, v));
    sum += std::exp(h);
  }
  return sum / double(usage.rows());
}

Json TrainStep(const TrainConfig& cfg, const TrainData& data, TrainState* state) {
  const int64_t step = state->step;
  if (step >= cfg.steps) Fail("step {} is past the configured {} steps", step, cfg.steps);
  const StepBatch sb = MakeStepBatch(cfg, data, state->model, step);
  const auto s = static_cast<uint64_t>(step);

  BatchLossOptions opts;
  opts.weights = cfg.loss;
  opts.use_speaker_loss = cfg.use_speaker_loss;
  opts.hard = true;
  opts.tau = state->model.quantizer_cfg.Temperature(step, cfg.steps);
  opts.noise_seed = DeriveSeed(cfg.seeds.gumbel, s);
  opts.negative_seed = DeriveSeed(cfg.seeds.negatives, s);

  ModelParams grads = ZerosLike(state->model.params);
  BatchLossResult res;
  try {
    res = ComputeBatchLoss(state->model, sb.inputs, opts, &grads);
  } catch (const Error& e) {
    Fail("step {}: {}", step, e.what());
  }
  const LossBreakdown& loss = res.loss;
  if (!std::isfinite(loss.total) || !std::isfinite(loss.content) ||
      !std::isfinite(loss.contrastive) || !std::isfinite(loss.diversity))
    Fail("non-finite loss at step {}: total={} content={} contrastive={} diversity={}", step,
         loss.total, loss.content, loss.contrastive, loss.diversity);
  const double gnorm = GlobalNorm(grads);
  if (!std::isfinite(gnorm)) Fail("non-finite gradient at step {}", step);

  double clip_scale = 1.0;
  if (cfg.grad_clip > 0.0 && gnorm > cfg.grad_clip) clip_scale = cfg.grad_clip / gnorm;
  const double lr = cfg.LearningRate(step);
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, double(step + 1));
  const double c2 = 1.0 - std::pow(b2, double(step + 1));
  auto params = state->model.params.Tensors();
  auto gs = grads.Tensors();
  auto ms = state->adam_m.Tensors();
  auto vs = state->adam_v.Tensors();
  for (size_t i = 0; i < params.size(); ++i) {
    Mat& p = *params[i].second;
    const Mat& g = *gs[i].second;
    Mat& m = *ms[i].second;
    Mat& v = *vs[i].second;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double gj = g.data()[j] * clip_scale;
      m.data()[j] = b1 * m.data()[j] + (1.0 - b1) * gj;
      v.data()[j] = b2 * v.data()[j] + (1.0 - b2) * gj * gj;
      const double mhat = m.data()[j] / c1;
      const double vhat = v.data()[j] / c2;
      p.data()[j] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
  state->step = step + 1;

  Json rec = LossBreakdownToJson(loss);
  rec["step"] = step;
  rec["learning_rate"] = lr;
  rec["tau"] = opts.tau;
  rec["grad_norm"] = gnorm;
  rec["masked_accuracy"] = double(res.correct_masked) / double(loss.masked_frames);
  rec["mixed_utterances"] = sb.specs.size();
  rec["clipped_samples"] = sb.clipped_samples;
  rec["codebook_perplexity"] = Perplexity(res.usage);
  state->metrics_tail.push_back(rec);
  const size_t keep = static_cast<size_t>(std::max(cfg.metrics_tail, 0));
  if (state->metrics_tail.size() > keep)
    state->metrics_tail.erase(state->metrics_tail.begin(),
                              state->metrics_tail.end() - static_cast<std::ptrdiff_t>(keep));
  return rec;
}

double TailMeanTotal(std::span<const Json> records, double fraction) {
  if (records.empty()) Fail("no metrics records");
  const size_t n = records.size();
  const size_t tail =
      std::clamp<size_t>(static_cast<size_t>(std::ceil(fraction * double(n))), 1, n);
  double sum = 0.0;
  for (size_t i = n - tail; i < n; ++i) sum += records[i].at("total").get<double>();
  return sum / double(tail);
}

Json SummarizeRun(std::span<const Json> records) {
  if (records.empty()) Fail("no metrics records");
  const size_t n = records.size();
  const size_t head = std::min<size_t>(10, n);
  double early = 0.0;
  for (size_t i = 0; i < head; ++i) early += records[i].at("total").get<double>();
  early /= double(head);
  const size_t tail = std::max<size_t>(1, static_cast<size_t>(std::ceil(0.1 * double(n))));
  double acc = 0.0, content = 0.0, contrastive = 0.0;
  for (size_t i = n - tail; i < n; ++i) {
    acc += records[i].at("masked_accuracy").get<double>();
    content += records[i].at("content").get<double>();
    contrastive += records[i].at("contrastive").get<double>();
  }
  Json s;
  s["steps"] = n;
  s["first_total"] = records.front().at("total");
  s["final_total"] = records.back().at("total");
  s["early_mean_total"] = early;
  s["tail_mean_total"] = TailMeanTotal(records);
  s["tail_mean_content"] = content / double(tail);
  s["tail_mean_contrastive"] = contrastive / double(tail);
  s["tail_masked_accuracy"] = acc / double(tail);
  return s;
}

static std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  const std::string text = ReadTextFile(path);
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    if (nl > pos) lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

TrainResult Train(const TrainConfig& cfg, const TrainData& data, const TrainOptions& opts) {
  cfg.Validate();
  TrainResult result;
  if (opts.resume_from) {
    LoadedCheckpoint ck = LoadCheckpoint(*opts.resume_from);
    if (ConfigHash(ck.config) != ConfigHash(cfg))
      spdlog::warn("resuming from a checkpoint written with a different config");
    result.state = std::move(ck.state);
  } else {
    result.state = InitTrainState(cfg, data);
  }
  TrainState& st = result.state;
  const int64_t stop = opts.stop_after < 0 ? cfg.steps : std::min(opts.stop_after, cfg.steps);

  std::vector<Json> all;  // full stream, including records from before a resume
  std::string log_text;
  const bool write = !opts.out_dir.empty();
  const std::filesystem::path metrics_path = opts.out_dir / "metrics.jsonl";
  if (write && opts.resume_from) {
    for (const auto& line : ReadLines(metrics_path)) {
      Json rec = Json::parse(line);
      if (rec.at("step").get<int64_t>() >= st.step) break;
      log_text += line + "\n";
      all.push_back(std::move(rec));
    }
  }

  while (st.step < stop) {
    Json rec = TrainStep(cfg, data, &st);
    if (st.step % 50 == 0 || st.step == stop)
      spdlog::info("step {}/{} total={:.4f} content={:.4f} acc={:.3f}", st.step, cfg.steps,
                   rec["total"].get<double>(), rec["content"].get<double>(),
                   rec["masked_accuracy"].get<double>());
    if (opts.on_record) opts.on_record(rec);
    log_text += rec.dump() + "\n";
    all.push_back(rec);
    result.records.push_back(std::move(rec));
    if (write && cfg.checkpoint_every > 0 && st.step % cfg.checkpoint_every == 0 && st.step < stop)
      SaveCheckpoint(opts.out_dir / fmt::format("checkpoint-{}", st.step), cfg, st);
  }
  if (!all.empty() || !result.records.empty())
    result.summary = SummarizeRun(all.empty() ? result.records : all);
  if (write) {
    WriteTextFile(metrics_path, log_text);
    if (opts.write_final_checkpoint) SaveCheckpoint(opts.out_dir / "final", cfg, st);
    if (!result.summary.is_null()) WriteJsonFile(opts.out_dir / "summary.json", result.summary);
  }
  return result;
}

}  // namespace spkpt
