// tests/acceptance.cc
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

// Acceptance suite: evaluates criteria 1-8 and prints one PASS/FAIL line per
// criterion, followed by the measured values.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "augment/utterance-mixing.h"
#include "base/error.h"
#include "base/io.h"
#include "base/rng.h"
#include "encoder/masking.h"
#include "losses/losses.h"
#include "pseudolabel/kmeans.h"
#include "quantizer/gumbel-quantizer.h"
#include "trainer/experiments.h"
#include "trainer/grad-check.h"

namespace spkpt {
namespace {

namespace fs = std::filesystem;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  Json values = Json::object();

  void Require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(fmt::format("[{}] {}", ok ? "ok" : "FAIL", what));
  }
};

class Timer {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Mat RandomMat(Eigen::Index r, Eigen::Index c, Rng* rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng->Gaussian();
  return m;
}

long double CosineLd(const RowVec& a, const RowVec& b) {
  long double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += (long double)a(i) * b(i);
    na += (long double)a(i) * a(i);
    nb += (long double)b(i) * b(i);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

long double SoftplusLd(long double x) { return std::log1p(std::exp(x)); }

// 1. Closed-form loss values.
Verdict LossOracles() {
  Verdict v;
  const int k = 16;
  PseudoLabelSequence labels;
  labels.utterance_id = "u";
  labels.k = k;
  for (int t = 0; t < 9; ++t) labels.labels.push_back(t % k);
  const double content =
      ContentLoss(Mat::Constant(9, k, -1.25), labels, MaskSet::FromIndices({0, 4, 8})).value;
  const double e_content = std::fabs(content - std::log(double(k)));

  const int V = 32;
  const double e_uniform =
      std::fabs(DiversityLoss(Mat::Constant(2, V, 1.0 / V)).value + std::log(double(V)) / V);
  Mat onehot = Mat::Zero(2, V);
  onehot(0, 3) = onehot(1, 17) = 1.0;
  const double e_onehot = std::fabs(DiversityLoss(onehot).value);

  Mat a(1, 3), q(1, 3);
  a << 1.0, 0.0, 0.0;
  q << 0.0, 2.0, 0.0;
  const std::vector<Mat> la{a}, qa{q};
  const double e_contrastive = std::fabs(ContrastiveLoss(la, qa, 1.0, 0, 1).value - std::log(2.0));

  const double worst = std::max({e_content, e_uniform, e_onehot, e_contrastive});
  v.Require(e_content < 1e-10, fmt::format("content(uniform) = ln k, error {:.2e}", e_content));
  v.Require(e_uniform < 1e-10, fmt::format("diversity(uniform) = -(ln V)/V, error {:.2e}", e_uniform));
  v.Require(e_onehot < 1e-10, fmt::format("diversity(one-hot) = 0, error {:.2e}", e_onehot));
  v.Require(e_contrastive < 1e-10,
            fmt::format("contrastive(sim=0, kappa=1, K=0) = ln 2, error {:.2e}", e_contrastive));
  v.values["max_error"] = worst;
  return v;
}

// 2a. Contrastive loss against a pair-by-pair enumeration over B=3, T=6.
double ContrastiveEnumerationError(uint64_t seed, int K, bool* draws_ok) {
  Rng rng(seed);
  const int B = 3, T = 6, d = 5;
  std::vector<Mat> taps, quantized;
  std::vector<MaskSet> masks;
  for (int b = 0; b < B; ++b) {
    taps.push_back(RandomMat(T, d, &rng));
    std::vector<int> idx;
    for (int t = 0; t < T; ++t)
      if (rng.Bernoulli(0.5) || t == b) idx.push_back(t);
    masks.push_back(MaskSet::FromIndices(idx));
    quantized.push_back(RandomMat(static_cast<Eigen::Index>(idx.size()), d, &rng));
  }
  LossWeights w;
  w.num_negatives = K;
  const ContrastiveResult r = ContrastiveLossFromTaps(taps, quantized, masks, w, seed * 7 + 1);

  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> negatives;
  for (const auto& term : r.terms)
    if (!term.positive)
      negatives[{term.anchor_utt, term.anchor_row}].push_back({term.target_utt, term.target_row});

  long double sum = 0;
  size_t count = 0;
  for (int b = 0; b < B; ++b) {
    size_t pool = 0;
    for (int o = 0; o < B; ++o)
      if (o != b) pool += masks[o].size();
    for (size_t i = 0; i < masks[b].size(); ++i) {
      const RowVec l = taps[b].row(masks[b].indices[i]);
      sum += SoftplusLd(-CosineLd(l, quantized[b].row(static_cast<Eigen::Index>(i))) / w.kappa);
      ++count;
      const auto& drawn = negatives[{b, static_cast<int>(i)}];
      std::set<std::pair<int, int>> distinct(drawn.begin(), drawn.end());
      if (drawn.size() != static_cast<size_t>(K)) *draws_ok = false;
      if (pool >= static_cast<size_t>(K) && distinct.size() != drawn.size()) *draws_ok = false;
      for (const auto& [nb, ni] : drawn) {
        if (nb == b || ni < 0 || ni >= quantized[nb].rows()) {
          *draws_ok = false;
          continue;
        }
        sum += SoftplusLd(CosineLd(l, quantized[nb].row(ni)) / w.kappa);
        ++count;
      }
    }
  }
  if (count != r.terms.size()) *draws_ok = false;
  return std::fabs(r.value - double(sum / count));
}

// 2b. Minimum two-means inertia over every 2-partition of the rows.
double BruteForceTwoMeans(const Mat& x) {
  const int n = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double sse = 0.0;
    for (unsigned side = 0; side < 2; ++side) {
      RowVec mean = RowVec::Zero(x.cols());
      int c = 0;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == side) {
          mean += x.row(i);
          ++c;
        }
      mean /= c;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == side) sse += (x.row(i) - mean).squaredNorm();
    }
    best = std::min(best, sse);
  }
  return best;
}

Verdict BruteForce() {
  Verdict v;
  Timer timer;
  double worst = 0.0;
  bool draws_ok = true;
  for (uint64_t seed = 1; seed <= 50; ++seed)
    for (int K : {1, 4, 9})
      worst = std::max(worst, ContrastiveEnumerationError(seed, K, &draws_ok));
  v.Require(worst < 1e-12, fmt::format("contrastive vs enumeration over 150 batches, max error {:.2e}", worst));
  v.Require(draws_ok, "negative draws come from other utterances, K per anchor, distinct when possible");

  Rng rng(2024);
  KmeansOptions opts;
  opts.restarts = 20;
  double gap = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + trial % 6;
    const Mat x = RandomMat(n, 1 + trial % 3, &rng);
    const double oracle = BruteForceTwoMeans(x);
    const double got = KmeansFit(x, 2, 5000 + static_cast<uint64_t>(trial), opts).inertia;
    gap = std::max(gap, (got - oracle) / std::max(1.0, oracle));
  }
  v.Require(gap <= 1e-12, fmt::format("k-means (n<=8, k=2, 20 restarts) vs exhaustive optimum over 300 sets, max relative gap {:.2e}", gap));
  Rng planar(8);
  int misses = 0;
  double planar_gap = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat x = RandomMat(8, 2, &planar);
    const double oracle = BruteForceTwoMeans(x);
    const double got = KmeansFit(x, 2, 9000 + static_cast<uint64_t>(trial), opts).inertia;
    const double rel = (got - oracle) / std::max(1.0, oracle);
    planar_gap = std::max(planar_gap, rel);
    if (rel > 1e-12) ++misses;
  }
  gap = std::max(gap, planar_gap);
  v.Require(misses == 0, fmt::format("k-means on 1000 sets of 8 random 2-D points vs all 2^8 assignments: "
                                     "{} misses, max relative gap {:.2e}", misses, planar_gap));
  const double secs = timer.Seconds();
  v.Require(secs < 10.0, fmt::format("runtime {:.2f} s < 10 s", secs));
  v.values = {{"contrastive_max_error", worst}, {"kmeans_max_gap", gap}, {"seconds", secs}};
  return v;
}

// 3. Gradient check through the full loss in soft-quantizer mode.
Verdict Gradients() {
  Verdict v;
  Timer timer;
  GradCheckOptions opts;
  const GradCheckReport r = RunGradCheck(opts);
  std::set<std::string> groups;
  for (const auto& c : r.coords) groups.insert(c.tensor);
  v.Require(r.coords.size() >= 200, fmt::format("{} coordinates sampled", r.coords.size()));
  v.Require(groups.size() == r.tensors.size(),
            fmt::format("every one of the {} parameter tensors sampled", r.tensors.size()));
  v.Require(r.max_rel_error < 1e-4, fmt::format("max relative error {:.3e} < 1e-4 (h = {})",
                                                r.max_rel_error, opts.step));
  const double secs = timer.Seconds();
  v.Require(secs < 120.0, fmt::format("runtime {:.2f} s < 120 s", secs));
  v.values = {{"max_rel_error", r.max_rel_error}, {"coords", r.coords.size()}, {"seconds", secs}};
  return v;
}

// 4. Utterance-mixing statistics over 10,000 seeded batches.
Verdict MixingStatistics() {
  Verdict v;
  Timer timer;
  const size_t B = 8, L = 2000;
  Batch batch;
  batch.length = L;
  const auto corpus = SynthCorpus(4, 2, double(L) / 16000.0, 16000, 3);
  for (const auto& u : corpus) batch.utterances.push_back(u);
  bool bits_ok = true, fraction_ok = true, verify_ok = true;
  double worst_fraction = 0.0;
  for (double p : {0.2, 0.5}) {
    std::vector<int64_t> lengths(L / 2 + 1, 0);
    int64_t selected = 0;
    for (uint64_t k = 0; k < 10000; ++k) {
      const MixedBatch m = MixBatch(batch, p, GainPolicy::UniformSnr(-5, 5), DeriveSeed(777, k));
      if (!VerifyMix(m).ok) verify_ok = false;
      std::vector<const MixSpec*> by_target(B, nullptr);
      for (const auto& s : m.specs) {
        by_target[static_cast<size_t>(s.target_index)] = &s;
        ++lengths[s.mix_length];
      }
      selected += static_cast<int64_t>(m.specs.size());
      for (size_t i = 0; i < B; ++i) {
        const auto& got = m.batch.utterances[i].waveform.samples;
        const auto& clean = batch.utterances[i].waveform.samples;
        const MixSpec* s = by_target[i];
        size_t changed_span = 0;
        for (size_t n = 0; n < L; ++n) {
          const bool inside = s && n >= s->target_start && n < s->target_start + s->mix_length;
          const bool same = std::memcmp(&got[n], &clean[n], sizeof(float)) == 0;
          if (!inside && !same) bits_ok = false;
          if (inside) ++changed_span;
        }
        const double frac = double(changed_span) / double(L);
        worst_fraction = std::max(worst_fraction, frac);
        if (frac > 0.5) fraction_ok = false;
      }
    }
    const double n = 10000.0 * B;
    const double rate = double(selected) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    v.Require(std::fabs(rate - p) < 3.0 * se,
              fmt::format("p={}: selection fraction {:.5f}, |diff| {:.2e} < 3 SE = {:.2e}", p, rate,
                          std::fabs(rate - p), 3.0 * se));
    const double expected = double(selected) / double(L / 2);
    double chi2 = 0.0;
    for (size_t l = 1; l <= L / 2; ++l) chi2 += std::pow(double(lengths[l]) - expected, 2) / expected;
    const double pvalue =
        1.0 - boost::math::cdf(boost::math::chi_squared(double(L / 2 - 1)), chi2);
    v.Require(lengths[0] == 0 && pvalue > 0.01,
              fmt::format("p={}: l uniform on 1..{}, chi-square {:.1f} (df {}), p-value {:.3f} > 0.01",
                          p, L / 2, chi2, L / 2 - 1, pvalue));
    v.values[fmt::format("p{}", p)] = {{"selection_fraction", rate}, {"chi2_pvalue", pvalue}};
  }
  v.Require(fraction_ok, fmt::format("mixed-region fraction never above 0.5 (max {:.4f})", worst_fraction));
  v.Require(bits_ok && verify_ok, "unmixed samples bit-identical to clean; mixed regions reconstruct exactly");
  const double secs = timer.Seconds();
  v.Require(secs < 60.0, fmt::format("runtime {:.2f} s < 60 s", secs));
  v.values["seconds"] = secs;
  return v;
}

// 5. Determinism and checkpoint resume through the command-line tool.
int RunCli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd =
      fmt::format("\"{}\" --log-level warn {} >>\"{}\" 2>&1", cli, args, log.string());
  return std::system(cmd.c_str());
}

Verdict Determinism(const std::string& cli, const fs::path& work) {
  Verdict v;
  Timer timer;
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path log = root / "cli.log";
  const std::string data = (root / "data").string(), feats = (root / "feats").string(),
                    labels = (root / "labels").string();
  bool ok = RunCli(cli, fmt::format("synth --out \"{}\"", data), log) == 0;
  ok = ok && RunCli(cli, fmt::format("mfcc --manifest \"{}/manifest.jsonl\" --out \"{}\"", data, feats), log) == 0;
  ok = ok && RunCli(cli, fmt::format("cluster --manifest \"{0}/manifest.jsonl\" --features \"{1}\" --out \"{2}\"",
                                     data, feats, labels), log) == 0;
  v.Require(ok, "synth, mfcc and cluster complete");
  if (!ok) return v;
  const std::string train = fmt::format("pretrain --manifest \"{}/manifest.jsonl\" --labels \"{}/labels.jsonl\"",
                                        data, labels);
  const fs::path a = root / "run-a", b = root / "run-b", c = root / "run-c";
  ok = RunCli(cli, fmt::format("{} --out \"{}\"", train, a.string()), log) == 0 &&
       RunCli(cli, fmt::format("{} --out \"{}\"", train, b.string()), log) == 0;
  v.Require(ok, "two full pretrain runs complete");
  if (!ok) return v;
  const std::string ma = ReadTextFile(a / "metrics.jsonl");
  const size_t lines = static_cast<size_t>(std::count(ma.begin(), ma.end(), '\n'));
  v.Require(ma == ReadTextFile(b / "metrics.jsonl"),
            fmt::format("identical seeds: metrics logs bit-identical ({} records, FNV {})", lines,
                        HexU64(Fnv1a64(ma))));
  v.Require(ReadTextFile(a / "final" / "checkpoint.bin") == ReadTextFile(b / "final" / "checkpoint.bin"),
            "identical seeds: final checkpoints bit-identical");

  const int64_t half = static_cast<int64_t>(lines / 2);
  ok = RunCli(cli, fmt::format("{} --out \"{}\" --stop-after {}", train, c.string(), half), log) == 0 &&
       RunCli(cli, fmt::format("{} --out \"{}\" --resume \"{}\"", train, c.string(), (c / "final").string()), log) == 0;
  v.Require(ok, fmt::format("interrupted run (stop after {}) and resume complete", half));
  if (!ok) return v;
  v.Require(ReadTextFile(c / "metrics.jsonl") == ma,
            "save at mid-run + resume: metrics log bit-identical to the uninterrupted run");
  v.Require(ReadTextFile(c / "final" / "checkpoint.bin") == ReadTextFile(a / "final" / "checkpoint.bin"),
            "save at mid-run + resume: final checkpoint bit-identical");
  const double secs = timer.Seconds();
  v.Require(secs < 300.0, fmt::format("runtime {:.1f} s < 300 s", secs));
  v.values = {{"records", lines}, {"seconds", secs}};
  return v;
}

double Mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double y : x) s += y;
  return s / double(x.size());
}

const std::vector<uint64_t> kSeeds = {1, 2, 3};

// 6. Desk-scale training behaviour.
Verdict DeskTraining(const fs::path& work) {
  Verdict v;
  Timer timer;
  TrainConfig cfg;
  const DeskData data = PrepareDeskData(cfg, DeskSetup{});
  const double chance = 1.0 / cfg.encoder.num_classes;
  std::vector<double> sep_on, sep_off;
  Json runs = Json::array();
  for (uint64_t seed : kSeeds)
    for (bool speaker : {true, false}) {
      TrainConfig c = cfg;
      c.use_speaker_loss = speaker;
      const DeskRun r = RunDesk(c, data, seed, work / fmt::format("desk/seed{}-{}", seed, speaker ? "on" : "off"));
      runs.push_back(DeskRunToJson(r));
      (speaker ? sep_on : sep_off).push_back(r.separability_clean);
      const double early = r.summary.at("early_mean_total").get<double>();
      const double final_total = r.summary.at("tail_mean_total").get<double>();
      const double acc = r.summary.at("tail_masked_accuracy").get<double>();
      const std::string tag = fmt::format("seed {} speaker loss {}", seed, speaker ? "on" : "off");
      v.Require(final_total < 0.8 * early,
                fmt::format("(a) {}: final total {:.4f} < 0.8 x step-10 mean {:.4f} = {:.4f}", tag,
                            final_total, early, 0.8 * early));
      v.Require(acc > 2.0 * chance, fmt::format("(b) {}: masked accuracy {:.4f} > 2/k = {:.4f}", tag,
                                                acc, 2.0 * chance));
    }
  const double on = Mean(sep_on), off = Mean(sep_off);
  v.Require(on - off >= 0.05,
            fmt::format("(c) tap-layer separability, mean over seeds: on {:.4f} vs off {:.4f}, "
                        "difference {:+.4f} >= +0.05",
                        on, off, on - off));
  for (size_t i = 0; i < kSeeds.size(); ++i)
    v.notes.push_back(fmt::format("      seed {}: separability on {:.4f} off {:.4f}", kSeeds[i],
                                  sep_on[i], sep_off[i]));
  const double secs = timer.Seconds();
  v.Require(secs < 900.0, fmt::format("runtime {:.1f} s < 900 s", secs));
  v.values = {{"separability_on", on}, {"separability_off", off}, {"runs", runs}, {"seconds", secs}};
  return v;
}

// 7. Mixing-ratio sweep, separability on overlapped utterances.
Verdict MixSweep(const fs::path& work) {
  Verdict v;
  Timer timer;
  TrainConfig cfg;
  const DeskData data = PrepareDeskData(cfg, DeskSetup{});
  std::vector<DeskRun> runs;
  bool completed = true;
  try {
    runs = RunMixSweep(cfg, data, kMixSweepRatios, kSeeds, work / "sweep");
  } catch (const Error& e) {
    completed = false;
    v.notes.push_back(fmt::format("sweep aborted: {}", e.what()));
  }
  v.Require(completed && runs.size() == kMixSweepRatios.size() * kSeeds.size(),
            fmt::format("{} of {} sweep runs complete", runs.size(),
                        kMixSweepRatios.size() * kSeeds.size()));
  if (!completed) return v;
  std::map<double, std::vector<double>> overlap;
  for (const auto& r : runs) overlap[r.mix_probability].push_back(r.separability_overlap);
  const double base = Mean(overlap[0.0]);
  for (double p : {0.2, 0.5}) {
    const double m = Mean(overlap[p]);
    v.Require(m >= base, fmt::format("p={}: overlap separability {:.4f} >= p=0.0 value {:.4f}", p, m, base));
    v.values[fmt::format("p{}", p)] = m;
  }
  v.values["p0.0"] = base;
  for (const auto& line : [&] {
         std::vector<std::string> out;
         const std::string table = FormatSweepTable(runs);
         size_t start = 0;
         while (start < table.size()) {
           const size_t nl = table.find('\n', start);
           out.push_back("      " + table.substr(start, nl - start));
           start = nl == std::string::npos ? table.size() : nl + 1;
         }
         return out;
       }())
    v.notes.push_back(line);
  const double secs = timer.Seconds();
  v.Require(secs < 2700.0, fmt::format("runtime {:.1f} s < 2700 s", secs));
  v.values["seconds"] = secs;
  return v;
}

// 8. Quantizer behaviour.
Verdict Quantizer() {
  Verdict v;
  Rng rng(88);
  double worst_sum = 0.0;
  bool monotone = true, straight_through = true;
  for (int trial = 0; trial < 500; ++trial) {
    const int G = 1 + trial % 3, V = 2 + trial % 31;
    Mat logits = RandomMat(G, V, &rng) * (0.1 + 5.0 * rng.Uniform());
    const Mat noise = SampleGumbelNoise(G, V, &rng);
    RowVec prev = RowVec::Constant(G, 2.0);
    for (double tau = 0.02; tau < 50.0; tau *= 1.25) {
      const Mat p = GumbelProbs(logits, tau, noise);
      for (int g = 0; g < G; ++g) {
        worst_sum = std::max(worst_sum, std::fabs(p.row(g).sum() - 1.0));
        const double mx = p.row(g).maxCoeff();
        if (mx > prev(g) + 1e-15) monotone = false;
        prev(g) = mx;
      }
    }
  }
  QuantizerConfig cfg;
  cfg.input_dim = cfg.output_dim = 16;
  cfg.entries = 8;
  cfg.entry_dim = 4;
  for (int trial = 0; trial < 100; ++trial) {
    const QuantizerParams params = InitQuantizer(cfg, &rng);
    const Mat latent = RandomMat(5, 16, &rng);
    const QuantizeOutput out = Quantize(latent, params, cfg, 0.5 + rng.Uniform(), rng.NextU64(), true);
    for (Eigen::Index t = 0; t < 5; ++t) {
      RowVec concat(cfg.groups * cfg.entry_dim);
      for (int g = 0; g < cfg.groups; ++g) {
        const RowVec z = out.logits.block(t, g * cfg.entries, 1, cfg.entries) +
                         out.noise.block(t, g * cfg.entries, 1, cfg.entries);
        Eigen::Index arg;
        z.maxCoeff(&arg);
        if (out.hard_indices[static_cast<size_t>(t * cfg.groups + g)] != arg) straight_through = false;
        concat.segment(g * cfg.entry_dim, cfg.entry_dim) = params.codebook.row(g * cfg.entries + arg);
      }
      const RowVec q = concat * params.proj_out.w + params.proj_out.b;
      if ((out.q.row(t) - q).cwiseAbs().maxCoeff() > 1e-12) straight_through = false;
    }
  }
  v.Require(worst_sum < 1e-6, fmt::format("probability rows sum to 1, max deviation {:.2e}", worst_sum));
  v.Require(monotone, "max probability non-increasing in tau on fixed logits + noise (500 instances)");
  v.Require(straight_through, "hard forward uses the argmax codebook entries (500 frames)");
  v.values = {{"max_row_sum_error", worst_sum}};
  return v;
}

}  // namespace
}  // namespace spkpt

int main(int argc, char** argv) {
  using namespace spkpt;
  CLI::App app{"Acceptance criteria 1-8"};
  std::vector<int> only;
  std::string work = (std::filesystem::temp_directory_path() / "spkpt-acceptance").string();
  std::string cli = SPKPT_CLI_PATH;
  std::string report;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--work", work, "Scratch directory for training runs")->capture_default_str();
  app.add_option("--cli", cli, "Path to the spkpt tool")->capture_default_str();
  app.add_option("--report", report, "Write measured values as JSON");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"loss-value oracles", [] { return LossOracles(); }},
      {"brute-force equivalence", [] { return BruteForce(); }},
      {"gradient suite", [] { return Gradients(); }},
      {"mixing statistics", [] { return MixingStatistics(); }},
      {"determinism and checkpointing", [&] { return Determinism(cli, work); }},
      {"desk-scale training behavior", [&] { return DeskTraining(work); }},
      {"mixing-ratio sweep", [&] { return MixSweep(work); }},
      {"quantizer behavior", [] { return Quantizer(); }},
  };
  std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  Json doc = Json::object();
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.Require(false, fmt::format("aborted: {}", e.what()));
    }
    if (!v.pass) ++failed;
    fmt::print("CRITERION {} {}: {}\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first);
    for (const auto& n : v.notes) fmt::print("    {}\n", n);
    std::fflush(stdout);
    doc[std::to_string(id)] = {{"name", criteria[i].first}, {"pass", v.pass}, {"values", v.values}};
  }
  if (!report.empty()) WriteJsonFile(report, doc);
  return failed == 0 ? 0 : 1;
}
