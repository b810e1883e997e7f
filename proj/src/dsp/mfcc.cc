// dsp/mfcc.cc
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

#include "dsp/mfcc.h"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "base/error.h"

namespace spkpt {

namespace {

// Real-to-complex FFT of one fixed size. FFTW planning is not thread safe,
// so plans are created under a global lock and cached; execution on
// distinct buffers is safe.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(static_cast<size_t>(n));
    out_ = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Power spectrum |X_k|^2, k = 0..n/2.
  void Power(const std::vector<double>& frame, std::vector<double>* power) {
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    power->resize(static_cast<size_t>(n_ / 2 + 1));
    for (int k = 0; k <= n_ / 2; ++k)
      (*power)[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

std::mutex& FftMutex() {
  static std::mutex m;
  return m;
}

std::unique_ptr<RealFft> MakeFft(int n) {
  std::lock_guard<std::mutex> lock(FftMutex());
  return std::make_unique<RealFft>(n);
}

void DestroyFft(std::unique_ptr<RealFft> fft) {
  std::lock_guard<std::mutex> lock(FftMutex());
  fft.reset();
}

}  // namespace

void MfccConfig::Validate() const {
  if (window < 1 || window > fft_size)
    Fail("mfcc: window {} must be in [1, fft_size={}]", window, fft_size);
  if (hop < 1) Fail("mfcc: hop must be >= 1, got {}", hop);
  if (num_mel < 1) Fail("mfcc: num_mel must be >= 1");
  if (num_ceps < 1 || num_ceps > num_mel)
    Fail("mfcc: num_ceps {} must be in [1, num_mel={}]", num_ceps, num_mel);
  if (!(floor > 0.0)) Fail("mfcc: energy floor must be positive");
}

void to_json(Json& j, const MfccConfig& c) {
  j = Json{{"window", c.window},         {"hop", c.hop},
           {"num_mel", c.num_mel},       {"num_ceps", c.num_ceps},
           {"fft_size", c.fft_size},     {"preemphasis", c.preemphasis},
           {"floor", c.floor},           {"deltas", c.deltas},
           {"low_freq", c.low_freq},     {"high_freq", c.high_freq}};
}

void from_json(const Json& j, MfccConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "window") c.window = it->get<int>();
    else if (key == "hop") c.hop = it->get<int>();
    else if (key == "num_mel") c.num_mel = it->get<int>();
    else if (key == "num_ceps") c.num_ceps = it->get<int>();
    else if (key == "fft_size") c.fft_size = it->get<int>();
    else if (key == "preemphasis") c.preemphasis = it->get<double>();
    else if (key == "floor") c.floor = it->get<double>();
    else if (key == "deltas") c.deltas = it->get<bool>();
    else if (key == "low_freq") c.low_freq = it->get<double>();
    else if (key == "high_freq") c.high_freq = it->get<double>();
    else Fail("unknown mfcc config key '{}'", key);
  }
}

int NumFrames(size_t num_samples, const MfccConfig& cfg) {
  if (num_samples < static_cast<size_t>(cfg.window)) return 0;
  return 1 + static_cast<int>((num_samples - static_cast<size_t>(cfg.window)) /
                              static_cast<size_t>(cfg.hop));
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> MelEdges(const MfccConfig& cfg, int sample_rate) {
  const double high = cfg.high_freq > 0.0 ? cfg.high_freq : 0.5 * sample_rate;
  const double mlo = HzToMel(cfg.low_freq), mhi = HzToMel(high);
  std::vector<double> edges(static_cast<size_t>(cfg.num_mel + 2));
  for (int i = 0; i < cfg.num_mel + 2; ++i)
    edges[i] = MelToHz(mlo + (mhi - mlo) * i / (cfg.num_mel + 1));
  return edges;
}

}  // namespace

std::vector<double> MelBandCenters(const MfccConfig& cfg, int sample_rate) {
  const auto edges = MelEdges(cfg, sample_rate);
  return {edges.begin() + 1, edges.end() - 1};
}

Mat MelFilterbank(const MfccConfig& cfg, int sample_rate) {
  const auto edges = MelEdges(cfg, sample_rate);
  const int bins = cfg.fft_size / 2 + 1;
  Mat fb = Mat::Zero(cfg.num_mel, bins);
  for (int m = 0; m < cfg.num_mel; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = double(k) * sample_rate / cfg.fft_size;
      if (f > lo && f <= center)
        fb(m, k) = (f - lo) / (center - lo);
      else if (f > center && f < hi)
        fb(m, k) = (hi - f) / (hi - center);
    }
  }
  return fb;
}

Mat DctMatrix(int num_out, int num_in) {
  Mat d(num_out, num_in);
  for (int k = 0; k < num_out; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / num_in) : std::sqrt(2.0 / num_in);
    for (int n = 0; n < num_in; ++n)
      d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * num_in));
  }
  return d;
}

Mat LogMelEnergies(const Waveform& wave, const MfccConfig& cfg) {
  cfg.Validate();
  wave.Validate();
  const int T = NumFrames(wave.size(), cfg);
  if (T < 1)
    Fail("mfcc: waveform of {} samples is shorter than one window ({})", wave.size(),
         cfg.window);

  std::vector<double> emph(wave.size());
  emph[0] = wave.samples[0];
  for (size_t n = 1; n < wave.size(); ++n)
    emph[n] = double(wave.samples[n]) - cfg.preemphasis * double(wave.samples[n - 1]);

  std::vector<double> hann(static_cast<size_t>(cfg.window));
  for (int n = 0; n < cfg.window; ++n)
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (cfg.window - 1 > 0 ? cfg.window - 1 : 1));

  const Mat fb = MelFilterbank(cfg, wave.sample_rate);
  auto fft = MakeFft(cfg.fft_size);
  std::vector<double> frame(static_cast<size_t>(cfg.fft_size), 0.0), power;
  Mat out(T, cfg.num_mel);
  for (int t = 0; t < T; ++t) {
    const size_t start = static_cast<size_t>(t) * static_cast<size_t>(cfg.hop);
    for (int n = 0; n < cfg.window; ++n) frame[n] = emph[start + n] * hann[n];
    fft->Power(frame, &power);
    const Eigen::Map<const Eigen::VectorXd> pw(power.data(), static_cast<Eigen::Index>(power.size()));
    const Eigen::VectorXd mel = fb * pw;
    for (int m = 0; m < cfg.num_mel; ++m) out(t, m) = std::log(std::max(mel[m], cfg.floor));
  }
  DestroyFft(std::move(fft));
  return out;
}

Mat ComputeDeltas(const Mat& feats) {
  const Eigen::Index T = feats.rows();
  Mat d(T, feats.cols());
  auto row = [&](Eigen::Index t) { return feats.row(std::clamp<Eigen::Index>(t, 0, T - 1)); };
  for (Eigen::Index t = 0; t < T; ++t)
    d.row(t) = (1.0 * (row(t + 1) - row(t - 1)) + 2.0 * (row(t + 2) - row(t - 2))) / 10.0;
  return d;
}

FeatureSequence Mfcc(const Waveform& wave, const MfccConfig& cfg, const std::string& id) {
  const Mat logmel = LogMelEnergies(wave, cfg);
  const Mat dct = DctMatrix(cfg.num_ceps, cfg.num_mel);
  const Mat ceps = logmel * dct.transpose();
  FeatureSequence fs;
  fs.id = id;
  fs.frame_rate = double(wave.sample_rate) / cfg.hop;
  if (!cfg.deltas) {
    fs.frames = ceps;
  } else {
    const Mat d1 = ComputeDeltas(ceps);
    const Mat d2 = ComputeDeltas(d1);
    fs.frames.resize(ceps.rows(), 3 * ceps.cols());
    fs.frames << ceps, d1, d2;
  }
  return fs;
}

}  // namespace spkpt
