// dsp/mfcc-test.cc
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
#include <complex>
#include <filesystem>
#include <numbers>

#include "base/error.h"
#include "dsp/feature-io.h"
#include "dsp/mfcc.h"

namespace spkpt {
namespace {

Waveform Tone(double hz, size_t n, int rate = 16000, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    w.samples[i] = float(amp * std::sin(2.0 * std::numbers::pi * hz * double(i) / rate));
  return w;
}

TEST_CASE("frame count") {
  MfccConfig c;
  CHECK(NumFrames(399, c) == 0);
  CHECK(NumFrames(400, c) == 1);
  CHECK(NumFrames(559, c) == 1);
  CHECK(NumFrames(560, c) == 2);
  CHECK(NumFrames(16000, c) == 98);
}

TEST_CASE("mel scale") {
  CHECK(std::fabs(HzToMel(700.0) - 2595.0 * std::log10(2.0)) < 1e-12);
  CHECK(std::fabs(HzToMel(1000.0) - 1000.0) < 0.1);
  for (double hz : {0.0, 55.0, 440.0, 3999.0, 8000.0})
    CHECK(std::fabs(MelToHz(HzToMel(hz)) - hz) < 1e-9);
}

TEST_CASE("filterbank triangles") {
  MfccConfig c;
  const Mat fb = MelFilterbank(c, 16000);
  CHECK(fb.rows() == 26);
  CHECK(fb.cols() == 257);
  CHECK(fb.minCoeff() >= 0.0);
  CHECK(fb.maxCoeff() <= 1.0);
  const auto centers = MelBandCenters(c, 16000);
  for (size_t m = 1; m < centers.size(); ++m) CHECK(centers[m] > centers[m - 1]);
  for (int m = 0; m < 26; ++m) {
    Eigen::Index r, arg;
    fb.row(m).maxCoeff(&r, &arg);
    // The peak bin sits within one bin of the band centre.
    CHECK(std::fabs(double(arg) * 16000.0 / 512.0 - centers[m]) <= 16000.0 / 512.0 + 1e-9);
  }
}

TEST_CASE("dct is orthonormal") {
  const Mat d = DctMatrix(26, 26);
  CHECK((d * d.transpose() - Mat::Identity(26, 26)).cwiseAbs().maxCoeff() < 1e-12);
  const Mat d13 = DctMatrix(13, 26);
  CHECK((d13 * d13.transpose() - Mat::Identity(13, 13)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log-mel matches a direct DFT oracle") {
  MfccConfig c;
  Waveform w = Tone(523.0, 1200);
  for (size_t i = 0; i < w.size(); ++i) w.samples[i] += float(0.01 * std::cos(0.37 * double(i * i % 101)));
  const Mat got = LogMelEnergies(w, c);
  const Mat fb = MelFilterbank(c, 16000);
  REQUIRE(got.rows() == NumFrames(w.size(), c));
  for (Eigen::Index t = 0; t < got.rows(); ++t) {
    std::vector<double> frame(512, 0.0);
    for (int n = 0; n < 400; ++n) {
      const size_t i = size_t(t) * 160 + size_t(n);
      const double prev = i > 0 ? double(w.samples[i - 1]) : 0.0;
      const double x = i > 0 ? double(w.samples[i]) - 0.97 * prev : double(w.samples[i]);
      frame[n] = x * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 399.0));
    }
    Eigen::VectorXd power(257);
    for (int k = 0; k <= 256; ++k) {
      std::complex<long double> acc = 0;
      for (int n = 0; n < 512; ++n)
        acc += (long double)frame[n] *
               std::polar(1.0L, -2.0L * std::numbers::pi_v<long double> * k * n / 512.0L);
      power[k] = double(std::norm(acc));
    }
    const Eigen::VectorXd mel = fb * power;
    for (int m = 0; m < 26; ++m)
      CHECK(std::fabs(got(t, m) - std::log(std::max(mel[m], c.floor))) < 1e-8);
  }
}

TEST_CASE("a pure tone peaks in the band nearest its frequency") {
  MfccConfig c;
  const auto centers = MelBandCenters(c, 16000);
  for (double hz : {300.0, 1000.0, 2500.0, 5000.0}) {
    const Mat e = LogMelEnergies(Tone(hz, 4000), c);
    size_t nearest = 0;
    for (size_t m = 1; m < centers.size(); ++m)
      if (std::fabs(centers[m] - hz) < std::fabs(centers[nearest] - hz)) nearest = m;
    Eigen::Index r, arg;
    e.row(5).maxCoeff(&r, &arg);
    CHECK(std::abs(int(arg) - int(nearest)) <= 1);
  }
}

TEST_CASE("silence hits the energy floor") {
  MfccConfig c;
  Waveform w;
  w.samples.assign(800, 0.0f);
  const Mat e = LogMelEnergies(w, c);
  CHECK((e.array() == std::log(c.floor)).all());
}

TEST_CASE("mfcc shape, deltas and rate") {
  MfccConfig c;
  const FeatureSequence f = Mfcc(Tone(200.0, 16000), c, "x");
  CHECK(f.num_frames() == 98);
  CHECK(f.dim() == 39);
  CHECK(f.frame_rate == 100.0);
  CHECK(f.id == "x");
  c.deltas = false;
  CHECK(Mfcc(Tone(200.0, 16000), c).dim() == 13);
  CHECK_THROWS_AS(Mfcc(Tone(200.0, 300), c), Error);
  c.num_ceps = 40;
  CHECK_THROWS_AS(c.Validate(), Error);
}

TEST_CASE("deltas of ramps and constants") {
  Mat ramp(9, 2);
  for (int t = 0; t < 9; ++t) ramp.row(t) << 3.0 * t, 7.0;
  const Mat d = ComputeDeltas(ramp);
  for (int t = 2; t < 7; ++t) {
    CHECK(std::fabs(d(t, 0) - 3.0) < 1e-12);
    CHECK(d(t, 1) == 0.0);
  }
  // Edge frames replicate the boundary and the slope estimate shrinks there.
  CHECK(std::fabs(d(0, 0) - (3.0 * 1 + 2.0 * 6) / 10.0) < 1e-12);
}

TEST_CASE("config json rejects unknown keys") {
  MfccConfig c;
  c.hop = 80;
  Json j = c;
  CHECK(j.get<MfccConfig>().hop == 80);
  j["bogus"] = 1;
  CHECK_THROWS_AS(j.get<MfccConfig>(), Error);
}

TEST_CASE("feature dump round trip and alignment") {
  const auto dir = std::filesystem::temp_directory_path() / "spkpt-feat-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  FeatureSequence f = Mfcc(Tone(300.0, 3000), MfccConfig{}, "u1");
  WriteFeatureDump(dir, f);
  const FeatureSequence back = ReadFeatureDump(dir, "u1");
  CHECK(back.frames.rows() == f.frames.rows());
  CHECK((back.frames - f.frames.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.frame_rate == f.frame_rate);
  CHECK_THROWS_AS(ReadFeatureDump(dir, "nope"), Error);

  PseudoLabelSequence l;
  l.utterance_id = "u1";
  l.k = 3;
  l.labels.assign(static_cast<size_t>(f.num_frames()) + 2, 0);
  FeatureSequence g = f;
  AlignFramesLabels(&g, &l);
  CHECK(g.num_frames() == f.num_frames());
  CHECK(l.size() == static_cast<size_t>(f.num_frames()));
  l.labels.assign(static_cast<size_t>(f.num_frames()) + 3, 0);
  CHECK_THROWS_AS(AlignFramesLabels(&g, &l), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace spkpt
