// dsp/mfcc.h
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

#ifndef SPKPT_DSP_MFCC_H_
#define SPKPT_DSP_MFCC_H_

#include <string>
#include <vector>

#include "base/io.h"
#include "base/matrix.h"
#include "corpus/wav-io.h"

namespace spkpt {

/// T frames of D-dimensional features for one utterance.
struct FeatureSequence {
  Mat frames;  // T x D
  double frame_rate = 100.0;
  std::string id;
  // True when computed from mixed (augmented) audio; such features must
  // never be used to derive training targets.
  bool from_mixed_audio = false;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

struct MfccConfig {
  int window = 400;  // samples (25 ms at 16 kHz)
  int hop = 160;     // samples (10 ms)
  int num_mel = 26;
  int num_ceps = 13;
  int fft_size = 512;
  double preemphasis = 0.97;
  double floor = 1e-10;  // energy floor applied before the log
  bool deltas = true;
  double low_freq = 0.0;
  double high_freq = 0.0;  // <= 0 means Nyquist

  void Validate() const;
  int OutputDim() const { return deltas ? 3 * num_ceps : num_ceps; }
};

void to_json(Json& j, const MfccConfig& c);
void from_json(const Json& j, MfccConfig& c);

/// Number of frames produced for n samples; 0 if n < window.
int NumFrames(size_t num_samples, const MfccConfig& cfg);

/// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

/// Triangular filterbank, num_mel x (fft_size/2 + 1), applied to the power
/// spectrum.
Mat MelFilterbank(const MfccConfig& cfg, int sample_rate);
/// Center frequency (Hz) of every mel band.
std::vector<double> MelBandCenters(const MfccConfig& cfg, int sample_rate);

/// Orthonormal DCT-II matrix (rows = output coefficients).
Mat DctMatrix(int num_out, int num_in);

/// Log mel energies before the DCT, T x num_mel.
Mat LogMelEnergies(const Waveform& wave, const MfccConfig& cfg);

/// preemphasis -> Hann -> |FFT|^2 -> mel -> log(max(e, floor)) -> DCT-II,
/// then optional delta and delta-delta (window 2, replicated edges).
FeatureSequence Mfcc(const Waveform& wave, const MfccConfig& cfg,
                     const std::string& id = "");

/// Regression deltas with window 2; edge frames replicated.
Mat ComputeDeltas(const Mat& feats);

}  // namespace spkpt

#endif  // SPKPT_DSP_MFCC_H_
