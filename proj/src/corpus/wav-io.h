// corpus/wav-io.h
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

#ifndef SPKPT_CORPUS_WAV_IO_H_
#define SPKPT_CORPUS_WAV_IO_H_

#include <filesystem>
#include <string>
#include <vector>

namespace spkpt {

/// Mono audio, nominal amplitude range [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
  /// Throws unless length >= 1, rate > 0 and every sample is finite.
  void Validate() const;

  bool operator==(const Waveform&) const = default;
};

// 16-bit PCM, mono, little endian. Multi-channel files are rejected.
Waveform ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const Waveform& wave);

Waveform DecodeWav(const std::string& bytes, const std::string& origin);
std::string EncodeWav(const Waveform& wave);

}  // namespace spkpt

#endif  // SPKPT_CORPUS_WAV_IO_H_
