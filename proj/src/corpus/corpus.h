// corpus/corpus.h
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

#ifndef SPKPT_CORPUS_CORPUS_H_
#define SPKPT_CORPUS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus/wav-io.h"

namespace spkpt {

struct Utterance {
  std::string id;
  Waveform waveform;
  std::optional<std::string> speaker;  // only synthetic corpora carry tags

  bool operator==(const Utterance&) const = default;
};

/// One manifest line. Audio is read on demand by LoadUtterance().
struct UtteranceDescriptor {
  std::string id;
  std::string audio_path;
  std::optional<std::string> speaker;

  bool operator==(const UtteranceDescriptor&) const = default;
};

/// B utterances sharing a common length of L samples.
struct Batch {
  std::vector<Utterance> utterances;
  size_t length = 0;

  size_t size() const { return utterances.size(); }
};

/// Reads a JSON Lines manifest {"id", "audio_path", "speaker"?}. Blank lines
/// are skipped; malformed lines and duplicate ids raise an Error naming the
/// 1-based line number.
std::vector<UtteranceDescriptor> LoadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   std::span<const UtteranceDescriptor> descriptors);

/// Relative audio paths resolve against the manifest's directory.
Utterance LoadUtterance(const UtteranceDescriptor& desc,
                        const std::filesystem::path& manifest_dir);
std::vector<Utterance> LoadCorpus(const std::filesystem::path& manifest_path);

/// Center crop when longer than length, trailing zero padding when shorter.
Waveform FitToLength(const Waveform& wave, size_t length);

/// Draws batch_size distinct utterances (seeded) and fits each to length.
Batch MakeBatch(std::span<const Utterance> utterances, size_t batch_size,
                size_t length, uint64_t seed);

/// Draws batch_size distinct speakers (by tag), then one utterance of each.
Batch MakeSpeakerDistinctBatch(std::span<const Utterance> utterances, size_t batch_size,
                               size_t length, uint64_t seed);

/// Knobs of the harmonic-stack speaker generator. Content is a sequence of
/// formant "phones" drawn from an inventory shared by all speakers; speakers
/// differ in fundamental frequency and a smooth spectral coloration.
struct SynthOptions {
  int num_phones = 12;
  double min_segment_sec = 0.05;
  double max_segment_sec = 0.14;
  double min_f0 = 90.0;
  double max_f0 = 260.0;
  double speaker_color = 0.6;  // std of the speaker envelope cosine weights
  double channel_color = 0.0;  // same, drawn per utterance
  double f0_jitter = 0.02;     // relative per-utterance f0 deviation bound
  double noise_std = 0.01;
  double level_jitter_db = 3.0;
};

std::vector<Utterance> SynthCorpus(int num_speakers, int utts_per_speaker,
                                   double duration_sec, int sample_rate,
                                   uint64_t seed, const SynthOptions& opts = {});

/// Fundamental frequency assigned to synthetic speaker `speaker_index`.
double SynthSpeakerF0(int speaker_index, int num_speakers, uint64_t seed,
                      const SynthOptions& opts = {});

}  // namespace spkpt

#endif  // SPKPT_CORPUS_CORPUS_H_
