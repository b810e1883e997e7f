// corpus/corpus-test.cc
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
#include <map>
#include <set>

#include "base/error.h"
#include "base/io.h"
#include "corpus/corpus.h"
#include "corpus/wav-io.h"

namespace spkpt {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST_CASE("wav header layout") {
  Waveform w;
  w.sample_rate = 8000;
  w.samples = {0.0f, 0.5f, -1.0f};
  const std::string b = EncodeWav(w);
  REQUIRE(b.size() == 44 + 6);
  CHECK(b.substr(0, 4) == "RIFF");
  CHECK(b.substr(8, 8) == "WAVEfmt ");
  CHECK(b.substr(36, 4) == "data");
  // 0.5 -> 16384 = 0x4000, -1.0 -> -32768 = 0x8000
  CHECK(b.substr(44) == std::string("\x00\x00\x00\x40\x00\x80", 6));
}

TEST_CASE("wav round trip is exact for 16-bit values") {
  Waveform w;
  w.sample_rate = 16000;
  for (int i = -32768; i < 32768; i += 97) w.samples.push_back(float(i) / 32768.0f);
  const Waveform back = DecodeWav(EncodeWav(w), "mem");
  CHECK(back == w);
  const auto dir = TempDir("spkpt-wav-test");
  WriteWav(dir / "x.wav", w);
  CHECK(ReadWav(dir / "x.wav") == w);
  fs::remove_all(dir);
}

TEST_CASE("wav encoding clips and rejects bad input") {
  Waveform w;
  w.samples = {2.0f, -2.0f};
  const Waveform back = DecodeWav(EncodeWav(w), "mem");
  CHECK(back.samples[0] == 32767.0f / 32768.0f);
  CHECK(back.samples[1] == -1.0f);
  CHECK_THROWS_AS(DecodeWav("RIFF", "mem"), Error);
  CHECK_THROWS_AS(DecodeWav(std::string(44, '\0'), "mem"), Error);
  Waveform empty;
  CHECK_THROWS_AS(EncodeWav(empty), Error);
  Waveform nan;
  nan.samples = {NAN};
  CHECK_THROWS_AS(nan.Validate(), Error);
  std::string stereo = EncodeWav(back);
  stereo[22] = 2;
  CHECK_THROWS_AS(DecodeWav(stereo, "mem"), Error);
}

TEST_CASE("fit to length centre-crops and zero-pads") {
  Waveform w;
  w.samples = {1, 2, 3, 4, 5, 6};
  CHECK(FitToLength(w, 4).samples == std::vector<float>{2, 3, 4, 5});
  CHECK(FitToLength(w, 3).samples == std::vector<float>{2, 3, 4});
  CHECK(FitToLength(w, 8).samples == std::vector<float>{1, 2, 3, 4, 5, 6, 0, 0});
  CHECK(FitToLength(w, 6).samples == w.samples);
  CHECK_THROWS_AS(FitToLength(w, 0), Error);
}

TEST_CASE("manifest round trip and validation") {
  const auto dir = TempDir("spkpt-manifest-test");
  std::vector<UtteranceDescriptor> ds{{"a", "a.wav", "s1"}, {"b", "b.wav", std::nullopt}};
  WriteManifest(dir / "m.jsonl", ds);
  CHECK(LoadManifest(dir / "m.jsonl") == ds);
  Waveform w;
  w.samples = {0.25f, -0.25f};
  WriteWav(dir / "a.wav", w);
  WriteWav(dir / "b.wav", w);
  const auto corpus = LoadCorpus(dir / "m.jsonl");
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].waveform == w);
  CHECK(corpus[0].speaker == std::optional<std::string>("s1"));

  WriteTextFile(dir / "dup.jsonl",
                "{\"id\":\"a\",\"audio_path\":\"a.wav\"}\n{\"id\":\"a\",\"audio_path\":\"b.wav\"}\n");
  CHECK_THROWS_AS(LoadManifest(dir / "dup.jsonl"), Error);
  WriteTextFile(dir / "bad.jsonl", "{\"id\":\"a\"}\n");
  CHECK_THROWS_AS(LoadManifest(dir / "bad.jsonl"), Error);
  WriteTextFile(dir / "missing.jsonl", "{\"id\":\"z\",\"audio_path\":\"nope.wav\"}\n");
  CHECK_THROWS_AS(LoadCorpus(dir / "missing.jsonl"), Error);
  CHECK_THROWS_AS(LoadManifest(dir / "absent.jsonl"), Error);
  fs::remove_all(dir);
}

std::vector<Utterance> Toy(int speakers, int per) {
  std::vector<Utterance> out;
  for (int s = 0; s < speakers; ++s)
    for (int u = 0; u < per; ++u) {
      Waveform w;
      w.samples.assign(10, float(s * per + u));
      out.push_back({"s" + std::to_string(s) + "u" + std::to_string(u), w, "s" + std::to_string(s)});
    }
  return out;
}

TEST_CASE("batches sample without replacement and are seeded") {
  const auto utts = Toy(4, 5);
  const Batch a = MakeBatch(utts, 7, 6, 11), b = MakeBatch(utts, 7, 6, 11);
  REQUIRE(a.size() == 7);
  std::set<std::string> ids;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.utterances[i] == b.utterances[i]);
    CHECK(a.utterances[i].waveform.size() == 6);
    ids.insert(a.utterances[i].id);
  }
  CHECK(ids.size() == 7);
  CHECK_THROWS_AS(MakeBatch(utts, 21, 6, 1), Error);
  CHECK_THROWS_AS(MakeBatch(utts, 0, 6, 1), Error);

  // Every utterance is equally likely to be picked.
  std::map<std::string, int> counts;
  for (uint64_t s = 0; s < 4000; ++s)
    for (const auto& u : MakeBatch(utts, 5, 2, s).utterances) ++counts[u.id];
  for (const auto& [id, c] : counts) CHECK(std::abs(c - 1000) < 150);
}

TEST_CASE("speaker-distinct batches") {
  const auto utts = Toy(4, 3);
  for (uint64_t s = 0; s < 200; ++s) {
    const Batch b = MakeSpeakerDistinctBatch(utts, 4, 3, s);
    std::set<std::string> spk;
    for (const auto& u : b.utterances) spk.insert(*u.speaker);
    CHECK(spk.size() == 4);
  }
  CHECK_THROWS_AS(MakeSpeakerDistinctBatch(utts, 5, 3, 1), Error);
  auto untagged = utts;
  untagged[0].speaker.reset();
  CHECK_THROWS_AS(MakeSpeakerDistinctBatch(untagged, 2, 3, 1), Error);
}

TEST_CASE("synthetic corpus is deterministic and well formed") {
  const auto a = SynthCorpus(3, 2, 0.25, 16000, 5);
  const auto b = SynthCorpus(3, 2, 0.25, 16000, 5);
  REQUIRE(a.size() == 6);
  CHECK(a == b);
  std::set<std::string> ids;
  for (const auto& u : a) {
    ids.insert(u.id);
    CHECK(u.waveform.size() == 4000);
    CHECK(u.speaker.has_value());
    float peak = 0;
    for (float x : u.waveform.samples) peak = std::max(peak, std::fabs(x));
    CHECK(peak > 0.01f);
    CHECK(peak <= 1.0f);
  }
  CHECK(ids.size() == 6);
  CHECK_FALSE(SynthCorpus(3, 2, 0.25, 16000, 6) == a);
  // Fundamentals occupy disjoint slots.
  std::vector<double> f0;
  for (int s = 0; s < 8; ++s) f0.push_back(SynthSpeakerF0(s, 8, 5));
  for (int s = 1; s < 8; ++s) CHECK(f0[s] > f0[s - 1]);
  CHECK_THROWS_AS(SynthCorpus(0, 2, 0.25, 16000, 5), Error);
  CHECK_THROWS_AS(SynthCorpus(2, 2, 0.0, 16000, 5), Error);
}

}  // namespace
}  // namespace spkpt
