// corpus/wav-io.cc
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

#include "corpus/wav-io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "base/error.h"
#include "base/io.h"

namespace spkpt {

namespace {

uint32_t ReadU32(const std::string& b, size_t pos) {
  const auto* p = reinterpret_cast<const unsigned char*>(b.data() + pos);
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

uint16_t ReadU16(const std::string& b, size_t pos) {
  const auto* p = reinterpret_cast<const unsigned char*>(b.data() + pos);
  return uint16_t(p[0] | (p[1] << 8));
}

void PutU32(std::string* b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string* b, uint16_t v) {
  b->push_back(static_cast<char>(v & 0xff));
  b->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

void Waveform::Validate() const {
  if (sample_rate <= 0) Fail("waveform sample rate must be positive, got {}", sample_rate);
  if (samples.empty()) Fail("waveform is empty");
  for (size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i])) Fail("waveform sample {} is not finite", i);
}

Waveform DecodeWav(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0)
    Fail("'{}' is not a RIFF/WAVE file", origin);
  size_t pos = 12;
  bool have_fmt = false;
  int channels = 0, bits = 0, format = 0;
  Waveform wave;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t size = ReadU32(bytes, pos + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) Fail("'{}': chunk '{}' runs past end of file", origin, id);
    if (id == "fmt ") {
      if (size < 16) Fail("'{}': fmt chunk too short", origin);
      format = ReadU16(bytes, body);
      channels = ReadU16(bytes, body + 2);
      wave.sample_rate = static_cast<int>(ReadU32(bytes, body + 4));
      bits = ReadU16(bytes, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail("'{}': data chunk before fmt chunk", origin);
      if (format != 1 || bits != 16)
        Fail("'{}': only 16-bit PCM is supported (format {}, {} bits)", origin, format, bits);
      if (channels != 1) Fail("'{}': expected mono audio, found {} channels", origin, channels);
      const size_t n = size / 2;
      wave.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const auto v = static_cast<int16_t>(ReadU16(bytes, body + 2 * i));
        wave.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      wave.Validate();
      return wave;
    }
    pos = body + size + (size & 1);
  }
  Fail("'{}': no data chunk", origin);
}

std::string EncodeWav(const Waveform& wave) {
  wave.Validate();
  const auto data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  PutU32(&b, 36 + data_bytes);
  b += "WAVEfmt ";
  PutU32(&b, 16);
  PutU16(&b, 1);
  PutU16(&b, 1);
  PutU32(&b, static_cast<uint32_t>(wave.sample_rate));
  PutU32(&b, static_cast<uint32_t>(wave.sample_rate) * 2);
  PutU16(&b, 2);
  PutU16(&b, 16);
  b += "data";
  PutU32(&b, data_bytes);
  for (float x : wave.samples) {
    const double scaled = std::clamp(std::nearbyint(double(x) * 32768.0), -32768.0, 32767.0);
    PutU16(&b, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }
  return b;
}

Waveform ReadWav(const std::filesystem::path& path) {
  return DecodeWav(ReadTextFile(path), path.string());
}

void WriteWav(const std::filesystem::path& path, const Waveform& wave) {
  WriteTextFile(path, EncodeWav(wave));
}

}  // namespace spkpt
