// base/io.cc
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

#include "base/io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "base/error.h"

namespace spkpt {

namespace {

template <typename Uint>
Uint ToLittle(Uint v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    Uint r = 0;
    for (size_t i = 0; i < sizeof(Uint); ++i) {
      r = (r << 8) | (v & 0xff);
      v >>= 8;
    }
    return r;
  }
}

template <typename Real, typename Uint>
void AppendLE(std::string* out, std::span<const Real> values) {
  static_assert(sizeof(Real) == sizeof(Uint));
  const size_t start = out->size();
  out->resize(start + values.size() * sizeof(Real));
  char* dst = out->data() + start;
  for (Real v : values) {
    Uint bits = ToLittle(std::bit_cast<Uint>(v));
    std::memcpy(dst, &bits, sizeof bits);
    dst += sizeof bits;
  }
}

template <typename Real, typename Uint>
std::vector<Real> DecodeLE(std::string_view bytes) {
  if (bytes.size() % sizeof(Real) != 0)
    Fail("binary blob of {} bytes is not a multiple of {}", bytes.size(), sizeof(Real));
  std::vector<Real> values(bytes.size() / sizeof(Real));
  for (size_t i = 0; i < values.size(); ++i) {
    Uint bits;
    std::memcpy(&bits, bytes.data() + i * sizeof bits, sizeof bits);
    values[i] = std::bit_cast<Real>(ToLittle(bits));
  }
  return values;
}

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open '{}' for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot open '{}' for writing", path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) Fail("write to '{}' failed", path.string());
}

Json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    Fail("malformed JSON in '{}': {}", path.string(), e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& doc) {
  WriteTextFile(path, doc.dump(2) + "\n");
}

void AppendF32LE(std::string* out, std::span<const float> values) {
  AppendLE<float, uint32_t>(out, values);
}

void AppendF64LE(std::string* out, std::span<const double> values) {
  AppendLE<double, uint64_t>(out, values);
}

std::vector<float> DecodeF32LE(std::string_view bytes) {
  return DecodeLE<float, uint32_t>(bytes);
}

std::vector<double> DecodeF64LE(std::string_view bytes) {
  return DecodeLE<double, uint64_t>(bytes);
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexU64(uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace spkpt
