// base/io.h
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

#ifndef SPKPT_BASE_IO_H_
#define SPKPT_BASE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace spkpt {

using Json = nlohmann::json;

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

Json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const Json& doc);

// Little-endian raw blobs, independent of host byte order.
void AppendF32LE(std::string* out, std::span<const float> values);
void AppendF64LE(std::string* out, std::span<const double> values);
std::vector<float> DecodeF32LE(std::string_view bytes);
std::vector<double> DecodeF64LE(std::string_view bytes);

/// 64-bit FNV-1a; stable across platforms.
uint64_t Fnv1a64(std::string_view bytes);
std::string HexU64(uint64_t value);

}  // namespace spkpt

#endif  // SPKPT_BASE_IO_H_
