// tools/run-manifest.h
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

#ifndef SPKPT_TOOLS_RUN_MANIFEST_H_
#define SPKPT_TOOLS_RUN_MANIFEST_H_

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "base/io.h"
#include "trainer/train-config.h"

namespace spkpt {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written next to every command's artifacts.
struct RunManifest {
  std::string command;
  std::string config_hash;
  Json seeds = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_time_sec = 0.0;

  Json ToJson() const;
};

/// Times a command and writes out_dir/run-manifest.json on Finish().
class ManifestWriter {
 public:
  ManifestWriter(std::string command, const TrainConfig& cfg);
  RunManifest& manifest() { return manifest_; }
  void Finish(const std::filesystem::path& out_dir);

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace spkpt

#endif  // SPKPT_TOOLS_RUN_MANIFEST_H_
