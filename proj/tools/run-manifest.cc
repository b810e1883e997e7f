// tools/run-manifest.cc
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

#include "run-manifest.h"

namespace spkpt {

Json RunManifest::ToJson() const {
  return {{"command", command}, {"config_hash", config_hash}, {"seeds", seeds},
          {"inputs", inputs},   {"outputs", outputs},         {"version", kToolVersion},
          {"wall_time_sec", wall_time_sec}};
}

ManifestWriter::ManifestWriter(std::string command, const TrainConfig& cfg)
    : start_(std::chrono::steady_clock::now()) {
  manifest_.command = std::move(command);
  manifest_.config_hash = ConfigHash(cfg);
  manifest_.seeds = Json(cfg.seeds);
}

void ManifestWriter::Finish(const std::filesystem::path& out_dir) {
  manifest_.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  WriteJsonFile(out_dir / "run-manifest.json", manifest_.ToJson());
}

}  // namespace spkpt
