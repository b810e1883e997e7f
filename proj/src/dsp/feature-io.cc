// dsp/feature-io.cc
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

#include "dsp/feature-io.h"

#include <cstdlib>

#include "base/error.h"
#include "base/io.h"

namespace spkpt {

void WriteFeatureDump(const std::filesystem::path& dir, const FeatureSequence& feats) {
  if (feats.id.empty()) Fail("feature dump needs an utterance id");
  std::vector<float> values(static_cast<size_t>(feats.frames.size()));
  for (Eigen::Index i = 0; i < feats.frames.size(); ++i)
    values[i] = static_cast<float>(feats.frames.data()[i]);
  std::string blob;
  AppendF32LE(&blob, values);
  WriteTextFile(dir / (feats.id + ".f32"), blob);
  WriteJsonFile(dir / (feats.id + ".json"), Json{{"id", feats.id},
                                                 {"T", feats.frames.rows()},
                                                 {"D", feats.frames.cols()},
                                                 {"frame_rate", feats.frame_rate}});
}

FeatureSequence ReadFeatureDump(const std::filesystem::path& dir, const std::string& id) {
  const Json meta = ReadJsonFile(dir / (id + ".json"));
  const auto T = meta.at("T").get<Eigen::Index>();
  const auto D = meta.at("D").get<Eigen::Index>();
  const auto values = DecodeF32LE(ReadTextFile(dir / (id + ".f32")));
  if (static_cast<Eigen::Index>(values.size()) != T * D)
    Fail("feature dump '{}': expected {}x{} values, found {}", id, T, D, values.size());
  FeatureSequence fs;
  fs.id = meta.at("id").get<std::string>();
  fs.frame_rate = meta.at("frame_rate").get<double>();
  fs.frames.resize(T, D);
  for (Eigen::Index i = 0; i < T * D; ++i) fs.frames.data()[i] = values[i];
  return fs;
}

void AlignFramesLabels(FeatureSequence* feats, PseudoLabelSequence* labels, int max_diff) {
  const auto nf = static_cast<long>(feats->num_frames());
  const auto nl = static_cast<long>(labels->labels.size());
  if (std::labs(nf - nl) > max_diff)
    Fail("'{}': {} feature frames vs {} labels differ by more than {}", feats->id, nf, nl,
         max_diff);
  const long n = std::min(nf, nl);
  feats->frames.conservativeResize(n, Eigen::NoChange);
  labels->labels.resize(static_cast<size_t>(n));
}

}  // namespace spkpt
