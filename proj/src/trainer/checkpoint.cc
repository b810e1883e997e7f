// trainer/checkpoint.cc
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

#include "trainer/checkpoint.h"

#include <map>

#include "base/error.h"

namespace spkpt {

namespace {

std::vector<std::pair<std::string, const Mat*>> CheckpointTensors(const TrainState& st) {
  std::vector<std::pair<std::string, const Mat*>> out = st.model.params.Tensors();
  if (st.model.input_mean.size() > 0) {
    out.emplace_back("input.mean", &st.model.input_mean);
    out.emplace_back("input.scale", &st.model.input_scale);
  }
  for (const auto& [name, m] : st.adam_m.Tensors()) out.emplace_back("adam.m." + name, m);
  for (const auto& [name, m] : st.adam_v.Tensors()) out.emplace_back("adam.v." + name, m);
  return out;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& dir, const TrainConfig& cfg,
                    const TrainState& state) {
  std::string blob;
  Json tensors = Json::array();
  for (const auto& [name, m] : CheckpointTensors(state)) {
    tensors.push_back({{"name", name},
                       {"offset", blob.size()},
                       {"shape", {m->rows(), m->cols()}}});
    AppendF64LE(&blob, std::span<const double>(m->data(), static_cast<size_t>(m->size())));
  }
  Json meta;
  meta["config"] = cfg;
  meta["step"] = state.step;
  meta["metrics_tail"] = state.metrics_tail;
  meta["tensors"] = tensors;
  meta["format"] = "f64le";
  WriteTextFile(dir / "checkpoint.bin", blob);
  WriteJsonFile(dir / "checkpoint.json", meta);
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& dir) {
  const Json meta = ReadJsonFile(dir / "checkpoint.json");
  const std::string blob = ReadTextFile(dir / "checkpoint.bin");
  LoadedCheckpoint out;
  out.config = meta.at("config").get<TrainConfig>();
  out.config.Validate();
  TrainState& st = out.state;
  st.model = InitModel(out.config.encoder, out.config.quantizer, out.config.seeds.model);
  st.adam_m = ZerosLike(st.model.params);
  st.adam_v = ZerosLike(st.model.params);
  st.step = meta.at("step").get<int64_t>();
  for (const auto& r : meta.at("metrics_tail")) st.metrics_tail.push_back(r);

  std::map<std::string, Mat*> slots;
  for (auto& [name, m] : st.model.params.Tensors()) slots[name] = m;
  for (auto& [name, m] : st.adam_m.Tensors()) slots["adam.m." + name] = m;
  for (auto& [name, m] : st.adam_v.Tensors()) slots["adam.v." + name] = m;
  slots["input.mean"] = &st.model.input_mean;
  slots["input.scale"] = &st.model.input_scale;

  size_t filled = 0;
  for (const auto& t : meta.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    auto it = slots.find(name);
    if (it == slots.end()) Fail("checkpoint {}: unexpected tensor '{}'", dir.string(), name);
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    const auto offset = t.at("offset").get<size_t>();
    const size_t bytes = static_cast<size_t>(rows * cols) * 8;
    if (offset + bytes > blob.size())
      Fail("checkpoint {}: tensor '{}' runs past the end of the blob", dir.string(), name);
    Mat& m = *it->second;
    const bool stats = name.rfind("input.", 0) == 0;
    if (!stats && (m.rows() != rows || m.cols() != cols))
      Fail("checkpoint {}: tensor '{}' has shape {}x{}, model expects {}x{}", dir.string(), name,
           rows, cols, m.rows(), m.cols());
    const std::vector<double> values = DecodeF64LE(std::string_view(blob).substr(offset, bytes));
    m.resize(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    if (!stats) ++filled;
  }
  const size_t expected = 3 * st.model.params.Tensors().size();
  if (filled != expected)
    Fail("checkpoint {}: {} of {} tensors present", dir.string(), filled, expected);
  return out;
}

}  // namespace spkpt
