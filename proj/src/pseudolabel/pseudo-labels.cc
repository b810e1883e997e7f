// pseudolabel/pseudo-labels.cc
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

#include "pseudolabel/pseudo-labels.h"

#include <fstream>

#include "base/error.h"
#include "base/io.h"

namespace spkpt {

void PseudoLabelSequence::Validate() const {
  if (k < 1) Fail("label sequence '{}' has k={} (< 1)", utterance_id, k);
  for (size_t t = 0; t < labels.size(); ++t)
    if (labels[t] < 0 || labels[t] >= k)
      Fail("label sequence '{}': label {} at frame {} outside [0, {})", utterance_id,
           labels[t], t, k);
}

void WriteLabelDump(const std::filesystem::path& path,
                    std::span<const PseudoLabelSequence> labels) {
  std::string text;
  for (const auto& seq : labels) {
    Json obj = {{"id", seq.utterance_id},
                {"k", seq.k},
                {"source", seq.source},
                {"provenance", seq.provenance},
                {"labels", seq.labels}};
    text += obj.dump() + "\n";
  }
  WriteTextFile(path, text);
}

std::vector<PseudoLabelSequence> ReadLabelDump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail("label dump '{}' does not exist", path.string());
  std::vector<PseudoLabelSequence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json obj = Json::parse(line);
      PseudoLabelSequence seq;
      seq.utterance_id = obj.at("id").get<std::string>();
      seq.k = obj.at("k").get<int>();
      seq.source = obj.at("source").get<std::string>();
      seq.labels = obj.at("labels").get<std::vector<int>>();
      if (obj.contains("provenance")) seq.provenance = obj.at("provenance").get<std::string>();
      seq.Validate();
      out.push_back(std::move(seq));
    } catch (const Json::exception& e) {
      Fail("{}:{}: malformed label record: {}", path.string(), line_no, e.what());
    }
  }
  return out;
}

}  // namespace spkpt
