// pseudolabel/pseudo-labels.h
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

#ifndef SPKPT_PSEUDOLABEL_PSEUDO_LABELS_H_
#define SPKPT_PSEUDOLABEL_PSEUDO_LABELS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spkpt {

/// Frame-level cluster indices for one utterance.
struct PseudoLabelSequence {
  std::string utterance_id;
  std::vector<int> labels;
  int k = 0;
  std::string source = "mfcc";  // "mfcc" or "embedding:layer<j>"
  // "clean" when derived from unaugmented audio; the trainer refuses
  // anything else as a content target.
  std::string provenance = "clean";

  size_t size() const { return labels.size(); }
  void Validate() const;
  bool operator==(const PseudoLabelSequence&) const = default;
};

/// JSON Lines {id, k, source, provenance, labels:[...]}.
void WriteLabelDump(const std::filesystem::path& path,
                    std::span<const PseudoLabelSequence> labels);
std::vector<PseudoLabelSequence> ReadLabelDump(const std::filesystem::path& path);

}  // namespace spkpt

#endif  // SPKPT_PSEUDOLABEL_PSEUDO_LABELS_H_
