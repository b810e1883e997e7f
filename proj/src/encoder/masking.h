// encoder/masking.h
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

#ifndef SPKPT_ENCODER_MASKING_H_
#define SPKPT_ENCODER_MASKING_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "base/matrix.h"

namespace spkpt {

/// Masked frame indices (0-based, sorted) and the merged spans covering them.
struct MaskSet {
  std::vector<int> indices;
  std::vector<std::pair<int, int>> spans;  // (start, length)

  bool empty() const { return indices.empty(); }
  size_t size() const { return indices.size(); }
  bool Contains(int t) const;
  /// Builds a mask from arbitrary indices (deduplicated, spans merged).
  static MaskSet FromIndices(std::vector<int> indices);
  bool operator==(const MaskSet&) const = default;
};

/// Every frame independently starts a span with probability start_prob; a
/// span covers span_length frames clipped at T; overlapping spans merge.
/// With ensure_nonempty, a draw with no starts gets a single span at a
/// uniformly drawn start (one extra draw from the same stream).
MaskSet SampleMask(int num_frames, int span_length, double start_prob, uint64_t seed,
                   bool ensure_nonempty = false);

/// r(X, M): rows in the mask are replaced by the mask embedding (1 x dim).
Mat Corrupt(const Mat& frames, const MaskSet& mask, const Mat& mask_embedding);

}  // namespace spkpt

#endif  // SPKPT_ENCODER_MASKING_H_
