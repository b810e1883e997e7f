// encoder/masking.cc
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

#include "encoder/masking.h"

#include <algorithm>

#include "base/error.h"
#include "base/rng.h"

namespace spkpt {

bool MaskSet::Contains(int t) const {
  return std::binary_search(indices.begin(), indices.end(), t);
}

MaskSet MaskSet::FromIndices(std::vector<int> idx) {
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  MaskSet m;
  m.indices = std::move(idx);
  for (int t : m.indices) {
    if (!m.spans.empty() && m.spans.back().first + m.spans.back().second == t)
      ++m.spans.back().second;
    else
      m.spans.emplace_back(t, 1);
  }
  return m;
}

MaskSet SampleMask(int num_frames, int span_length, double start_prob, uint64_t seed,
                   bool ensure_nonempty) {
  if (num_frames < 1) Fail("sample_mask: T must be >= 1, got {}", num_frames);
  if (span_length < 1) Fail("sample_mask: span length must be >= 1, got {}", span_length);
  if (!(start_prob >= 0.0 && start_prob <= 1.0))
    Fail("sample_mask: start probability {} outside [0, 1]", start_prob);
  Rng rng(seed);
  std::vector<int> starts;
  for (int t = 0; t < num_frames; ++t)
    if (rng.Bernoulli(start_prob)) starts.push_back(t);
  if (starts.empty() && ensure_nonempty)
    starts.push_back(static_cast<int>(rng.UniformInt(0, num_frames - 1)));
  std::vector<char> covered(static_cast<size_t>(num_frames), 0);
  for (int s : starts)
    for (int t = s; t < std::min(num_frames, s + span_length); ++t) covered[t] = 1;
  std::vector<int> idx;
  for (int t = 0; t < num_frames; ++t)
    if (covered[t]) idx.push_back(t);
  return MaskSet::FromIndices(std::move(idx));
}

Mat Corrupt(const Mat& frames, const MaskSet& mask, const Mat& mask_embedding) {
  if (mask_embedding.rows() != 1 || mask_embedding.cols() != frames.cols())
    Fail("corrupt: mask embedding is {}x{}, frames have dim {}", mask_embedding.rows(),
         mask_embedding.cols(), frames.cols());
  Mat out = frames;
  for (int t : mask.indices) {
    if (t < 0 || t >= frames.rows())
      Fail("corrupt: masked index {} outside [0, {})", t, frames.rows());
    out.row(t) = mask_embedding.row(0);
  }
  return out;
}

}  // namespace spkpt
