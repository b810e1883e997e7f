// dsp/feature-io.h
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

#ifndef SPKPT_DSP_FEATURE_IO_H_
#define SPKPT_DSP_FEATURE_IO_H_

#include <filesystem>
#include <string>

#include "dsp/mfcc.h"
#include "pseudolabel/pseudo-labels.h"

namespace spkpt {

// <dir>/<id>.f32 holds row-major T x D little-endian float32;
// <dir>/<id>.json holds {id, T, D, frame_rate}.
void WriteFeatureDump(const std::filesystem::path& dir, const FeatureSequence& feats);
FeatureSequence ReadFeatureDump(const std::filesystem::path& dir, const std::string& id);

/// Truncates features and labels to the shorter of the two lengths. Lengths
/// may differ by at most max_diff frames.
void AlignFramesLabels(FeatureSequence* feats, PseudoLabelSequence* labels,
                       int max_diff = 2);

}  // namespace spkpt

#endif  // SPKPT_DSP_FEATURE_IO_H_
