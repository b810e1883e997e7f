// pseudolabel/kmeans.h
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

#ifndef SPKPT_PSEUDOLABEL_KMEANS_H_
#define SPKPT_PSEUDOLABEL_KMEANS_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "base/matrix.h"
#include "dsp/mfcc.h"
#include "pseudolabel/pseudo-labels.h"

namespace spkpt {

struct KmeansModel {
  Mat centers;  // k x D
  double inertia = 0.0;
  int iterations_run = 0;
  uint64_t seed = 0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;

  int k() const { return static_cast<int>(centers.rows()); }
  int dim() const { return static_cast<int>(centers.cols()); }
};

struct KmeansOptions {
  int max_iters = 100;
  int restarts = 1;
  // Fits use at most this many rows, sampled uniformly with the fit seed.
  size_t max_frames = 100000;
  // After Lloyd converges, apply single-point transfers that lower inertia.
  bool transfer_refine = true;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or max_iters is reached, then (if enabled) up to max_iters sweeps of
/// single-point transfers. An emptied cluster is re-seeded with the
/// point farthest from its current center. Throws if N < k or the input has
/// non-finite values. Inertia never increases across iterations.
KmeansModel KmeansFit(const Mat& frames, int k, uint64_t seed,
                      const KmeansOptions& opts = {});

/// Nearest center (squared Euclidean) per row; ties go to the lowest index.
std::vector<int> AssignRows(const KmeansModel& model, const Mat& rows);

PseudoLabelSequence Assign(const KmeansModel& model, const FeatureSequence& feats,
                           const std::string& source = "mfcc");

/// Sum of squared distances of every row to its nearest center.
double Inertia(const Mat& centers, const Mat& rows);

/// One JSON header line {k, D, seed, inertia, iterations_run} followed by a
/// float32 little-endian k x D center blob.
void WriteKmeansModel(const std::filesystem::path& path, const KmeansModel& model);
KmeansModel ReadKmeansModel(const std::filesystem::path& path);

}  // namespace spkpt

#endif  // SPKPT_PSEUDOLABEL_KMEANS_H_
