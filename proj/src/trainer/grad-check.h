// trainer/grad-check.h
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

#ifndef SPKPT_TRAINER_GRAD_CHECK_H_
#define SPKPT_TRAINER_GRAD_CHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "base/io.h"
#include "trainer/batch-loss.h"
#include "trainer/model.h"

namespace spkpt {

struct GradCheckOptions {
  uint64_t seed = 1;
  int num_coords = 200;  // lower bound on sampled coordinates
  double step = 1e-4;    // central-difference half step
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  bool head_only = false;  // check only the content head (everything else frozen)
  bool conv_front_end = false;
  bool use_speaker_loss = true;
};

struct GradCheckCoord {
  std::string tensor;
  int64_t index;
  double analytic;
  double numeric;
  double rel_error;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::vector<GradCheckCoord> coords;
  std::vector<std::string> tensors;  // groups covered
  double loss = 0.0;
};

/// Tiny problem used by the gradient check: B=3, T=6, d=8, N=2, 2 heads,
/// k=5, G=2, V=4, tap layer 1, K=4, soft quantizer at tau=1, fixed noise,
/// masks and negatives.
struct GradCheckProblem {
  Model model;
  BatchInputs batch;
  BatchLossOptions options;
};

GradCheckProblem MakeGradCheckProblem(const GradCheckOptions& opts);

/// Central finite differences of the total loss against the analytic
/// gradient on sampled coordinates covering every parameter tensor.
GradCheckReport RunGradCheck(const GradCheckOptions& opts);

Json GradCheckReportToJson(const GradCheckReport& r);

}  // namespace spkpt

#endif  // SPKPT_TRAINER_GRAD_CHECK_H_
