// trainer/grad-check-test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "trainer/grad-check.h"

namespace spkpt {
namespace {

TEST_CASE("full loss gradients agree with finite differences") {
  GradCheckOptions opts;
  const GradCheckReport r = RunGradCheck(opts);
  CHECK(r.coords.size() >= 200);
  CHECK(r.max_rel_error < 1e-4);
  std::set<std::string> prefixes;
  for (const auto& t : r.tensors) prefixes.insert(t.substr(0, t.find('.')));
  CHECK(prefixes.count("encoder") == 1);
  CHECK(prefixes.count("quantizer") == 1);
}

TEST_CASE("content head alone") {
  GradCheckOptions opts;
  opts.head_only = true;
  CHECK(RunGradCheck(opts).max_rel_error < 1e-6);
}

TEST_CASE("convolutional front end") {
  GradCheckOptions opts;
  opts.conv_front_end = true;
  opts.seed = 2;
  CHECK(RunGradCheck(opts).max_rel_error < 1e-4);
}

TEST_CASE("content loss only") {
  GradCheckOptions opts;
  opts.use_speaker_loss = false;
  const GradCheckReport r = RunGradCheck(opts);
  CHECK(r.max_rel_error < 1e-4);
  const Json j = GradCheckReportToJson(r);
  CHECK(j["max_rel_error"].get<double>() == r.max_rel_error);
}

TEST_CASE("finite-difference error shrinks quadratically with the step") {
  // Seed 3 has a small gradient coordinate whose central-difference error at
  // h = 1e-4 is dominated by the O(h^2) truncation term.
  double prev = 0.0;
  for (double h : {1e-3, 1e-4}) {
    GradCheckOptions opts;
    opts.seed = 3;
    opts.use_speaker_loss = false;
    opts.step = h;
    const double err = RunGradCheck(opts).max_rel_error;
    if (prev > 0.0) CHECK(err < prev / 50.0);
    prev = err;
  }
}

}  // namespace
}  // namespace spkpt
