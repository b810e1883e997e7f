// pseudolabel/kmeans-test.cc
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

#include <cmath>
#include <filesystem>
#include <limits>

#include "base/error.h"
#include "base/io.h"
#include "base/rng.h"
#include "pseudolabel/kmeans.h"
#include "pseudolabel/pseudo-labels.h"

namespace spkpt {
namespace {

Mat RandomPoints(int n, int d, Rng* rng) {
  Mat x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng->Gaussian();
  // A random offset per point half makes the instances less symmetric.
  for (int i = 0; i < n; i += 2) x.row(i).array() += 2.0 * rng->Uniform();
  return x;
}

// Minimum within-cluster sum of squares over every 2-partition.
double BruteForceTwoMeans(const Mat& x) {
  const int n = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double sse = 0.0;
    for (int side = 0; side < 2; ++side) {
      RowVec mean = RowVec::Zero(x.cols());
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == unsigned(side)) {
          mean += x.row(i);
          ++count;
        }
      mean /= count;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == unsigned(side)) sse += (x.row(i) - mean).squaredNorm();
    }
    best = std::min(best, sse);
  }
  return best;
}

TEST_CASE("two-means matches exhaustive enumeration") {
  Rng rng(1);
  KmeansOptions opts;
  opts.restarts = 20;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 6;
    const Mat x = RandomPoints(n, 1 + trial % 3, &rng);
    const KmeansModel m = KmeansFit(x, 2, 1000 + trial, opts);
    const double oracle = BruteForceTwoMeans(x);
    CHECK(std::fabs(m.inertia - oracle) <= 1e-12 * std::max(1.0, oracle));
  }
}

TEST_CASE("inertia history is non-increasing and ends at the reported inertia") {
  Rng rng(2);
  const Mat x = RandomPoints(300, 4, &rng);
  KmeansOptions opts;
  opts.restarts = 3;
  const KmeansModel m = KmeansFit(x, 7, 5, opts);
  REQUIRE_FALSE(m.inertia_history.empty());
  for (size_t i = 1; i < m.inertia_history.size(); ++i)
    CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] * (1.0 + 1e-12));
  CHECK(m.inertia_history.back() == m.inertia);
  CHECK(std::fabs(Inertia(m.centers, x) - m.inertia) < 1e-9 * m.inertia);
  CHECK(m.iterations_run == static_cast<int>(m.inertia_history.size()));
}

TEST_CASE("fits are seeded") {
  Rng rng(3);
  const Mat x = RandomPoints(100, 3, &rng);
  const KmeansModel a = KmeansFit(x, 5, 9), b = KmeansFit(x, 5, 9);
  CHECK(a.centers == b.centers);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("well separated clusters are recovered") {
  Rng rng(4);
  Mat x(90, 2);
  for (int i = 0; i < 90; ++i) {
    const int c = i % 3;
    x(i, 0) = 10.0 * c + 0.1 * rng.Gaussian();
    x(i, 1) = -5.0 * c + 0.1 * rng.Gaussian();
  }
  KmeansOptions opts;
  opts.restarts = 5;
  const KmeansModel m = KmeansFit(x, 3, 1, opts);
  const auto a = AssignRows(m, x);
  for (int i = 3; i < 90; ++i) CHECK(a[i] == a[i % 3]);
  CHECK(a[0] != a[1]);
  CHECK(a[1] != a[2]);
  CHECK(a[0] != a[2]);
}

TEST_CASE("ties go to the lowest center and duplicates do not break fitting") {
  KmeansModel m;
  m.centers.resize(2, 1);
  m.centers << -1.0, 1.0;
  Mat rows(1, 1);
  rows << 0.0;
  CHECK(AssignRows(m, rows)[0] == 0);
  Mat dup = Mat::Zero(6, 2);
  dup.row(5) << 1.0, 1.0;
  const KmeansModel d = KmeansFit(dup, 3, 2);
  CHECK(d.k() == 3);
  CHECK(d.inertia == 0.0);
}

TEST_CASE("k equal to one gives the mean") {
  Rng rng(5);
  const Mat x = RandomPoints(50, 3, &rng);
  const KmeansModel m = KmeansFit(x, 1, 3);
  CHECK((m.centers.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frame cap subsamples deterministically") {
  Rng rng(6);
  const Mat x = RandomPoints(500, 2, &rng);
  KmeansOptions opts;
  opts.max_frames = 50;
  const KmeansModel a = KmeansFit(x, 4, 8, opts), b = KmeansFit(x, 4, 8, opts);
  CHECK(a.centers == b.centers);
  opts.max_frames = 3;
  CHECK_THROWS_AS(KmeansFit(x, 4, 8, opts), Error);
}

TEST_CASE("invalid fits") {
  Mat x = Mat::Zero(3, 2);
  CHECK_THROWS_AS(KmeansFit(x, 0, 1), Error);
  CHECK_THROWS_AS(KmeansFit(x, 4, 1), Error);
  x(0, 0) = NAN;
  CHECK_THROWS_AS(KmeansFit(x, 2, 1), Error);
  KmeansModel m;
  m.centers = Mat::Zero(2, 3);
  CHECK_THROWS_AS(AssignRows(m, Mat::Zero(1, 2)), Error);
}

TEST_CASE("model and label dumps round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "spkpt-kmeans-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  Rng rng(7);
  const Mat x = RandomPoints(40, 3, &rng);
  const KmeansModel m = KmeansFit(x, 4, 2);
  WriteKmeansModel(dir / "km.bin", m);
  const KmeansModel back = ReadKmeansModel(dir / "km.bin");
  CHECK(back.k() == 4);
  CHECK(back.seed == m.seed);
  CHECK((back.centers - m.centers.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);

  FeatureSequence f;
  f.id = "u";
  f.frames = x;
  PseudoLabelSequence l = Assign(m, f);
  CHECK(l.provenance == "clean");
  CHECK(l.source == "mfcc");
  CHECK(l.size() == 40);
  f.from_mixed_audio = true;
  PseudoLabelSequence mixed = Assign(m, f);
  mixed.utterance_id = "v";
  CHECK(mixed.provenance == "mixed");
  const std::vector<PseudoLabelSequence> seqs{l, mixed};
  WriteLabelDump(dir / "labels.jsonl", seqs);
  CHECK(ReadLabelDump(dir / "labels.jsonl") == seqs);

  PseudoLabelSequence bad = l;
  bad.labels[0] = 4;
  CHECK_THROWS_AS(bad.Validate(), Error);
  WriteTextFile(dir / "bad.jsonl", "{\"id\":\"u\",\"source\":\"mfcc\",\"k\":2,\"labels\":[0,2]}\n");
  CHECK_THROWS_AS(ReadLabelDump(dir / "bad.jsonl"), Error);
  CHECK_THROWS_AS(ReadLabelDump(dir / "absent.jsonl"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
TEST_CASE("transfer refinement never raises inertia and escapes a Lloyd fixpoint") {
  Rng rng(2024);
  KmeansOptions plain, refined;
  plain.restarts = refined.restarts = 20;
  plain.transfer_refine = false;
  int strictly_better = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Mat x(3 + trial % 6, 1 + trial % 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Gaussian();
    const double lloyd = KmeansFit(x, 2, 5000 + trial, plain).inertia;
    const double both = KmeansFit(x, 2, 5000 + trial, refined).inertia;
    CHECK(both <= lloyd * (1.0 + 1e-12));
    CHECK(both == doctest::Approx(BruteForceTwoMeans(x)).epsilon(1e-12));
    if (both < lloyd * (1.0 - 1e-9)) ++strictly_better;
  }
  CHECK(strictly_better == 2);
}

}  // namespace spkpt
