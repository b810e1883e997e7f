// encoder/nn-ops-test.cc
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
#include "base/error.h"
#include "doctest.h"

#include <cmath>

#include "base/rng.h"
#include "encoder/nn-ops.h"

namespace spkpt {
namespace {

Mat RandomMat(Eigen::Index r, Eigen::Index c, Rng* rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng->Gaussian();
  return m;
}

// Scalar objective sum(y .* w) for a fixed random w, so dL/dy = w.
double Dot(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }

TEST_CASE("softmax rows match an extended-precision oracle") {
  Rng rng(1);
  Mat x = RandomMat(6, 9, &rng) * 30.0;
  x(2, 3) = 700.0;  // overflow without max subtraction
  const Mat p = SoftmaxRows(x);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    long double mx = x.row(r).maxCoeff(), s = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) s += std::exp((long double)x(r, c) - mx);
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      CHECK(std::fabs(p(r, c) - double(std::exp((long double)x(r, c) - mx) / s)) < 1e-15);
    CHECK(std::fabs(p.row(r).sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("linear backward matches finite differences") {
  Rng rng(2);
  LinearParams p = InitLinear(4, 3, &rng);
  p.b = RandomMat(1, 3, &rng);
  const Mat x = RandomMat(5, 4, &rng), w = RandomMat(5, 3, &rng);
  LinearParams g{Mat::Zero(4, 3), Mat::Zero(1, 3)};
  const Mat dx = LinearBackward(p, x, w, &g);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Mat up = x, down = x;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double fd = (Dot(LinearForward(p, up), w) - Dot(LinearForward(p, down), w)) / (2 * h);
    CHECK(std::fabs(fd - dx.data()[i]) < 1e-8);
  }
  for (Eigen::Index i = 0; i < p.w.size(); ++i) {
    LinearParams up = p, down = p;
    up.w.data()[i] += h;
    down.w.data()[i] -= h;
    const double fd = (Dot(LinearForward(up, x), w) - Dot(LinearForward(down, x), w)) / (2 * h);
    CHECK(std::fabs(fd - g.w.data()[i]) < 1e-8);
  }
}

TEST_CASE("layer norm normalizes and its backward matches finite differences") {
  Rng rng(3);
  LayerNormParams p{RandomMat(1, 6, &rng), RandomMat(1, 6, &rng)};
  const Mat x = RandomMat(4, 6, &rng) * 3.0, w = RandomMat(4, 6, &rng);
  LayerNormCache cache;
  LayerNormForward(InitLayerNorm(6), x, &cache);
  for (Eigen::Index r = 0; r < 4; ++r) {
    CHECK(std::fabs(cache.normalized.row(r).mean()) < 1e-12);
    const double var = cache.normalized.row(r).squaredNorm() / 6.0;
    CHECK(std::fabs(var - 1.0) < 1e-4);  // eps in the denominator
  }
  LayerNormForward(p, x, &cache);
  LayerNormParams g{Mat::Zero(1, 6), Mat::Zero(1, 6)};
  const Mat dx = LayerNormBackward(p, cache, w, &g);
  const double h = 1e-6;
  auto loss = [&](const LayerNormParams& q, const Mat& in) {
    LayerNormCache c;
    return Dot(LayerNormForward(q, in, &c), w);
  };
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Mat up = x, down = x;
    up.data()[i] += h;
    down.data()[i] -= h;
    CHECK(std::fabs((loss(p, up) - loss(p, down)) / (2 * h) - dx.data()[i]) < 1e-7);
  }
  for (Eigen::Index i = 0; i < 6; ++i) {
    LayerNormParams up = p, down = p;
    up.gain.data()[i] += h;
    down.gain.data()[i] -= h;
    CHECK(std::fabs((loss(up, x) - loss(down, x)) / (2 * h) - g.gain.data()[i]) < 1e-7);
  }
}

TEST_CASE("gelu values and derivative") {
  Mat x(1, 5);
  x << -3.0, -0.5, 0.0, 0.5, 3.0;
  const Mat y = Gelu(x), dy = GeluGrad(x);
  CHECK(y(0, 2) == 0.0);
  // Phi(0.5) = 0.691462461274013
  CHECK(std::fabs(y(0, 3) - 0.5 * 0.691462461274013) < 1e-14);
  CHECK(std::fabs(y(0, 3) - y(0, 1) - 0.5) < 1e-14);  // x Phi(x) - (-x) Phi(-x) = x
  const double h = 1e-6;
  for (int i = 0; i < 5; ++i) {
    Mat up = x, down = x;
    up(0, i) += h;
    down(0, i) -= h;
    CHECK(std::fabs((Gelu(up)(0, i) - Gelu(down)(0, i)) / (2 * h) - dy(0, i)) < 1e-8);
  }
}

TEST_CASE("sinusoidal positions") {
  const Mat pe = SinusoidalPositions(10, 8);
  CHECK(pe.rows() == 10);
  CHECK(pe.cols() == 8);
  for (int c = 0; c < 8; c += 2) {
    CHECK(pe(0, c) == 0.0);
    CHECK(pe(0, c + 1) == 1.0);
  }
  CHECK(std::fabs(pe(3, 0) - std::sin(3.0)) < 1e-15);
  CHECK(std::fabs(pe(3, 1) - std::cos(3.0)) < 1e-15);
  for (Eigen::Index i = 0; i < pe.size(); ++i) CHECK(std::fabs(pe.data()[i]) <= 1.0);
}

TEST_CASE("glorot init is bounded and seeded") {
  Rng a(9), b(9);
  const LinearParams p = InitLinear(20, 30, &a), q = InitLinear(20, 30, &b);
  CHECK(p.w == q.w);
  CHECK(p.w.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 50.0));
  CHECK(p.b.isZero());
}

}  // namespace
}  // namespace spkpt
