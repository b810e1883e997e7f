// encoder/nn-ops.cc
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

#include "encoder/nn-ops.h"

#include <cmath>
#include <numbers>

namespace spkpt {

LinearParams InitLinear(int in, int out, Rng* rng) {
  LinearParams p;
  p.w.resize(in, out);
  const double limit = std::sqrt(6.0 / (in + out));
  for (Eigen::Index i = 0; i < p.w.size(); ++i)
    p.w.data()[i] = limit * (2.0 * rng->Uniform() - 1.0);
  p.b = Mat::Zero(1, out);
  return p;
}

LayerNormParams InitLayerNorm(int dim) {
  return LayerNormParams{Mat::Ones(1, dim), Mat::Zero(1, dim)};
}

Mat LinearForward(const LinearParams& p, const Mat& x) {
  Mat y = x * p.w;
  y.rowwise() += p.b.row(0);
  return y;
}

Mat LinearBackward(const LinearParams& p, const Mat& x, const Mat& dy, LinearParams* grad) {
  grad->w.noalias() += x.transpose() * dy;
  grad->b += dy.colwise().sum();
  return dy * p.w.transpose();
}

Mat LayerNormForward(const LayerNormParams& p, const Mat& x, LayerNormCache* cache) {
  const Eigen::Index T = x.rows(), d = x.cols();
  cache->normalized.resize(T, d);
  cache->inv_std.resize(T);
  Mat y(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double mean = x.row(t).mean();
    const RowVec centered = x.row(t).array() - mean;
    const double var = centered.squaredNorm() / double(d);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache->inv_std[t] = inv;
    cache->normalized.row(t) = centered * inv;
    y.row(t) = cache->normalized.row(t).cwiseProduct(p.gain.row(0)) + p.bias.row(0);
  }
  return y;
}

Mat LayerNormBackward(const LayerNormParams& p, const LayerNormCache& cache, const Mat& dy,
                      LayerNormParams* grad) {
  const Eigen::Index T = dy.rows(), d = dy.cols();
  grad->gain += dy.cwiseProduct(cache.normalized).colwise().sum();
  grad->bias += dy.colwise().sum();
  Mat dx(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const RowVec dxhat = dy.row(t).cwiseProduct(p.gain.row(0));
    const double mean_dxhat = dxhat.mean();
    const double mean_dot = dxhat.dot(cache.normalized.row(t)) / double(d);
    dx.row(t) = cache.inv_std[t] *
                (dxhat.array() - mean_dxhat - cache.normalized.row(t).array() * mean_dot).matrix();
  }
  return dx;
}

Mat Gelu(const Mat& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); });
}

Mat GeluGrad(const Mat& x) {
  return x.unaryExpr([](double v) {
    const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + v * pdf;
  });
}

Mat SoftmaxRows(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

Mat SinusoidalPositions(int num_frames, int dim) {
  Mat pe(num_frames, dim);
  for (int t = 0; t < num_frames; ++t)
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -double(2 * (i / 2)) / dim);
      pe(t, i) = (i % 2 == 0) ? std::sin(t * rate) : std::cos(t * rate);
    }
  return pe;
}

}  // namespace spkpt
