// encoder/nn-ops.h
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

#ifndef SPKPT_ENCODER_NN_OPS_H_
#define SPKPT_ENCODER_NN_OPS_H_

#include <string>

#include "base/matrix.h"
#include "base/rng.h"

namespace spkpt {

/// y = x w + b, w: in x out, b: 1 x out.
struct LinearParams {
  Mat w;
  Mat b;

  void Visit(const std::string& prefix, const ParamVisitor& f) {
    f(prefix + ".w", w);
    f(prefix + ".b", b);
  }
};

struct LayerNormParams {
  Mat gain;  // 1 x d
  Mat bias;  // 1 x d

  void Visit(const std::string& prefix, const ParamVisitor& f) {
    f(prefix + ".gain", gain);
    f(prefix + ".bias", bias);
  }
};

/// Glorot-uniform weights, zero bias.
LinearParams InitLinear(int in, int out, Rng* rng);
LayerNormParams InitLayerNorm(int dim);

Mat LinearForward(const LinearParams& p, const Mat& x);
/// Accumulates parameter gradients into grad; returns dL/dx.
Mat LinearBackward(const LinearParams& p, const Mat& x, const Mat& dy, LinearParams* grad);

struct LayerNormCache {
  Mat normalized;           // (x - mean) / std
  Eigen::VectorXd inv_std;  // per row
};

inline constexpr double kLayerNormEps = 1e-5;

Mat LayerNormForward(const LayerNormParams& p, const Mat& x, LayerNormCache* cache);
Mat LayerNormBackward(const LayerNormParams& p, const LayerNormCache& cache, const Mat& dy,
                      LayerNormParams* grad);

/// Exact (erf) GELU and its derivative.
Mat Gelu(const Mat& x);
Mat GeluGrad(const Mat& x);

/// Row-wise softmax with max subtraction.
Mat SoftmaxRows(const Mat& x);

/// Fixed sinusoidal position table, T x d.
Mat SinusoidalPositions(int num_frames, int dim);

}  // namespace spkpt

#endif  // SPKPT_ENCODER_NN_OPS_H_
