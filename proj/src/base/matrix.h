// base/matrix.h
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

#ifndef SPKPT_BASE_MATRIX_H_
#define SPKPT_BASE_MATRIX_H_

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace spkpt {

// Row-major; a row is one frame.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::RowVectorXd;

inline bool AllFinite(const Mat& m) { return m.allFinite(); }

/// Callback over named parameter tensors.
using ParamVisitor = std::function<void(const std::string& name, Mat& value)>;

}  // namespace spkpt

#endif  // SPKPT_BASE_MATRIX_H_
