//
// Copyright 2026 The RCDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef RCDP_LINALG_HPP
#define RCDP_LINALG_HPP

#include <Eigen/Dense>

namespace rcdp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// X * Y with an explicit inner-dimension check.  Callers rely on
/// associativity to keep factored gradients factored, so the check is the
/// only thing this adds over operator*.
Mat matmul(const Eigen::Ref<const Mat>& x, const Eigen::Ref<const Mat>& y);

/// Squared Frobenius norm.
double frob_norm_sq(const Eigen::Ref<const Mat>& x);

/// Orthonormal basis of Col(X) via Householder QR with column pivoting.
/// Columns whose pivoted residual falls below 1e-12 times the leading
/// residual are treated as rank-deficient and dropped, so the result has
/// exactly rank(X) columns and Q^T Q = I to ~1e-14.
Mat qr_orthonormal_basis(const Eigen::Ref<const Mat>& x);

}  // namespace rcdp

#endif  // RCDP_LINALG_HPP
