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

#include "rcdp/linalg.hpp"

#include <stdexcept>

namespace rcdp {

Mat matmul(const Eigen::Ref<const Mat>& x, const Eigen::Ref<const Mat>& y) {
  if (x.cols() != y.rows()) {
    throw std::invalid_argument("matmul: inner dimensions do not match");
  }
  return x * y;
}

double frob_norm_sq(const Eigen::Ref<const Mat>& x) { return x.squaredNorm(); }

Mat qr_orthonormal_basis(const Eigen::Ref<const Mat>& x) {
  if (x.size() == 0) return Mat(x.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(x);
  const double scale = qr.maxPivot() != 0.0 ? std::abs(qr.maxPivot()) : 1.0;
  qr.setThreshold(1e-12);
  Eigen::Index rank = 0;
  const auto& r = qr.matrixR();
  const Eigen::Index kmax = std::min(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < kmax; ++i) {
    if (std::abs(r(i, i)) > 1e-12 * scale) ++rank;
  }
  if (rank == 0) return Mat(x.rows(), 0);
  Mat q = qr.householderQ() * Mat::Identity(x.rows(), rank);
  return q;
}

}  // namespace rcdp
