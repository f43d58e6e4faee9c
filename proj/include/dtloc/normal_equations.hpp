// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/types.hpp"

namespace dtloc {

/// Rejects normal matrices whose Jacobi-scaled condition number exceeds this.
inline constexpr double kMaxCondition = 1e12;

/// Cholesky factorization of a symmetric normal matrix A = G^T W G.
///
/// A is first equilibrated as D A D with D = diag(A)^{-1/2}, so the condition
/// test measures geometry rather than the mix of units (m, m/s) or a very
/// tight pseudo-measurement on one parameter. Throws SingularMatrixError when
/// the scaled matrix is not positive definite or too ill-conditioned.
class NormalSolver {
public:
  explicit NormalSolver(const Mat& normal, int iteration = -1);

  Vec solve(const Vec& rhs) const;
  Mat inverse() const;
  double condition() const { return condition_; }

private:
  Vec scale_;  // D
  Eigen::LLT<Mat> llt_;
  double condition_ = 0.0;
};

/// Builds G^T W G for diagonal weights w.
Mat weighted_normal(const Mat& G, const Vec& w);

}  // namespace dtloc
