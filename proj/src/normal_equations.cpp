// SPDX-License-Identifier: Apache-2.0
#include "dtloc/normal_equations.hpp"

#include <cmath>
#include <limits>

namespace dtloc {

NormalSolver::NormalSolver(const Mat& normal, int iteration) {
  if (normal.rows() != normal.cols() || normal.rows() == 0) throw ConfigError("normal matrix must be square");
  const Vec diag = normal.diagonal();
  if (!normal.allFinite() || !(diag.array() > 0.0).all()) {
    throw SingularMatrixError(std::numeric_limits<double>::infinity(), iteration);
  }
  scale_ = diag.array().rsqrt();
  const Mat scaled = scale_.asDiagonal() * normal * scale_.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Mat> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition_ <= kMaxCondition)) throw SingularMatrixError(condition_, iteration);

  llt_.compute(scaled);
  if (llt_.info() != Eigen::Success) throw SingularMatrixError(condition_, iteration);
}

Vec NormalSolver::solve(const Vec& rhs) const {
  return scale_.asDiagonal() * llt_.solve(scale_.asDiagonal() * rhs);
}

Mat NormalSolver::inverse() const {
  const auto n = scale_.size();
  Mat inv = scale_.asDiagonal() * llt_.solve(Mat::Identity(n, n)) * scale_.asDiagonal();
  return 0.5 * (inv + inv.transpose());
}

Mat weighted_normal(const Mat& G, const Vec& w) {
  return G.transpose() * w.asDiagonal() * G;
}

}  // namespace dtloc
