// SPDX-License-Identifier: Apache-2.0
#include "dtloc/types.hpp"

#include <cmath>
#include <string>

namespace dtloc {

DegenerateGeometryError::DegenerateGeometryError(int anchor, int iteration)
    : std::runtime_error("degenerate geometry: UD coincides with anchor " + std::to_string(anchor) +
                         (iteration >= 0 ? " at iteration " + std::to_string(iteration) : std::string{})),
      anchor_(anchor),
      iteration_(iteration) {}

SingularMatrixError::SingularMatrixError(double condition, int iteration)
    : std::runtime_error("singular normal matrix (scaled condition " + std::to_string(condition) + ")" +
                         (iteration >= 0 ? " at iteration " + std::to_string(iteration) : std::string{})),
      condition_(condition),
      iteration_(iteration) {}

Vec ParameterVector::flatten() const {
  const ParamIndex ix{dim()};
  Vec out(ix.size());
  out.segment(ix.position(), ix.n) = p;
  out(ix.clock_offset()) = b;
  out.segment(ix.velocity(), ix.n) = v;
  out(ix.clock_drift()) = k;
  return out;
}

ParameterVector ParameterVector::from_flat(const Vec& flat) {
  if (flat.size() != 6 && flat.size() != 8) {
    throw ConfigError("parameter vector must have length 6 (N=2) or 8 (N=3)");
  }
  const ParamIndex ix{static_cast<int>(flat.size() - 2) / 2};
  ParameterVector out;
  out.p = flat.segment(ix.position(), ix.n);
  out.b = flat(ix.clock_offset());
  out.v = flat.segment(ix.velocity(), ix.n);
  out.k = flat(ix.clock_drift());
  return out;
}

ParameterVector ParameterVector::zeros(int n) {
  ParameterVector out;
  out.p = Vec::Zero(n);
  out.v = Vec::Zero(n);
  return out;
}

void ParameterVector::validate() const {
  if (p.size() != 2 && p.size() != 3) throw ConfigError("position dimension must be 2 or 3");
  if (v.size() != p.size()) throw ConfigError("velocity and position dimensions differ");
  if (!p.allFinite() || !v.allFinite() || !std::isfinite(b) || !std::isfinite(k)) {
    throw ConfigError("parameter vector has non-finite entries");
  }
}

BlockValues block_sums(const Vec& squared, int n) {
  const ParamIndex ix{n};
  BlockValues out;
  out.position = squared.segment(ix.position(), n).sum();
  out.clock_offset = squared(ix.clock_offset());
  out.velocity = squared.segment(ix.velocity(), n).sum();
  out.clock_drift = squared(ix.clock_drift());
  return out;
}

BlockValues block_root_sums(const Vec& squared, int n) {
  BlockValues s = block_sums(squared, n);
  return {std::sqrt(s.position), std::sqrt(s.clock_offset), std::sqrt(s.velocity), std::sqrt(s.clock_drift)};
}

AnchorLayout::AnchorLayout(Mat anchors, double delta_t) : anchors_(std::move(anchors)), delta_t_(delta_t) {
  const int n = dim();
  const int m = size();
  if (n != 2 && n != 3) throw ConfigError("anchor dimension must be 2 or 3");
  if (m < n + 1) throw ConfigError("need at least N+1 anchors for 2N+2 unknowns");
  if (!(delta_t_ > 0.0) || !std::isfinite(delta_t_)) throw ConfigError("delta_t must be positive");
  if (!anchors_.allFinite()) throw ConfigError("anchor positions must be finite");
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if ((anchors_.col(i) - anchors_.col(j)).norm() == 0.0) {
        throw ConfigError("anchors " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

NoiseSpec NoiseSpec::uniform(int m, double sigma_d, double sigma_rho) {
  return {Vec::Constant(m, sigma_d), Vec::Constant(m, sigma_rho)};
}

void NoiseSpec::validate() const {
  if (sigma_d.size() != sigma_rho.size()) throw ConfigError("noise vectors differ in length");
  auto positive = [](const Vec& s) { return s.allFinite() && (s.array() > 0.0).all(); };
  if (!positive(sigma_d) || !positive(sigma_rho)) throw ConfigError("noise STDs must be positive and finite");
}

Vec NoiseSpec::weights() const {
  const int m = size();
  Vec w(2 * m);
  w.head(m) = sigma_d.array().square().inverse();
  w.tail(m) = sigma_rho.array().square().inverse();
  return w;
}

void MeasurementSet::validate() const {
  if (d.size() != rho.size() || d.size() != noise.size()) {
    throw ConfigError("measurement and noise vectors must share length M");
  }
  noise.validate();
}

Vec MeasurementSet::stacked() const {
  Vec tau(2 * size());
  tau << d, rho;
  return tau;
}

AidingVelocity AidingVelocity::isotropic(const Vec& v_tilde, double sigma) {
  const auto n = v_tilde.size();
  return {v_tilde, Mat::Identity(n, n) * (sigma * sigma)};
}

void AidingVelocity::validate() const {
  const auto n = v_tilde.size();
  if (sigma_v.rows() != n || sigma_v.cols() != n) throw ConfigError("aiding covariance must be N x N");
  if (!v_tilde.allFinite() || !sigma_v.allFinite()) throw ConfigError("aiding velocity must be finite");
  const double scale = sigma_v.cwiseAbs().maxCoeff();
  if ((sigma_v - sigma_v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("aiding covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(sigma_v, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ConfigError("aiding covariance must be positive definite");
}

Mat AidingVelocity::information() const {
  return sigma_v.llt().solve(Mat::Identity(sigma_v.rows(), sigma_v.cols()));
}

void AidingDrift::validate() const {
  if (!std::isfinite(k_tilde)) throw ConfigError("aiding drift must be finite");
  if (!(sigma_k > 0.0) || !std::isfinite(sigma_k)) throw ConfigError("aiding drift STD must be positive");
}

}  // namespace dtloc
