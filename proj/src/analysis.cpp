// SPDX-License-Identifier: Apache-2.0
#include "dtloc/analysis.hpp"

#include "dtloc/model.hpp"
#include "dtloc/normal_equations.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace dtloc {
namespace {

FimReport report_from(Mat fim, int n) {
  FimReport out;
  const Mat inv = NormalSolver(fim).inverse();
  out.fim = std::move(fim);
  out.crlb = inv.diagonal();
  out.grouped_rmse = block_root_sums(out.crlb, n);
  return out;
}

void check(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise) {
  theta.validate();
  noise.validate();
  if (noise.size() != layout.size()) throw ConfigError("noise spec length differs from anchor count");
}

// Lambda^T Sigma_v^{-1} Lambda, the velocity pseudo-measurement information.
Mat velocity_information(int n, const AidingVelocity& aiding) {
  const ParamIndex ix{n};
  Mat info = Mat::Zero(ix.size(), ix.size());
  info.block(ix.velocity(), ix.velocity(), n, n) = aiding.information();
  return info;
}

Mat drift_information(int n, const AidingDrift& aiding) {
  const ParamIndex ix{n};
  Mat info = Mat::Zero(ix.size(), ix.size());
  info(ix.clock_drift(), ix.clock_drift()) = 1.0 / (aiding.sigma_k * aiding.sigma_k);
  return info;
}

Mat full_fim(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise) {
  return weighted_normal(jacobian(theta, layout), noise.weights());
}

double min_eigenvalue(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

BiasPrediction predict(const Mat& fim, const Vec& information_rhs, int n) {
  const NormalSolver normal(fim);
  BiasPrediction out;
  out.bias = normal.solve(information_rhs);
  out.variance = normal.inverse();
  out.rmse = block_root_sums(out.bias.array().square().matrix() + out.variance.diagonal(), n);
  return out;
}

}  // namespace

FimReport fim_sdt(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise) {
  check(theta, layout, noise);
  return report_from(full_fim(theta, layout, noise), layout.dim());
}

FimReport fim_sdt_v(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                    const AidingVelocity& aiding) {
  check(theta, layout, noise);
  aiding.validate();
  return report_from(full_fim(theta, layout, noise) + velocity_information(layout.dim(), aiding), layout.dim());
}

FimReport fim_sdt_k(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                    const AidingDrift& aiding) {
  check(theta, layout, noise);
  aiding.validate();
  return report_from(full_fim(theta, layout, noise) + drift_information(layout.dim(), aiding), layout.dim());
}

FimReport fim_lspm_uvd(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise) {
  check(theta, layout, noise);
  const int m = layout.size();
  const Mat g_rho = jacobian(theta, layout).bottomRows(m);
  return report_from(weighted_normal(g_rho, noise.weights().tail(m)), layout.dim());
}

SolveResult solve_lspm_uvd(const Vec& rho, const Vec& sigma_rho, const AnchorLayout& layout,
                           const SolverConfig& cfg) {
  cfg.validate();
  const int m = layout.size();
  if (rho.size() != m || sigma_rho.size() != m) throw ConfigError("TOA vectors must have one entry per anchor");
  if (!sigma_rho.allFinite() || !(sigma_rho.array() > 0.0).all()) throw ConfigError("TOA STDs must be positive");
  if (cfg.theta0.dim() != layout.dim()) throw ConfigError("initial estimate dimension differs from layout");

  Vec h;
  Mat g;
  auto lin = [&](const ParameterVector& theta, Vec& r, Mat& G) {
    linearize(theta, layout, h, g);
    r = rho - h.tail(m);
    G = g.bottomRows(m);
  };
  return detail::gauss_newton(lin, sigma_rho.array().square().inverse().matrix(), cfg);
}

BiasPrediction bias_deviated_velocity(const ParameterVector& theta, const AnchorLayout& layout,
                                      const NoiseSpec& noise, const AidingVelocity& aiding, const Vec& delta_v) {
  check(theta, layout, noise);
  aiding.validate();
  const ParamIndex ix{layout.dim()};
  if (delta_v.size() != ix.n) throw ConfigError("velocity deviation dimension differs from layout");
  const Mat fim = full_fim(theta, layout, noise) + velocity_information(ix.n, aiding);
  // G_v^T W_v [0; dv] only touches the aiding rows: Lambda^T Sigma_v^{-1} dv.
  Vec rhs = Vec::Zero(ix.size());
  rhs.segment(ix.velocity(), ix.n) = aiding.information() * delta_v;
  return predict(fim, rhs, ix.n);
}

BiasPrediction bias_deviated_drift(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                                   const AidingDrift& aiding, double delta_k) {
  check(theta, layout, noise);
  aiding.validate();
  const ParamIndex ix{layout.dim()};
  const Mat fim = full_fim(theta, layout, noise) + drift_information(ix.n, aiding);
  Vec rhs = Vec::Zero(ix.size());
  rhs(ix.clock_drift()) = delta_k / (aiding.sigma_k * aiding.sigma_k);
  return predict(fim, rhs, ix.n);
}

Mat bias_quadratic_form(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                        const AidingVelocity& aiding) {
  check(theta, layout, noise);
  aiding.validate();
  const ParamIndex ix{layout.dim()};
  const Mat fim = full_fim(theta, layout, noise) + velocity_information(ix.n, aiding);
  Mat lambda_info = Mat::Zero(ix.size(), ix.n);
  lambda_info.middleRows(ix.velocity(), ix.n) = aiding.information();
  const Mat gain = NormalSolver(fim).inverse() * lambda_info;
  Mat s = gain.transpose() * gain;
  return 0.5 * (s + s.transpose());
}

double RemarkReport::min_eigen_margin() const {
  return std::min({doppler_info_margin, velocity_info_margin, velocity_cov_margin, drift_info_margin,
                   drift_cov_margin});
}

RemarkReport remark_checks(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                           const AidingVelocity& aiding_v, const AidingDrift& aiding_k, int bias_samples,
                           std::uint64_t seed) {
  const int n = layout.dim();
  RemarkReport out;

  const FimReport full = fim_sdt(theta, layout, noise);
  const FimReport toa = fim_lspm_uvd(theta, layout, noise);
  out.doppler_info_margin = min_eigenvalue(full.fim - toa.fim);
  out.doppler_crlb_margin = (toa.crlb - full.crlb).minCoeff();
  out.doppler_gain = out.doppler_info_margin >= -kPsdTolerance && out.doppler_crlb_margin > 0.0;

  const Mat full_cov = NormalSolver(full.fim).inverse();
  auto aided = [&](const FimReport& r, double& info_margin, double& cov_margin) {
    info_margin = min_eigenvalue(r.fim - full.fim);
    cov_margin = min_eigenvalue(full_cov - NormalSolver(r.fim).inverse());
    const bool crlb_ok = ((r.crlb - full.crlb).array() <= 1e-12 * full.crlb.array()).all();
    return info_margin >= -kPsdTolerance && cov_margin >= -kPsdTolerance && crlb_ok;
  };
  out.velocity_gain = aided(fim_sdt_v(theta, layout, noise, aiding_v), out.velocity_info_margin,
                            out.velocity_cov_margin);
  out.drift_gain = aided(fim_sdt_k(theta, layout, noise, aiding_k), out.drift_info_margin, out.drift_cov_margin);

  const Mat s = bias_quadratic_form(theta, layout, noise, aiding_v);
  out.beta = min_eigenvalue(s);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(0.0, 50.0);
  out.bias_bound_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < bias_samples; ++i) {
    Vec dv(n);
    for (int j = 0; j < n; ++j) dv(j) = gauss(rng);
    dv *= magnitude(rng) / dv.norm();
    const BiasPrediction pred = bias_deviated_velocity(theta, layout, noise, aiding_v, dv);
    out.bias_bound_margin = std::min(out.bias_bound_margin, pred.bias.squaredNorm() - out.beta * dv.squaredNorm());
  }
  out.bias_bound = out.beta > 0.0 && out.bias_bound_margin >= -1e-9;
  return out;
}

}  // namespace dtloc
