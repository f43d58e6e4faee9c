// SPDX-License-Identifier: Apache-2.0
#include "dtloc/estimator.hpp"

#include "dtloc/model.hpp"
#include "dtloc/normal_equations.hpp"

#include <cmath>
#include <limits>

namespace dtloc {

void SolverConfig::validate() const {
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(thr > 0.0)) throw ConfigError("convergence threshold must be positive");
  theta0.validate();
}

Vec wls_step(const Vec& residual, const Mat& G, const Vec& w) {
  if (G.rows() != residual.size() || w.size() != residual.size()) throw ConfigError("WLS dimensions differ");
  if (!(w.array() > 0.0).all()) throw ConfigError("WLS weights must be positive");
  const NormalSolver normal(weighted_normal(G, w));
  return normal.solve(G.transpose() * w.cwiseProduct(residual));
}

namespace detail {

SolveResult gauss_newton(const Linearizer& linearize, const Vec& weights, const SolverConfig& cfg) {
  cfg.validate();
  const int n = cfg.theta0.dim();
  const int pos_clock = n + 1;

  SolveResult out;
  Vec theta = cfg.theta0.flatten();
  Vec best = theta;
  double best_objective = std::numeric_limits<double>::infinity();
  Vec residual;
  Mat design;

  auto evaluate = [&](const Vec& at, int iteration) {
    try {
      linearize(ParameterVector::from_flat(at), residual, design);
    } catch (const DegenerateGeometryError& e) {
      throw DegenerateGeometryError(e.anchor(), iteration);
    }
    const double objective = residual.cwiseProduct(weights).dot(residual);
    out.objective_trace.push_back(objective);
    if (objective < best_objective) {
      best_objective = objective;
      best = at;
    }
    return objective;
  };

  for (int s = 1; s <= cfg.max_iter; ++s) {
    evaluate(theta, s);
    const NormalSolver normal(weighted_normal(design, weights), s);
    const Vec step = normal.solve(design.transpose() * weights.cwiseProduct(residual));
    theta += step;
    out.iterations = s;
    out.final_step_norm = step.head(pos_clock).norm();
    if (!theta.allFinite()) throw SingularMatrixError(std::numeric_limits<double>::infinity(), s);
    if (out.final_step_norm < cfg.thr) {
      out.converged = true;
      break;
    }
  }

  evaluate(theta, out.iterations);
  if (!out.converged && best != theta) {
    // Fall back to the lowest-objective iterate; the trace keeps its last
    // entry equal to the objective of what is returned.
    theta = best;
    linearize(ParameterVector::from_flat(theta), residual, design);
    out.objective_trace.push_back(best_objective);
  }

  out.theta_hat = ParameterVector::from_flat(theta);
  out.covariance = NormalSolver(weighted_normal(design, weights), out.iterations).inverse();
  return out;
}

}  // namespace detail

namespace {

void check_inputs(const MeasurementSet& tau, const AnchorLayout& layout, const SolverConfig& cfg) {
  tau.validate();
  cfg.validate();
  if (tau.size() != layout.size()) throw ConfigError("measurement count differs from anchor count");
  if (cfg.theta0.dim() != layout.dim()) throw ConfigError("initial estimate dimension differs from layout");
}

}  // namespace

SolveResult solve_las_sdt(const MeasurementSet& tau, const AnchorLayout& layout, const SolverConfig& cfg) {
  check_inputs(tau, layout, cfg);
  const Vec z = tau.stacked();
  Vec h;
  auto lin = [&](const ParameterVector& theta, Vec& r, Mat& G) {
    linearize(theta, layout, h, G);
    r = z - h;
  };
  return detail::gauss_newton(lin, tau.noise.weights(), cfg);
}

SolveResult solve_las_sdt_v(const MeasurementSet& tau, const AidingVelocity& aiding, const AnchorLayout& layout,
                            const SolverConfig& cfg) {
  check_inputs(tau, layout, cfg);
  aiding.validate();
  const int m = layout.size();
  const ParamIndex ix{layout.dim()};
  if (aiding.v_tilde.size() != ix.n) throw ConfigError("aiding velocity dimension differs from layout");

  // Whiten the aiding block: with Sigma_v = L L^T, rows L^{-1}(v_tilde - v)
  // carry unit weight and reproduce the Sigma_v^{-1} quadratic form.
  const Eigen::LLT<Mat> chol(aiding.sigma_v);
  const Mat whiten = chol.matrixL().solve(Mat::Identity(ix.n, ix.n));
  const Vec z = tau.stacked();

  Vec weights(2 * m + ix.n);
  weights << tau.noise.weights(), Vec::Ones(ix.n);

  Vec h;
  Mat g;
  auto lin = [&](const ParameterVector& theta, Vec& r, Mat& G) {
    linearize(theta, layout, h, g);
    r.resize(2 * m + ix.n);
    r.head(2 * m) = z - h;
    r.tail(ix.n) = whiten * (aiding.v_tilde - theta.v);
    G.setZero(2 * m + ix.n, ix.size());
    G.topRows(2 * m) = g;
    G.bottomRows(ix.n).middleCols(ix.velocity(), ix.n) = whiten;
  };
  return detail::gauss_newton(lin, weights, cfg);
}

SolveResult solve_las_sdt_k(const MeasurementSet& tau, const AidingDrift& aiding, const AnchorLayout& layout,
                            const SolverConfig& cfg) {
  check_inputs(tau, layout, cfg);
  aiding.validate();
  const int m = layout.size();
  const ParamIndex ix{layout.dim()};
  const Vec z = tau.stacked();

  Vec weights(2 * m + 1);
  weights << tau.noise.weights(), 1.0 / (aiding.sigma_k * aiding.sigma_k);

  Vec h;
  Mat g;
  auto lin = [&](const ParameterVector& theta, Vec& r, Mat& G) {
    linearize(theta, layout, h, g);
    r.resize(2 * m + 1);
    r.head(2 * m) = z - h;
    r(2 * m) = aiding.k_tilde - theta.k;
    G.setZero(2 * m + 1, ix.size());
    G.topRows(2 * m) = g;
    G(2 * m, ix.clock_drift()) = 1.0;
  };
  return detail::gauss_newton(lin, weights, cfg);
}

}  // namespace dtloc
