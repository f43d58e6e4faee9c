// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/types.hpp"

#include <functional>
#include <vector>

namespace dtloc {

struct SolverConfig {
  int max_iter = 10;
  double thr = 1e-2;  // on |step[position, clock offset]| [m]
  ParameterVector theta0;

  void validate() const;
};

struct SolveResult {
  ParameterVector theta_hat;
  Mat covariance;  // (G^T W G)^{-1} at theta_hat (augmented for aided variants)
  int iterations = 0;
  bool converged = false;
  double final_step_norm = 0.0;
  // Weighted objective |z - y(theta)|^2_W at theta0, theta1, ... and the returned estimate.
  std::vector<double> objective_trace;
};

/// One weighted least-squares step (G^T W G)^{-1} G^T W r with diagonal W = diag(w).
/// Throws SingularMatrixError if the scaled normal matrix is ill-conditioned.
Vec wls_step(const Vec& residual, const Mat& G, const Vec& w);

// Iterative WLS over Doppler + TOA. Non-convergence within max_iter is
// reported through SolveResult::converged (the lowest-objective iterate is
// returned); singular normal matrices and degenerate geometry throw with the
// iteration index attached.
SolveResult solve_las_sdt(const MeasurementSet& tau, const AnchorLayout& layout, const SolverConfig& cfg);

/// Velocity-aided variant: v_tilde enters as an N-dimensional pseudo-measurement.
SolveResult solve_las_sdt_v(const MeasurementSet& tau, const AidingVelocity& aiding, const AnchorLayout& layout,
                            const SolverConfig& cfg);

/// Drift-aided variant: k_tilde enters as a scalar pseudo-measurement.
SolveResult solve_las_sdt_k(const MeasurementSet& tau, const AidingDrift& aiding, const AnchorLayout& layout,
                            const SolverConfig& cfg);

namespace detail {

// Fills the stacked residual z - y(theta) and design matrix dy/dtheta, both
// already whitened so that the weights below are the only scaling applied.
using Linearizer = std::function<void(const ParameterVector& theta, Vec& residual, Mat& design)>;

SolveResult gauss_newton(const Linearizer& linearize, const Vec& weights, const SolverConfig& cfg);

}  // namespace detail
}  // namespace dtloc
