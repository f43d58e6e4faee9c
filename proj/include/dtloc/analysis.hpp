// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/estimator.hpp"
#include "dtloc/types.hpp"

#include <cstdint>

namespace dtloc {

/// Fisher information and the CRLB derived from it.
struct FimReport {
  Mat fim;
  Vec crlb;                  // diag(F^{-1})
  BlockValues grouped_rmse;  // sqrt of block sums of crlb
};

/// Linearized prediction for an estimator fed a deviated aiding value.
struct BiasPrediction {
  Vec bias;      // S1 * [0; delta]
  Mat variance;  // F_v^{-1} or F_k^{-1}
  BlockValues rmse;
};

// All FIMs are evaluated at the supplied (true) parameter vector.
FimReport fim_sdt(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise);
FimReport fim_sdt_v(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                    const AidingVelocity& aiding);
FimReport fim_sdt_k(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                    const AidingDrift& aiding);
/// TOA-only baseline: only the M pseudorange rows.
FimReport fim_lspm_uvd(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise);

/// TOA-only Gauss-Newton baseline, same iteration and stop rule as solve_las_sdt.
SolveResult solve_lspm_uvd(const Vec& rho, const Vec& sigma_rho, const AnchorLayout& layout,
                           const SolverConfig& cfg);

// delta_v = v - v_aiding and delta_k = k - k_aiding. The bias sign follows
// that convention, i.e. bias = theta - E[theta_hat].
BiasPrediction bias_deviated_velocity(const ParameterVector& theta, const AnchorLayout& layout,
                                      const NoiseSpec& noise, const AidingVelocity& aiding, const Vec& delta_v);
BiasPrediction bias_deviated_drift(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                                   const AidingDrift& aiding, double delta_k);

/// N x N matrix S with |bias(delta_v)|^2 = delta_v^T S delta_v.
Mat bias_quadratic_form(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                        const AidingVelocity& aiding);

/// Tolerance on minimum eigenvalues in the ordering checks.
inline constexpr double kPsdTolerance = 1e-10;

struct RemarkReport {
  // (1) Doppler rows add information: F - F_toa >= 0 and CRLB < CRLB_toa.
  bool doppler_gain = false;
  double doppler_info_margin = 0.0;  // lambda_min(F - F_toa)
  double doppler_crlb_margin = 0.0;  // min_i (CRLB_toa[i] - CRLB[i])

  // (2) Aiding adds information: F_v - F >= 0, F^{-1} - F_v^{-1} >= 0, CRLB_v <= CRLB (and k).
  bool velocity_gain = false;
  double velocity_info_margin = 0.0;
  double velocity_cov_margin = 0.0;
  bool drift_gain = false;
  double drift_info_margin = 0.0;
  double drift_cov_margin = 0.0;

  // (3) |bias(delta_v)|^2 >= beta |delta_v|^2 with beta = lambda_min(S).
  bool bias_bound = false;
  double beta = 0.0;
  double bias_bound_margin = 0.0;  // min over samples of |bias|^2 - beta |delta_v|^2

  bool all_passed() const { return doppler_gain && velocity_gain && drift_gain && bias_bound; }
  double min_eigen_margin() const;
};

RemarkReport remark_checks(const ParameterVector& theta, const AnchorLayout& layout, const NoiseSpec& noise,
                           const AidingVelocity& aiding_v, const AidingDrift& aiding_k, int bias_samples = 64,
                           std::uint64_t seed = 0x5eed);

}  // namespace dtloc
