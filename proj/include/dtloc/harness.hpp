// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/scenario.hpp"
#include "dtloc/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtloc {

enum class Method { SDT, SDT_V, SDT_K, LSPM_UVD };

std::string_view to_string(Method m);
/// Accepts SDT, SDT_V, SDT_K, LSPM_UVD (case-insensitive, '-' or '_').
Method parse_method(std::string_view text);
/// Comma-separated list of methods.
std::vector<Method> parse_method_list(std::string_view text);

struct RunOptions {
  int trials = 5000;
  int max_iter = 10;
  double thr = 1e-2;
  // Aiding deviation magnitudes; directions/signs are drawn per trial.
  double velocity_deviation = 0.0;  // |v - v_aiding| [m/s]
  double drift_deviation = 0.0;     // |k - k_aiding| [m/s]
  bool keep_records = false;        // retain per-trial records in PointStats
};

struct TrialRecord {
  std::uint64_t index = 0;
  ParameterVector truth;
  ParameterVector estimate;  // empty vectors when failed
  int iterations = 0;
  bool converged = false;
  bool failed = false;  // solver threw (singular normal matrix or degenerate geometry)
  BlockValues error_sq;   // squared estimation error per block
  BlockValues theory_sq;  // squared predicted RMSE per block (CRLB or deviated-aiding RMSE)
  bool theory_ok = false;
  double solve_seconds = 0.0;
};

struct PointStats {
  int trials = 0;
  int failures = 0;
  int converged = 0;
  double convergence_rate = 0.0;
  double mean_iterations = 0.0;
  BlockValues rmse;            // over all non-failed trials, converged or not
  BlockValues rmse_converged;  // over converged trials only
  BlockValues theory;          // sqrt(mean of per-trial squared predictions)
  double mean_solve_seconds = 0.0;
  std::vector<TrialRecord> records;
};

/// Generates and solves one trial. Solver errors are captured in the record.
TrialRecord run_trial(const ScenarioConfig& cfg, Method method, const RunOptions& opts, std::uint64_t index);

/// Deterministic index-order reduction of per-trial records.
PointStats reduce_trials(std::span<const TrialRecord> records, bool keep_records);

/// OpenMP-parallel Monte-Carlo over trials 0..trials-1.
PointStats monte_carlo(const ScenarioConfig& cfg, Method method, const RunOptions& opts);

/// Single-threaded reference; produces bit-identical statistics to monte_carlo.
PointStats monte_carlo_serial(const ScenarioConfig& cfg, Method method, const RunOptions& opts);

struct SweepRow {
  double axis_value = 0.0;
  Method method = Method::SDT;
  double sigma_rho = 0.0;
  double sigma_d = 0.0;
  PointStats stats;
};

struct SweepResult {
  std::string sweep;      // CLI subcommand name
  std::string axis_name;  // column label for axis_value, with unit
  UdCase ud_case = UdCase::Inside;
  std::uint64_t seed = 0;
  std::vector<double> axis;
  std::vector<SweepRow> rows;  // axis-major, then method

  const SweepRow& at(double axis_value, Method method) const;
};

/// sigma_rho levels 0.1 .. 10 m, logarithmically spaced.
std::vector<double> default_noise_levels(int steps = 5);

SweepResult sweep_noise(const ScenarioConfig& cfg, std::span<const Method> methods, std::span<const double> levels,
                        const RunOptions& opts);
SweepResult sweep_init_error(const ScenarioConfig& cfg, std::span<const double> radii, const RunOptions& opts);
SweepResult sweep_velocity_deviation(const ScenarioConfig& cfg, std::span<const double> norms,
                                     const RunOptions& opts);
/// Deviations given in ppm of the clock rate, converted with c.
SweepResult sweep_drift_deviation(const ScenarioConfig& cfg, std::span<const double> deviations_ppm,
                                  const RunOptions& opts);

}  // namespace dtloc
