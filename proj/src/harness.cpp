// SPDX-License-Identifier: Apache-2.0
#include "dtloc/harness.hpp"

#include "dtloc/analysis.hpp"
#include "dtloc/estimator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace dtloc {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::SDT: return "SDT";
    case Method::SDT_V: return "SDT_V";
    case Method::SDT_K: return "SDT_K";
    case Method::LSPM_UVD: return "LSPM_UVD";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  std::string key;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    key.push_back(ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  for (Method m : {Method::SDT, Method::SDT_V, Method::SDT_K, Method::LSPM_UVD}) {
    if (key == to_string(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::vector<Method> parse_method_list(std::string_view text) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!piece.empty()) out.push_back(parse_method(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("method list is empty");
  return out;
}

TrialRecord run_trial(const ScenarioConfig& cfg, Method method, const RunOptions& opts, std::uint64_t index) {
  RngStream rng;
  const TrialTruth trial = generate_trial(cfg, index, rng);
  const ParameterVector& truth = trial.theta_true;
  const NoiseSpec& noise = trial.measurements.noise;
  const int n = truth.dim();

  TrialRecord rec;
  rec.index = index;
  rec.truth = truth;

  const SolverConfig solver{opts.max_iter, opts.thr, trial.theta0};
  const double scale = cfg.inject_noise ? 1.0 : 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Aiding draws happen only for the aided methods, after synthesis, so the
  // measurement stream is shared by every method for the same trial index.
  std::optional<AidingVelocity> aid_v;
  std::optional<AidingDrift> aid_k;
  Vec delta_v = Vec::Zero(n);
  double delta_k = 0.0;
  if (method == Method::SDT_V) {
    const double sigma_v = cfg.sigma_v_factor * cfg.sigma_rho;
    const double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    delta_v << opts.velocity_deviation * std::cos(heading), opts.velocity_deviation * std::sin(heading);
    Vec noise_v(n);
    for (int j = 0; j < n; ++j) noise_v(j) = scale * sigma_v * gauss(rng);
    aid_v = AidingVelocity::isotropic(truth.v - delta_v + noise_v, sigma_v);
  } else if (method == Method::SDT_K) {
    const double sigma_k = cfg.sigma_k_factor * cfg.sigma_rho;
    delta_k = uniform(rng, 0.0, 1.0) < 0.5 ? -opts.drift_deviation : opts.drift_deviation;
    aid_k = AidingDrift{truth.k - delta_k + scale * sigma_k * gauss(rng), sigma_k};
  }

  try {
    Vec pred_sq;
    switch (method) {
      case Method::SDT: pred_sq = fim_sdt(truth, trial.layout, noise).crlb; break;
      case Method::LSPM_UVD: pred_sq = fim_lspm_uvd(truth, trial.layout, noise).crlb; break;
      case Method::SDT_V: {
        const auto p = bias_deviated_velocity(truth, trial.layout, noise, *aid_v, delta_v);
        pred_sq = p.bias.array().square().matrix() + p.variance.diagonal();
        break;
      }
      case Method::SDT_K: {
        const auto p = bias_deviated_drift(truth, trial.layout, noise, *aid_k, delta_k);
        pred_sq = p.bias.array().square().matrix() + p.variance.diagonal();
        break;
      }
    }
    rec.theory_sq = block_sums(pred_sq, n);
    rec.theory_ok = true;
  } catch (const SingularMatrixError&) {
    rec.theory_ok = false;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    SolveResult res;
    switch (method) {
      case Method::SDT: res = solve_las_sdt(trial.measurements, trial.layout, solver); break;
      case Method::SDT_V: res = solve_las_sdt_v(trial.measurements, *aid_v, trial.layout, solver); break;
      case Method::SDT_K: res = solve_las_sdt_k(trial.measurements, *aid_k, trial.layout, solver); break;
      case Method::LSPM_UVD:
        res = solve_lspm_uvd(trial.measurements.rho, noise.sigma_rho, trial.layout, solver);
        break;
    }
    rec.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.estimate = res.theta_hat;
    rec.iterations = res.iterations;
    rec.converged = res.converged;
    const Vec err = res.theta_hat.flatten() - truth.flatten();
    rec.error_sq = block_sums(err.array().square().matrix(), n);
  } catch (const SingularMatrixError& e) {
    rec.failed = true;
    rec.iterations = e.iteration();
  } catch (const DegenerateGeometryError& e) {
    rec.failed = true;
    rec.iterations = e.iteration();
  }
  return rec;
}

namespace {

void accumulate(BlockValues& acc, const BlockValues& x) {
  acc.position += x.position;
  acc.clock_offset += x.clock_offset;
  acc.velocity += x.velocity;
  acc.clock_drift += x.clock_drift;
}

BlockValues root_mean(const BlockValues& sum, int count) {
  if (count == 0) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  const double c = count;
  return {std::sqrt(sum.position / c), std::sqrt(sum.clock_offset / c), std::sqrt(sum.velocity / c),
          std::sqrt(sum.clock_drift / c)};
}

void prevalidate(const ScenarioConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (opts.trials < 1) throw ConfigError("trials must be at least 1");
  if (opts.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(opts.thr > 0.0)) throw ConfigError("convergence threshold must be positive");
  if (!(opts.velocity_deviation >= 0.0) || !(opts.drift_deviation >= 0.0)) {
    throw ConfigError("aiding deviations must be non-negative");
  }
  (void)build_layout(cfg);
}

}  // namespace

PointStats reduce_trials(std::span<const TrialRecord> records, bool keep_records) {
  PointStats out;
  out.trials = static_cast<int>(records.size());
  BlockValues err_all, err_conv, theory;
  int ok = 0, theory_count = 0;
  double iterations = 0.0, seconds = 0.0;
  for (const TrialRecord& r : records) {
    if (r.theory_ok) {
      accumulate(theory, r.theory_sq);
      ++theory_count;
    }
    if (r.failed) {
      ++out.failures;
      continue;
    }
    ++ok;
    iterations += r.iterations;
    seconds += r.solve_seconds;
    accumulate(err_all, r.error_sq);
    if (r.converged) {
      ++out.converged;
      accumulate(err_conv, r.error_sq);
    }
  }
  out.convergence_rate = out.trials > 0 ? static_cast<double>(out.converged) / out.trials : 0.0;
  out.mean_iterations = ok > 0 ? iterations / ok : std::numeric_limits<double>::quiet_NaN();
  out.mean_solve_seconds = ok > 0 ? seconds / ok : 0.0;
  out.rmse = root_mean(err_all, ok);
  out.rmse_converged = root_mean(err_conv, out.converged);
  out.theory = root_mean(theory, theory_count);
  if (keep_records) out.records.assign(records.begin(), records.end());
  return out;
}

PointStats monte_carlo_serial(const ScenarioConfig& cfg, Method method, const RunOptions& opts) {
  prevalidate(cfg, opts);
  std::vector<TrialRecord> records(static_cast<std::size_t>(opts.trials));
  for (int i = 0; i < opts.trials; ++i) records[i] = run_trial(cfg, method, opts, static_cast<std::uint64_t>(i));
  return reduce_trials(records, opts.keep_records);
}

PointStats monte_carlo(const ScenarioConfig& cfg, Method method, const RunOptions& opts) {
  prevalidate(cfg, opts);
  std::vector<TrialRecord> records(static_cast<std::size_t>(opts.trials));
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < opts.trials; ++i) {
    try {
      records[i] = run_trial(cfg, method, opts, static_cast<std::uint64_t>(i));
    } catch (...) {
#pragma omp critical(dtloc_mc_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return reduce_trials(records, opts.keep_records);
}

const SweepRow& SweepResult::at(double axis_value, Method method) const {
  for (const SweepRow& r : rows) {
    if (r.axis_value == axis_value && r.method == method) return r;
  }
  throw std::out_of_range("no sweep row for the requested axis value and method");
}

std::vector<double> default_noise_levels(int steps) {
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    const double exponent = steps == 1 ? 1.0 : -1.0 + 2.0 * i / (steps - 1);
    out.push_back(std::pow(10.0, exponent));
  }
  return out;
}

namespace {

SweepRow make_row(double axis, Method method, const ScenarioConfig& cfg, const RunOptions& opts) {
  return SweepRow{axis, method, cfg.sigma_rho, cfg.sigma_d(), monte_carlo(cfg, method, opts)};
}

SweepResult start(std::string name, std::string axis_name, const ScenarioConfig& cfg) {
  SweepResult out;
  out.sweep = std::move(name);
  out.axis_name = std::move(axis_name);
  out.ud_case = cfg.ud_case;
  out.seed = cfg.seed;
  return out;
}

}  // namespace

SweepResult sweep_noise(const ScenarioConfig& cfg, std::span<const Method> methods, std::span<const double> levels,
                        const RunOptions& opts) {
  if (methods.empty() || levels.empty()) throw ConfigError("noise sweep needs methods and levels");
  SweepResult out = start("sweep-noise", "sigma_rho_m", cfg);
  for (double level : levels) {
    ScenarioConfig c = cfg;
    c.sigma_rho = level;
    out.axis.push_back(level);
    for (Method m : methods) out.rows.push_back(make_row(level, m, c, opts));
  }
  return out;
}

SweepResult sweep_init_error(const ScenarioConfig& cfg, std::span<const double> radii, const RunOptions& opts) {
  if (radii.empty()) throw ConfigError("init sweep needs radii");
  SweepResult out = start("sweep-init", "init_radius_m", cfg);
  for (double r : radii) {
    ScenarioConfig c = cfg;
    c.init_radius = r;
    out.axis.push_back(r);
    out.rows.push_back(make_row(r, Method::SDT, c, opts));
  }
  return out;
}

SweepResult sweep_velocity_deviation(const ScenarioConfig& cfg, std::span<const double> norms,
                                     const RunOptions& opts) {
  if (norms.empty()) throw ConfigError("velocity deviation sweep needs norms");
  SweepResult out = start("sweep-vel-dev", "velocity_deviation_mps", cfg);
  for (double norm : norms) {
    RunOptions o = opts;
    o.velocity_deviation = norm;
    out.axis.push_back(norm);
    out.rows.push_back(make_row(norm, Method::SDT_V, cfg, o));
  }
  return out;
}

SweepResult sweep_drift_deviation(const ScenarioConfig& cfg, std::span<const double> deviations_ppm,
                                  const RunOptions& opts) {
  if (deviations_ppm.empty()) throw ConfigError("drift deviation sweep needs deviations");
  SweepResult out = start("sweep-drift-dev", "drift_deviation_ppm", cfg);
  for (double ppm : deviations_ppm) {
    RunOptions o = opts;
    o.drift_deviation = ppm * kPpm * kSpeedOfLight;
    out.axis.push_back(ppm);
    out.rows.push_back(make_row(ppm, Method::SDT_K, cfg, o));
  }
  return out;
}

}  // namespace dtloc
