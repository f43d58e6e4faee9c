// SPDX-License-Identifier: Apache-2.0
//
// dtloc: Monte-Carlo sweeps, CRLB maps and ordering checks for joint
// Doppler/TOA localization and synchronization.

#include "dtloc/analysis.hpp"
#include "dtloc/csv.hpp"
#include "dtloc/harness.hpp"
#include "dtloc/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace dtloc;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

struct CommonArgs {
  std::string config;
  std::uint64_t seed = 1;
  int trials = 5000;
  std::string out;
  std::string ud_case = "inside";
  std::string methods;
  bool no_timestamp = false;
  bool bench = false;
  std::string dump_trials;
  double sigma_rho = 0.0;
  double factor = 0.0;
  int threads = 0;
  int max_iter = 10;
  double thr = 1e-2;
};

struct Options {
  CLI::App* app = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* ud_case = nullptr;
  CLI::Option* sigma_rho = nullptr;
  CLI::Option* factor = nullptr;
};

// Precedence: subcommand defaults < config file < explicit flags.
ScenarioConfig effective_config(const CommonArgs& args, const Options& opts, double default_sigma) {
  ScenarioConfig cfg;
  cfg.sigma_rho = default_sigma;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw ConfigError("cannot open config file " + args.config);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_scenario_config(buf.str(), cfg);
  }
  if (opts.seed->count() > 0) cfg.seed = args.seed;
  if (opts.ud_case->count() > 0) cfg.ud_case = parse_case(args.ud_case);
  if (opts.sigma_rho->count() > 0) cfg.sigma_rho = args.sigma_rho;
  if (opts.factor->count() > 0) cfg.doppler_noise_factor = args.factor;
  cfg.validate();
  return cfg;
}

RunOptions run_options(const CommonArgs& args) {
  RunOptions o;
  o.trials = args.trials;
  o.max_iter = args.max_iter;
  o.thr = args.thr;
  o.keep_records = !args.dump_trials.empty();
  return o;
}

class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

int emit_sweep(const SweepResult& sweep, const CommonArgs& args, const ScenarioConfig& cfg) {
  CsvMetadata meta;
  meta.timestamp = !args.no_timestamp;
  meta.rng = std::string(kRngName);
  // One-line config for the metadata comment.
  meta.extra = "config=" + nlohmann::json::parse(dump_scenario_config(cfg)).dump();
  Output out(args.out);
  write_sweep_csv(out.stream(), sweep, meta);

  if (!args.dump_trials.empty()) {
    std::ofstream dump(args.dump_trials, std::ios::binary);
    if (!dump) throw ConfigError("cannot open trial dump " + args.dump_trials);
    write_trial_dump(dump, sweep);
  }

  bool any_all_failed = false;
  for (const SweepRow& r : sweep.rows) {
    if (args.bench) {
      std::fprintf(stderr, "bench %s=%g %s: %.4f ms per solve, %.2f iterations, %d trials\n", sweep.axis_name.c_str(),
                   r.axis_value, std::string(to_string(r.method)).c_str(), 1e3 * r.stats.mean_solve_seconds,
                   r.stats.mean_iterations, r.stats.trials);
    }
    any_all_failed = any_all_failed || r.stats.failures == r.stats.trials;
  }
  return any_all_failed ? kExitAllFailed : kExitOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

int crlb_map(const CommonArgs& args, const ScenarioConfig& cfg) {
  const std::vector<Method> methods =
      parse_method_list(args.methods.empty() ? std::string("SDT,LSPM_UVD") : args.methods);
  const AnchorLayout layout = build_layout(cfg);
  const Mat grid = ud_grid(cfg);
  const NoiseSpec noise = cfg.noise();

  Output out(args.out);
  CsvWriter csv(out.stream());
  csv.comment("schema=dtloc-crlb-map/1");
  csv.comment("case=" + std::string(to_string(cfg.ud_case)) + " sigma_rho_m=" + format_number(cfg.sigma_rho) +
              " sigma_d_mps=" + format_number(cfg.sigma_d()) + " theta: v=0 b=0 k=0");
  csv.row({"x_m", "y_m", "method", "crlb_pos_m", "crlb_clk_m", "crlb_vel_mps", "crlb_drift_mps"});
  for (Method m : methods) {
    for (Eigen::Index j = 0; j < grid.cols(); ++j) {
      ParameterVector theta = ParameterVector::zeros(2);
      theta.p = grid.col(j);
      FimReport rep;
      switch (m) {
        case Method::SDT: rep = fim_sdt(theta, layout, noise); break;
        case Method::LSPM_UVD: rep = fim_lspm_uvd(theta, layout, noise); break;
        case Method::SDT_V:
          rep = fim_sdt_v(theta, layout, noise,
                          AidingVelocity::isotropic(theta.v, cfg.sigma_v_factor * cfg.sigma_rho));
          break;
        case Method::SDT_K:
          rep = fim_sdt_k(theta, layout, noise, AidingDrift{theta.k, cfg.sigma_k_factor * cfg.sigma_rho});
          break;
      }
      csv.row({format_number(grid(0, j)), format_number(grid(1, j)), to_string(m),
               format_number(rep.grouped_rmse.position), format_number(rep.grouped_rmse.clock_offset),
               format_number(rep.grouped_rmse.velocity), format_number(rep.grouped_rmse.clock_drift)});
    }
  }
  return kExitOk;
}

int check_remarks(const CommonArgs& args, const ScenarioConfig& cfg) {
  Output out(args.out);
  CsvWriter csv(out.stream());
  csv.comment("schema=dtloc-remarks/1");
  csv.comment("seed=" + std::to_string(cfg.seed) + " instances=" + std::to_string(args.trials));
  csv.row({"instance", "dim", "anchors", "doppler_gain", "doppler_info_margin", "doppler_crlb_margin",
           "velocity_gain", "velocity_info_margin", "velocity_cov_margin", "drift_gain", "drift_info_margin",
           "drift_cov_margin", "bias_bound", "beta", "bias_bound_margin"});
  int failures = 0;
  for (int i = 0; i < args.trials; ++i) {
    RngStream rng = trial_stream(cfg.seed, static_cast<std::uint64_t>(i));
    const int n = i % 2 == 0 ? 2 : 3;
    const RandomInstance inst = random_instance(rng, n);
    const RemarkReport r = remark_checks(inst.theta, inst.layout, inst.noise, inst.aiding_v, inst.aiding_k);
    failures += r.all_passed() ? 0 : 1;
    auto flag = [](bool b) { return b ? "1" : "0"; };
    csv.row({std::to_string(i), std::to_string(n), std::to_string(inst.layout.size()), flag(r.doppler_gain),
             format_number(r.doppler_info_margin), format_number(r.doppler_crlb_margin), flag(r.velocity_gain),
             format_number(r.velocity_info_margin), format_number(r.velocity_cov_margin), flag(r.drift_gain),
             format_number(r.drift_info_margin), format_number(r.drift_cov_margin), flag(r.bias_bound),
             format_number(r.beta), format_number(r.bias_bound_margin)});
  }
  if (failures > 0) std::fprintf(stderr, "check-remarks: %d of %d instances failed\n", failures, args.trials);
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint Doppler/TOA localization and synchronization: Monte-Carlo sweeps and CRLB analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs args;
  Options opts;
  opts.app = &app;
  app.add_option("--config", args.config, "JSON scenario config (keys mirror ScenarioConfig)")->check(CLI::ExistingFile);
  opts.seed = app.add_option("--seed", args.seed, "Base RNG seed");
  opts.trials = app.add_option("--trials", args.trials, "Monte-Carlo trials per point (instances for check-remarks)")
                    ->check(CLI::PositiveNumber);
  app.add_option("--out", args.out, "Output CSV path (default: stdout)");
  opts.ud_case = app.add_option("--case", args.ud_case, "UD placement: inside|outside");
  app.add_option("--method", args.methods, "Comma-separated methods: SDT,SDT_V,SDT_K,LSPM_UVD");
  app.add_flag("--no-timestamp", args.no_timestamp, "Omit the generated= metadata line");
  app.add_flag("--bench", args.bench, "Report mean per-solve wall time on stderr");
  app.add_option("--dump-trials", args.dump_trials, "Write per-trial CSV to this path");
  opts.sigma_rho = app.add_option("--sigma-rho", args.sigma_rho, "TOA noise STD [m]")->check(CLI::PositiveNumber);
  opts.factor = app.add_option("--factor", args.factor, "sigma_d/sigma_rho [(m/s)/m]")->check(CLI::PositiveNumber);
  app.add_option("--threads", args.threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--max-iter", args.max_iter, "Maximum Gauss-Newton iterations")->check(CLI::PositiveNumber);
  app.add_option("--thr", args.thr, "Convergence threshold on the position/clock step [m]")
      ->check(CLI::PositiveNumber);

  std::string levels, radii, norms, ppm;
  auto* noise_cmd = app.add_subcommand("sweep-noise", "RMSE and CRLB versus sigma_rho");
  noise_cmd->add_option("--levels", levels, "sigma_rho levels [m] (default: 0.1..10, 5 log steps)");
  auto* init_cmd = app.add_subcommand("sweep-init", "Iterations and RMSE versus initial position error");
  init_cmd->add_option("--radii", radii, "Initial error radii [m] (default: 60,100,200,300)");
  auto* vel_cmd = app.add_subcommand("sweep-vel-dev", "LAS with deviated velocity aiding versus theory");
  vel_cmd->add_option("--norms", norms, "Deviation norms [m/s] (default: 0,10,20,30,40,50)");
  auto* drift_cmd = app.add_subcommand("sweep-drift-dev", "LAS with deviated drift aiding versus theory");
  drift_cmd->add_option("--ppm", ppm, "Deviation magnitudes [ppm] (default: 0,0.04,...,0.2)");
  auto* map_cmd = app.add_subcommand("crlb-map", "Per-grid-point CRLB for the configured case");
  auto* remarks_cmd = app.add_subcommand("check-remarks", "FIM/CRLB ordering and bias bound on random geometries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (args.threads > 0) omp_set_num_threads(args.threads);
    RunOptions run = run_options(args);

    if (noise_cmd->parsed()) {
      const ScenarioConfig cfg = effective_config(args, opts, 10.0);
      const std::vector<Method> methods =
          parse_method_list(args.methods.empty() ? std::string("SDT,LSPM_UVD") : args.methods);
      const std::vector<double> lv = levels.empty() ? default_noise_levels() : parse_list(levels);
      return emit_sweep(sweep_noise(cfg, methods, lv, run), args, cfg);
    }
    if (init_cmd->parsed()) {
      const ScenarioConfig cfg = effective_config(args, opts, 10.0);
      const std::vector<double> r = radii.empty() ? std::vector<double>{60, 100, 200, 300} : parse_list(radii);
      return emit_sweep(sweep_init_error(cfg, r, run), args, cfg);
    }
    if (vel_cmd->parsed()) {
      const ScenarioConfig cfg = effective_config(args, opts, 0.1);
      const std::vector<double> n = norms.empty() ? std::vector<double>{0, 10, 20, 30, 40, 50} : parse_list(norms);
      return emit_sweep(sweep_velocity_deviation(cfg, n, run), args, cfg);
    }
    if (drift_cmd->parsed()) {
      const ScenarioConfig cfg = effective_config(args, opts, 0.1);
      const std::vector<double> d =
          ppm.empty() ? std::vector<double>{0, 0.04, 0.08, 0.12, 0.16, 0.2} : parse_list(ppm);
      return emit_sweep(sweep_drift_deviation(cfg, d, run), args, cfg);
    }
    if (map_cmd->parsed()) return crlb_map(args, effective_config(args, opts, 10.0));
    if (remarks_cmd->parsed()) {
      if (opts.trials->count() == 0) args.trials = 200;
      return check_remarks(args, effective_config(args, opts, 10.0));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
