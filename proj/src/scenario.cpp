// SPDX-License-Identifier: Apache-2.0
#include "dtloc/scenario.hpp"

#include "dtloc/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dtloc {

std::string_view to_string(UdCase c) {
  return c == UdCase::Inside ? "inside" : "outside";
}

UdCase parse_case(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "inside") return UdCase::Inside;
  if (lower == "outside") return UdCase::Outside;
  throw ConfigError("unknown case '" + std::string(text) + "' (expected inside|outside)");
}

void ScenarioConfig::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (n_anchors < 3) throw ConfigError("n_anchors must be at least 3 for a 2D layout");
  if (!(square_side > 0.0) || !finite(square_side)) throw ConfigError("square_side must be positive");
  if (!(delta_t > 0.0) || !finite(delta_t)) throw ConfigError("delta_t must be positive");
  if (!(speed_min >= 0.0) || !(speed_min <= speed_max) || !finite(speed_max)) {
    throw ConfigError("speed range must satisfy 0 <= min <= max");
  }
  if (!(clock_offset_min <= clock_offset_max) || !finite(clock_offset_min) || !finite(clock_offset_max)) {
    throw ConfigError("clock offset range must be ordered");
  }
  if (!(clock_drift_min <= clock_drift_max) || !finite(clock_drift_min) || !finite(clock_drift_max)) {
    throw ConfigError("clock drift range must be ordered");
  }
  if (!(sigma_rho > 0.0) || !finite(sigma_rho)) throw ConfigError("sigma_rho must be positive");
  if (!(doppler_noise_factor > 0.0) || !finite(doppler_noise_factor)) {
    throw ConfigError("doppler_noise_factor must be positive");
  }
  if (!(init_radius >= 0.0) || !finite(init_radius)) throw ConfigError("init_radius must be non-negative");
  if (grid_per_side < 1) throw ConfigError("grid_per_side must be at least 1");
  if (!(ring_offset > 0.0) || !finite(ring_offset)) throw ConfigError("ring_offset must be positive");
  if (ring_points < 1) throw ConfigError("ring_points must be at least 1");
  if (!(sigma_v_factor > 0.0) || !(sigma_k_factor > 0.0)) throw ConfigError("aiding STD factors must be positive");
}

NoiseSpec ScenarioConfig::noise() const {
  return NoiseSpec::uniform(n_anchors, sigma_d(), sigma_rho);
}

namespace {

using nlohmann::json;

template <typename T>
void read(const json& doc, const char* key, T& field) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

// Point at arc length s along the boundary of the axis-aligned square with
// lower-left corner (origin, origin) and the given side, counter-clockwise.
Eigen::Vector2d perimeter_point(double origin, double side, double s) {
  const double edge = std::fmod(s, 4.0 * side);
  const int which = static_cast<int>(edge / side);
  const double t = edge - which * side;
  switch (which) {
    case 0: return {origin + t, origin};
    case 1: return {origin + side, origin + t};
    case 2: return {origin + side - t, origin + side};
    default: return {origin, origin + side - t};
  }
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view json_text, ScenarioConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  static const char* const known[] = {
      "case",          "n_anchors",    "square_side",     "delta_t",         "speed_min",      "speed_max",
      "clock_offset_min", "clock_offset_max", "clock_drift_min", "clock_drift_max", "sigma_rho",
      "doppler_noise_factor", "seed", "init_radius", "inject_noise", "grid_per_side", "ring_offset",
      "ring_points", "sigma_v_factor", "sigma_k_factor"};
  for (const auto& item : doc.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
        std::end(known)) {
      throw ConfigError("unknown config key '" + item.key() + "'");
    }
  }

  ScenarioConfig cfg = base;
  if (doc.contains("case")) {
    std::string text;
    read(doc, "case", text);
    cfg.ud_case = parse_case(text);
  }
  read(doc, "n_anchors", cfg.n_anchors);
  read(doc, "square_side", cfg.square_side);
  read(doc, "delta_t", cfg.delta_t);
  read(doc, "speed_min", cfg.speed_min);
  read(doc, "speed_max", cfg.speed_max);
  read(doc, "clock_offset_min", cfg.clock_offset_min);
  read(doc, "clock_offset_max", cfg.clock_offset_max);
  read(doc, "clock_drift_min", cfg.clock_drift_min);
  read(doc, "clock_drift_max", cfg.clock_drift_max);
  read(doc, "sigma_rho", cfg.sigma_rho);
  read(doc, "doppler_noise_factor", cfg.doppler_noise_factor);
  read(doc, "seed", cfg.seed);
  read(doc, "init_radius", cfg.init_radius);
  read(doc, "inject_noise", cfg.inject_noise);
  read(doc, "grid_per_side", cfg.grid_per_side);
  read(doc, "ring_offset", cfg.ring_offset);
  read(doc, "ring_points", cfg.ring_points);
  read(doc, "sigma_v_factor", cfg.sigma_v_factor);
  read(doc, "sigma_k_factor", cfg.sigma_k_factor);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

std::string dump_scenario_config(const ScenarioConfig& cfg) {
  json doc = {{"case", std::string(to_string(cfg.ud_case))},
              {"n_anchors", cfg.n_anchors},
              {"square_side", cfg.square_side},
              {"delta_t", cfg.delta_t},
              {"speed_min", cfg.speed_min},
              {"speed_max", cfg.speed_max},
              {"clock_offset_min", cfg.clock_offset_min},
              {"clock_offset_max", cfg.clock_offset_max},
              {"clock_drift_min", cfg.clock_drift_min},
              {"clock_drift_max", cfg.clock_drift_max},
              {"sigma_rho", cfg.sigma_rho},
              {"doppler_noise_factor", cfg.doppler_noise_factor},
              {"seed", cfg.seed},
              {"init_radius", cfg.init_radius},
              {"inject_noise", cfg.inject_noise},
              {"grid_per_side", cfg.grid_per_side},
              {"ring_offset", cfg.ring_offset},
              {"ring_points", cfg.ring_points},
              {"sigma_v_factor", cfg.sigma_v_factor},
              {"sigma_k_factor", cfg.sigma_k_factor}};
  return doc.dump(2);
}

AnchorLayout build_layout(const ScenarioConfig& cfg) {
  cfg.validate();
  const double s = cfg.square_side;
  Mat anchors(2, cfg.n_anchors);
  if (cfg.n_anchors == 8) {
    const double h = 0.5 * s;
    anchors << 0, s, s, 0, h, s, h, 0,
               0, 0, s, s, 0, h, s, h;
  } else {
    const double step = 4.0 * s / cfg.n_anchors;
    for (int i = 0; i < cfg.n_anchors; ++i) anchors.col(i) = perimeter_point(0.0, s, step * i);
  }
  return AnchorLayout(std::move(anchors), cfg.delta_t);
}

Mat ud_grid(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.ud_case == UdCase::Inside) {
    const int g = cfg.grid_per_side;
    const double spacing = cfg.square_side / (g + 1);
    Mat pts(2, g * g);
    for (int ix = 0; ix < g; ++ix) {
      for (int iy = 0; iy < g; ++iy) pts.col(ix * g + iy) << spacing * (ix + 1), spacing * (iy + 1);
    }
    return pts;
  }
  const double side = cfg.square_side + 2.0 * cfg.ring_offset;
  const double step = 4.0 * side / cfg.ring_points;
  Mat pts(2, cfg.ring_points);
  for (int j = 0; j < cfg.ring_points; ++j) pts.col(j) = perimeter_point(-cfg.ring_offset, side, step * j);
  return pts;
}

RngStream trial_stream(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return RngStream(seq);
}

double uniform(RngStream& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return lo + (hi - lo) * unit(rng);
}

ParameterVector draw_truth(const ScenarioConfig& cfg, RngStream& rng) {
  const Mat grid = ud_grid(cfg);
  std::uniform_int_distribution<Eigen::Index> pick(0, grid.cols() - 1);

  ParameterVector theta = ParameterVector::zeros(2);
  theta.p = grid.col(pick(rng));
  const double speed = uniform(rng, cfg.speed_min, cfg.speed_max);
  const double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  theta.v << speed * std::cos(heading), speed * std::sin(heading);
  theta.b = uniform(rng, cfg.clock_offset_min, cfg.clock_offset_max) * kSpeedOfLight;
  theta.k = uniform(rng, cfg.clock_drift_min, cfg.clock_drift_max) * kPpm * kSpeedOfLight;
  return theta;
}

TrialTruth synthesize(const ParameterVector& theta_true, const AnchorLayout& layout, const ScenarioConfig& cfg,
                      RngStream& rng) {
  cfg.validate();
  theta_true.validate();
  if (layout.size() != cfg.n_anchors) throw ConfigError("layout size differs from n_anchors");
  const int m = layout.size();
  const Vec h = h_eval(theta_true, layout);

  // Draw the standard normals unconditionally so streams stay aligned with
  // and without noise injection.
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = cfg.inject_noise ? 1.0 : 0.0;
  MeasurementSet meas{Vec(m), Vec(m), cfg.noise()};
  for (int i = 0; i < m; ++i) meas.d(i) = h(i) + scale * cfg.sigma_d() * gauss(rng);
  for (int i = 0; i < m; ++i) meas.rho(i) = h(m + i) + scale * cfg.sigma_rho * gauss(rng);

  const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  ParameterVector theta0 = ParameterVector::zeros(layout.dim());
  theta0.p = theta_true.p;
  theta0.p(0) += cfg.init_radius * std::cos(angle);
  theta0.p(1) += cfg.init_radius * std::sin(angle);
  theta0.b = meas.rho(0);

  return TrialTruth{theta_true, layout, std::move(meas), std::move(theta0)};
}

TrialTruth generate_trial(const ScenarioConfig& cfg, std::uint64_t trial, RngStream& rng) {
  rng = trial_stream(cfg.seed, trial);
  const AnchorLayout layout = build_layout(cfg);
  const ParameterVector truth = draw_truth(cfg, rng);
  return synthesize(truth, layout, cfg, rng);
}

RandomInstance random_instance(RngStream& rng, int n, int min_anchors) {
  if (n != 2 && n != 3) throw ConfigError("dimension must be 2 or 3");
  // The TOA-only comparison needs at least as many ranges as unknowns.
  if (min_anchors == 0) min_anchors = 2 * n + 2;
  if (min_anchors < 2 * n + 2 || min_anchors > 12) throw ConfigError("min_anchors must be in [2N+2, 12]");
  std::uniform_int_distribution<int> count(min_anchors, 12);
  const int m = count(rng);

  Mat anchors(n, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) anchors(j, i) = uniform(rng, 0.0, 600.0);
  }
  ParameterVector theta = ParameterVector::zeros(n);
  bool clear = false;
  while (!clear) {
    for (int j = 0; j < n; ++j) theta.p(j) = uniform(rng, 100.0, 500.0);
    clear = true;
    for (int i = 0; i < m; ++i) clear = clear && (anchors.col(i) - theta.p).norm() > 1.0;
  }
  for (int j = 0; j < n; ++j) theta.v(j) = uniform(rng, -30.0, 30.0);
  theta.b = uniform(rng, -1.0, 1.0) * kSpeedOfLight;
  theta.k = uniform(rng, -20.0, 20.0) * kPpm * kSpeedOfLight;
  const double dt = uniform(rng, 0.01, 0.1);

  NoiseSpec noise{Vec(m), Vec(m)};
  for (int i = 0; i < m; ++i) {
    noise.sigma_rho(i) = uniform(rng, 0.5, 5.0);
    noise.sigma_d(i) = noise.sigma_rho(i) * uniform(rng, 1.0, 10.0);
  }
  const double sigma_v = uniform(rng, 0.05, 5.0);
  const double sigma_k = uniform(rng, 0.05, 5.0);
  AidingVelocity aid_v = AidingVelocity::isotropic(theta.v, sigma_v);
  return RandomInstance{theta, AnchorLayout(std::move(anchors), dt), std::move(noise), std::move(aid_v),
                        AidingDrift{theta.k, sigma_k}};
}

}  // namespace dtloc
