// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/types.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

namespace dtloc {

enum class UdCase { Inside, Outside };

std::string_view to_string(UdCase c);
UdCase parse_case(std::string_view text);

/// Simulation world. Keys of the JSON config file mirror these field names.
struct ScenarioConfig {
  UdCase ud_case = UdCase::Inside;
  int n_anchors = 8;
  double square_side = 600.0;  // [m]
  double delta_t = 0.05;       // [s]
  double speed_min = 0.0;      // [m/s]
  double speed_max = 50.0;
  double clock_offset_min = -1.0;  // [s]
  double clock_offset_max = 1.0;
  double clock_drift_min = -20.0;  // [ppm]
  double clock_drift_max = 20.0;
  double sigma_rho = 10.0;            // [m]
  double doppler_noise_factor = 5.0;  // sigma_d [m/s] = factor * sigma_rho [m]
  std::uint64_t seed = 1;

  double init_radius = 60.0;  // initial position error [m]
  bool inject_noise = true;   // false: noiseless measurements, sigma still used for weighting

  // UD grids. Inside: grid_per_side^2 points at spacing side/(grid_per_side+1).
  // Outside: ring_points evenly spaced on a square ring ring_offset beyond the edges.
  int grid_per_side = 5;
  double ring_offset = 100.0;  // [m]
  int ring_points = 16;

  // Aiding error STDs as multiples of sigma_rho (sigma_v in m/s, sigma_k in m/s).
  double sigma_v_factor = 0.1;
  double sigma_k_factor = 0.5;

  void validate() const;
  double sigma_d() const { return doppler_noise_factor * sigma_rho; }
  NoiseSpec noise() const;
};

ScenarioConfig load_scenario_config(const std::filesystem::path& path);
/// Applies the keys present in a JSON document on top of `base`.
ScenarioConfig parse_scenario_config(std::string_view json_text, ScenarioConfig base = {});
std::string dump_scenario_config(const ScenarioConfig& cfg);

/// Square layout: 8 anchors at the corners then the edge midpoints; other
/// counts are spread evenly along the perimeter starting at the origin.
AnchorLayout build_layout(const ScenarioConfig& cfg);

/// Candidate UD positions for the configured case, 2 x K.
Mat ud_grid(const ScenarioConfig& cfg);

// Every trial owns a generator seeded from (seed, trial index) so trials can be
// generated in any order or in parallel with identical results.
using RngStream = std::mt19937_64;
inline constexpr std::string_view kRngName = "mt19937_64/seed_seq(seed,trial)";
RngStream trial_stream(std::uint64_t seed, std::uint64_t trial);

/// Uniform draw on [lo, hi]; lo == hi is allowed and returns lo.
double uniform(RngStream& rng, double lo, double hi);

ParameterVector draw_truth(const ScenarioConfig& cfg, RngStream& rng);

struct TrialTruth {
  ParameterVector theta_true;
  AnchorLayout layout;
  MeasurementSet measurements;
  ParameterVector theta0;
};

TrialTruth synthesize(const ParameterVector& theta_true, const AnchorLayout& layout, const ScenarioConfig& cfg,
                      RngStream& rng);

/// draw_truth + synthesize on the trial's own stream. The stream is returned
/// through `rng` positioned after the synthesis draws.
TrialTruth generate_trial(const ScenarioConfig& cfg, std::uint64_t trial, RngStream& rng);

/// A random, well-posed estimation instance used for property checks.
struct RandomInstance {
  ParameterVector theta;
  AnchorLayout layout;
  NoiseSpec noise;
  AidingVelocity aiding_v;
  AidingDrift aiding_k;
};

/// N in {2,3}; min_anchors..12 anchors in a 600 m box, UD inside the central
/// region at least 1 m from every anchor, per-anchor noise STDs and aiding STDs
/// drawn over about one decade. min_anchors defaults to 2N+2, the fewest for
/// which the TOA-only information matrix can be invertible; with exactly 2N+2
/// the TOA-only solve is critically determined and may have several roots.
RandomInstance random_instance(RngStream& rng, int n, int min_anchors = 0);

}  // namespace dtloc
