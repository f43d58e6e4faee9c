// SPDX-License-Identifier: Apache-2.0
#include "dtloc/csv.hpp"
#include "dtloc/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace dtloc;

namespace {

void expect_same_blocks(const BlockValues& a, const BlockValues& b) {
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.clock_offset, b.clock_offset);
  EXPECT_EQ(a.velocity, b.velocity);
  EXPECT_EQ(a.clock_drift, b.clock_drift);
}

void expect_same_stats(const PointStats& a, const PointStats& b) {
  EXPECT_EQ(a.trials, b.trials);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.converged, b.converged);
  EXPECT_EQ(a.mean_iterations, b.mean_iterations);
  expect_same_blocks(a.rmse, b.rmse);
  expect_same_blocks(a.rmse_converged, b.rmse_converged);
  expect_same_blocks(a.theory, b.theory);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

// Data lines of a CSV stream, CRLF stripped, comments dropped.
std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

RunOptions small_run(int trials) {
  RunOptions o;
  o.trials = trials;
  return o;
}

}  // namespace

TEST(Methods, Parse) {
  EXPECT_EQ(parse_method("sdt"), Method::SDT);
  EXPECT_EQ(parse_method("SDT-V"), Method::SDT_V);
  EXPECT_EQ(parse_method("sdt_k"), Method::SDT_K);
  EXPECT_EQ(parse_method("lspm-uvd"), Method::LSPM_UVD);
  EXPECT_THROW(parse_method("kalman"), ConfigError);
  const auto list = parse_method_list("SDT, LSPM_UVD");
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[1], Method::LSPM_UVD);
  EXPECT_THROW(parse_method_list(""), ConfigError);
}

TEST(MonteCarlo, RejectsBadOptions) {
  ScenarioConfig cfg;
  RunOptions o = small_run(0);
  EXPECT_THROW(monte_carlo(cfg, Method::SDT, o), ConfigError);
  o.trials = 10;
  o.thr = 0.0;
  EXPECT_THROW(monte_carlo(cfg, Method::SDT, o), ConfigError);
  cfg.sigma_rho = -1;
  EXPECT_THROW(monte_carlo(cfg, Method::SDT, small_run(10)), ConfigError);
}

TEST(MonteCarlo, NoiselessRmseBelowThreshold) {
  ScenarioConfig cfg;
  cfg.inject_noise = false;
  for (Method m : {Method::SDT, Method::SDT_V, Method::SDT_K, Method::LSPM_UVD}) {
    const PointStats s = monte_carlo(cfg, m, small_run(200));
    EXPECT_EQ(s.failures, 0) << to_string(m);
    EXPECT_EQ(s.convergence_rate, 1.0) << to_string(m);
    EXPECT_LT(s.rmse.position, 1e-2) << to_string(m);
    EXPECT_LT(s.rmse.clock_offset, 1e-2) << to_string(m);
    EXPECT_LT(s.rmse.velocity, 1e-2) << to_string(m);
    EXPECT_LT(s.rmse.clock_drift, 1e-2) << to_string(m);
  }
}

TEST(MonteCarlo, ParallelMatchesSerialBitForBit) {
  for (UdCase c : {UdCase::Inside, UdCase::Outside}) {
    ScenarioConfig cfg;
    cfg.ud_case = c;
    for (Method m : {Method::SDT, Method::SDT_V, Method::SDT_K, Method::LSPM_UVD}) {
      RunOptions o = small_run(300);
      o.velocity_deviation = 5.0;
      o.drift_deviation = 2.0;
      expect_same_stats(monte_carlo(cfg, m, o), monte_carlo_serial(cfg, m, o));
    }
  }
}

TEST(MonteCarlo, RepeatableAndSeedSensitive) {
  ScenarioConfig cfg;
  const PointStats a = monte_carlo(cfg, Method::SDT, small_run(100));
  expect_same_stats(a, monte_carlo(cfg, Method::SDT, small_run(100)));
  cfg.seed = 2;
  EXPECT_NE(a.rmse.position, monte_carlo(cfg, Method::SDT, small_run(100)).rmse.position);
}

TEST(MonteCarlo, TrialIsIndependentOfBatch) {
  ScenarioConfig cfg;
  RunOptions o = small_run(50);
  o.keep_records = true;
  const PointStats s = monte_carlo(cfg, Method::SDT, o);
  const TrialRecord alone = run_trial(cfg, Method::SDT, o, 37);
  EXPECT_EQ(s.records[37].estimate.flatten(), alone.estimate.flatten());
  EXPECT_EQ(s.records[37].iterations, alone.iterations);
}

TEST(MonteCarlo, MethodsShareMeasurements) {
  ScenarioConfig cfg;
  RunOptions o = small_run(1);
  EXPECT_EQ(run_trial(cfg, Method::SDT, o, 4).truth.flatten(), run_trial(cfg, Method::LSPM_UVD, o, 4).truth.flatten());
}

TEST(ReduceTrials, RmseFromRecords) {
  ScenarioConfig cfg;
  RunOptions o = small_run(120);
  o.keep_records = true;
  const PointStats s = monte_carlo(cfg, Method::SDT, o);
  ASSERT_EQ(s.records.size(), 120u);
  double pos = 0, drift = 0;
  int ok = 0;
  for (const TrialRecord& r : s.records) {
    if (r.failed) continue;
    ++ok;
    pos += (r.estimate.p - r.truth.p).squaredNorm();
    drift += std::pow(r.estimate.k - r.truth.k, 2);
  }
  EXPECT_NEAR(s.rmse.position, std::sqrt(pos / ok), 1e-12 * s.rmse.position);
  EXPECT_NEAR(s.rmse.clock_drift, std::sqrt(drift / ok), 1e-12 * s.rmse.clock_drift);
}

TEST(ReduceTrials, FailuresExcludedAndCounted) {
  std::vector<TrialRecord> recs(4);
  for (int i = 0; i < 4; ++i) {
    recs[i].index = static_cast<std::uint64_t>(i);
    recs[i].iterations = 4;
    recs[i].converged = i != 1;
    recs[i].error_sq = {4.0 * (i + 1), 1.0, 1.0, 1.0};
    recs[i].theory_ok = true;
    recs[i].theory_sq = {9.0, 1.0, 1.0, 1.0};
  }
  recs[3].failed = true;
  recs[3].converged = false;
  recs[3].iterations = 2;
  const PointStats s = reduce_trials(recs, false);
  EXPECT_EQ(s.trials, 4);
  EXPECT_EQ(s.failures, 1);
  EXPECT_EQ(s.converged, 2);
  EXPECT_DOUBLE_EQ(s.convergence_rate, 0.5);
  EXPECT_DOUBLE_EQ(s.mean_iterations, 4.0);
  EXPECT_DOUBLE_EQ(s.rmse.position, std::sqrt((4.0 + 8.0 + 12.0) / 3.0));
  EXPECT_DOUBLE_EQ(s.rmse_converged.position, std::sqrt((4.0 + 12.0) / 2.0));
  EXPECT_DOUBLE_EQ(s.theory.position, 3.0);
  EXPECT_TRUE(s.records.empty());

  std::vector<TrialRecord> all_failed(2);
  for (auto& r : all_failed) r.failed = true;
  EXPECT_TRUE(std::isnan(reduce_trials(all_failed, false).rmse.position));
}

TEST(Sweeps, ShapesAndAxes) {
  ScenarioConfig cfg;
  const std::vector<Method> methods{Method::SDT, Method::LSPM_UVD};
  const std::vector<double> levels{0.5, 2.0};
  const SweepResult s = sweep_noise(cfg, methods, levels, small_run(20));
  EXPECT_EQ(s.axis, levels);
  ASSERT_EQ(s.rows.size(), 4u);
  EXPECT_EQ(s.at(2.0, Method::LSPM_UVD).sigma_rho, 2.0);
  EXPECT_EQ(s.at(2.0, Method::LSPM_UVD).sigma_d, 10.0);
  EXPECT_THROW((void)s.at(3.0, Method::SDT), std::out_of_range);

  const std::vector<double> ppm{0.0, 0.1};
  const SweepResult d = sweep_drift_deviation(cfg, ppm, small_run(10));
  EXPECT_EQ(d.rows.size(), 2u);
  EXPECT_EQ(d.rows[1].method, Method::SDT_K);
  EXPECT_THROW(sweep_init_error(cfg, {}, small_run(10)), ConfigError);

  const auto def = default_noise_levels();
  ASSERT_EQ(def.size(), 5u);
  EXPECT_DOUBLE_EQ(def.front(), 0.1);
  EXPECT_DOUBLE_EQ(def.back(), 10.0);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  for (double x : {9.457756896177031, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Csv, Quoting) {
  std::ostringstream out;
  CsvWriter csv(out);
  csv.row({"a", "b,c", "say \"hi\""});
  EXPECT_EQ(out.str(), "a,\"b,c\",\"say \"\"hi\"\"\"\r\n");
}

TEST(Csv, SweepFileLayout) {
  ScenarioConfig cfg;
  const std::vector<Method> methods{Method::SDT};
  const std::vector<double> levels{1.0, 10.0};
  const SweepResult s = sweep_noise(cfg, methods, levels, small_run(20));
  std::ostringstream out;
  CsvMetadata meta;
  meta.timestamp = false;
  write_sweep_csv(out, s, meta);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# schema=dtloc-sweep/1\r\n", 0), 0u);
  EXPECT_EQ(text.find("generated="), std::string::npos);
  const auto lines = data_lines(text);
  ASSERT_EQ(lines.size(), 3u);
  const auto header = split(lines[0]);
  const auto row = split(lines[2]);
  ASSERT_EQ(header.size(), row.size());
  EXPECT_EQ(header[11], "rmse_pos_m");
  EXPECT_EQ(std::stod(row[11]), s.rows[1].stats.rmse.position);
  EXPECT_EQ(std::stod(row[19]), s.rows[1].stats.theory.position);

  meta.timestamp = true;
  std::ostringstream stamped;
  write_sweep_csv(stamped, s, meta);
  EXPECT_NE(stamped.str().find("# generated="), std::string::npos);
}

TEST(Csv, TrialDumpReproducesRmse) {
  ScenarioConfig cfg;
  RunOptions o = small_run(150);
  o.keep_records = true;
  const std::vector<double> radii{60.0};
  const SweepResult s = sweep_init_error(cfg, radii, o);
  std::ostringstream out;
  write_trial_dump(out, s);
  const auto lines = data_lines(out.str());
  ASSERT_EQ(lines.size(), 151u);
  const auto header = split(lines[0]);
  ASSERT_EQ(header.size(), 3u + 12u + 3u);
  EXPECT_EQ(header[3], "true_px");
  EXPECT_EQ(header[9], "est_px");

  double pos = 0.0, clk = 0.0;
  int ok = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    if (f.back() == "1") continue;
    ++ok;
    for (int j = 0; j < 2; ++j) pos += std::pow(std::stod(f[9 + j]) - std::stod(f[3 + j]), 2);
    clk += std::pow(std::stod(f[11]) - std::stod(f[5]), 2);
  }
  const PointStats& st = s.rows[0].stats;
  EXPECT_NEAR(std::sqrt(pos / ok), st.rmse.position, 1e-12 * st.rmse.position);
  EXPECT_NEAR(std::sqrt(clk / ok), st.rmse.clock_offset, 1e-12 * st.rmse.clock_offset);
}
