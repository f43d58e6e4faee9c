// SPDX-License-Identifier: Apache-2.0
#include "dtloc/csv.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <vector>

namespace dtloc {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void CsvWriter::comment(std::string_view text) {
  out_ << "# " << text << "\r\n";
}

void CsvWriter::row(std::initializer_list<std::string_view> fields) {
  row_range(fields);
}

void CsvWriter::field(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) {
    out_ << f;
    return;
  }
  out_ << '"';
  for (char ch : f) {
    if (ch == '"') out_ << '"';
    out_ << ch;
  }
  out_ << '"';
}

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

void append_blocks(std::vector<std::string>& row, const BlockValues& b) {
  row.push_back(format_number(b.position));
  row.push_back(format_number(b.clock_offset));
  row.push_back(format_number(b.velocity));
  row.push_back(format_number(b.clock_drift));
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const CsvMetadata& meta) {
  CsvWriter csv(out);
  csv.comment("schema=" + std::string(kSweepCsvSchema));
  csv.comment("sweep=" + sweep.sweep + " case=" + std::string(to_string(sweep.ud_case)) +
              " seed=" + std::to_string(sweep.seed) + " rng=" + meta.rng);
  if (!meta.extra.empty()) csv.comment(meta.extra);
  if (meta.timestamp) csv.comment("generated=" + utc_now());

  csv.row({"sweep", "axis_name", "axis_value", "method", "case", "sigma_rho_m", "sigma_d_mps", "trials", "failures",
           "convergence_rate", "mean_iterations", "rmse_pos_m", "rmse_clk_m", "rmse_vel_mps", "rmse_drift_mps",
           "rmse_conv_pos_m", "rmse_conv_clk_m", "rmse_conv_vel_mps", "rmse_conv_drift_mps", "theory_pos_m",
           "theory_clk_m", "theory_vel_mps", "theory_drift_mps"});
  for (const SweepRow& r : sweep.rows) {
    std::vector<std::string> row{sweep.sweep,
                                 sweep.axis_name,
                                 format_number(r.axis_value),
                                 std::string(to_string(r.method)),
                                 std::string(to_string(sweep.ud_case)),
                                 format_number(r.sigma_rho),
                                 format_number(r.sigma_d),
                                 std::to_string(r.stats.trials),
                                 std::to_string(r.stats.failures),
                                 format_number(r.stats.convergence_rate),
                                 format_number(r.stats.mean_iterations)};
    append_blocks(row, r.stats.rmse);
    append_blocks(row, r.stats.rmse_converged);
    append_blocks(row, r.stats.theory);
    csv.row_range(row);
  }
}

void write_trial_dump(std::ostream& out, const SweepResult& sweep) {
  CsvWriter csv(out);
  csv.comment("schema=" + std::string(kTrialCsvSchema));

  int n = 2;
  for (const SweepRow& r : sweep.rows) {
    if (!r.stats.records.empty()) {
      n = r.stats.records.front().truth.dim();
      break;
    }
  }
  static constexpr std::array<const char*, 3> axes{"x", "y", "z"};
  std::vector<std::string> header{"axis_value", "method", "trial"};
  for (const char* prefix : {"true", "est"}) {
    for (int j = 0; j < n; ++j) header.push_back(std::string(prefix) + "_p" + axes[j]);
    header.push_back(std::string(prefix) + "_b");
    for (int j = 0; j < n; ++j) header.push_back(std::string(prefix) + "_v" + axes[j]);
    header.push_back(std::string(prefix) + "_k");
  }
  for (const char* tail : {"iterations", "converged", "failed"}) header.emplace_back(tail);
  csv.row_range(header);

  for (const SweepRow& r : sweep.rows) {
    for (const TrialRecord& t : r.stats.records) {
      std::vector<std::string> row{format_number(r.axis_value), std::string(to_string(r.method)),
                                   std::to_string(t.index)};
      const Vec truth = t.truth.flatten();
      for (Eigen::Index j = 0; j < truth.size(); ++j) row.push_back(format_number(truth(j)));
      if (t.failed) {
        for (Eigen::Index j = 0; j < truth.size(); ++j) row.emplace_back("nan");
      } else {
        const Vec est = t.estimate.flatten();
        for (Eigen::Index j = 0; j < est.size(); ++j) row.push_back(format_number(est(j)));
      }
      row.push_back(std::to_string(t.iterations));
      row.emplace_back(t.converged ? "1" : "0");
      row.emplace_back(t.failed ? "1" : "0");
      csv.row_range(row);
    }
  }
}

}  // namespace dtloc
