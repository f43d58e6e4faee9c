// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/harness.hpp"

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace dtloc {

inline constexpr std::string_view kSweepCsvSchema = "dtloc-sweep/1";
inline constexpr std::string_view kTrialCsvSchema = "dtloc-trials/1";

/// Shortest round-trip decimal form; NaN as "nan".
std::string format_number(double x);

/// Minimal RFC-4180 writer: fields containing , " CR or LF are quoted.
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(std::string_view text);
  void row(std::initializer_list<std::string_view> fields);
  template <typename Range>
  void row_range(const Range& fields) {
    bool first = true;
    for (const auto& f : fields) {
      if (!first) out_ << ',';
      field(f);
      first = false;
    }
    out_ << "\r\n";
  }

private:
  void field(std::string_view f);
  std::ostream& out_;
};

struct CsvMetadata {
  bool timestamp = true;
  std::string rng = "mt19937_64";
  std::string extra;  // free-form, e.g. the effective config as one line
};

/// One row per (axis value, method); '#' metadata lines precede the header.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const CsvMetadata& meta);

/// Per-trial dump of every row that kept its records.
void write_trial_dump(std::ostream& out, const SweepResult& sweep);

}  // namespace dtloc
