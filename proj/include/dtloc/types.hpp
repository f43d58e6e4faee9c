// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dtloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Clock quantities are carried in distance units: seconds * c and s/s * c.
inline constexpr double kSpeedOfLight = 299792458.0;  // [m/s]
inline constexpr double kPpm = 1e-6;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// The UD sits on top of an anchor (range below 1e-9 m) so the LOS is undefined.
class DegenerateGeometryError : public std::runtime_error {
public:
  DegenerateGeometryError(int anchor, int iteration = -1);

  int anchor() const { return anchor_; }
  int iteration() const { return iteration_; }

private:
  int anchor_;
  int iteration_;
};

/// Normal matrix (or FIM) is numerically singular.
class SingularMatrixError : public std::runtime_error {
public:
  SingularMatrixError(double condition, int iteration = -1);

  double condition() const { return condition_; }
  int iteration() const { return iteration_; }

private:
  double condition_;
  int iteration_;
};

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Parameter layout helpers: theta = [p; b; v; k], length 2N+2.
// ---------------------------------------------------------------------------

struct ParamIndex {
  int n;
  constexpr int position() const { return 0; }
  constexpr int clock_offset() const { return n; }
  constexpr int velocity() const { return n + 1; }
  constexpr int clock_drift() const { return 2 * n + 1; }
  constexpr int size() const { return 2 * n + 2; }
};

struct ParameterVector {
  Vec p;           // position at round start [m]
  double b = 0.0;  // clock offset [m]
  Vec v;           // velocity [m/s]
  double k = 0.0;  // clock drift [m/s]

  int dim() const { return static_cast<int>(p.size()); }
  int size() const { return 2 * dim() + 2; }

  Vec flatten() const;
  static ParameterVector from_flat(const Vec& flat);
  static ParameterVector zeros(int n);

  /// Throws ConfigError unless N in {2,3}, p/v sizes agree and all entries are finite.
  void validate() const;
};

// Per-block summary of any per-parameter quantity (RMSE, CRLB, ...).
struct BlockValues {
  double position = 0.0;
  double clock_offset = 0.0;
  double velocity = 0.0;
  double clock_drift = 0.0;
};

// Sums a per-parameter vector of squared values into blocks, no square root.
BlockValues block_sums(const Vec& squared, int n);
// Same, then square root of each block.
BlockValues block_root_sums(const Vec& squared, int n);

// ---------------------------------------------------------------------------
// Anchor layout
// ---------------------------------------------------------------------------

class AnchorLayout {
public:
  /// anchors: N x M, one column per anchor in broadcast order.
  AnchorLayout(Mat anchors, double delta_t);

  int dim() const { return static_cast<int>(anchors_.rows()); }
  int size() const { return static_cast<int>(anchors_.cols()); }
  double delta_t() const { return delta_t_; }
  const Mat& anchors() const { return anchors_; }
  auto anchor(int i) const { return anchors_.col(i); }

  /// Time from round start to reception from anchor i (0-based), i.e. dt * i.
  double offset_time(int i) const { return delta_t_ * static_cast<double>(i); }

private:
  Mat anchors_;
  double delta_t_;
};

// ---------------------------------------------------------------------------
// Noise, measurements, aiding
// ---------------------------------------------------------------------------

struct NoiseSpec {
  Vec sigma_d;    // Doppler STD [m/s]
  Vec sigma_rho;  // TOA STD [m]

  static NoiseSpec uniform(int m, double sigma_d, double sigma_rho);

  int size() const { return static_cast<int>(sigma_d.size()); }
  void validate() const;
  /// Diagonal of W: [1/sigma_d^2 ..., 1/sigma_rho^2 ...].
  Vec weights() const;
};

struct MeasurementSet {
  Vec d;    // Doppler [m/s]
  Vec rho;  // TOA [m]
  NoiseSpec noise;

  int size() const { return static_cast<int>(d.size()); }
  void validate() const;
  /// tau = [d; rho]
  Vec stacked() const;
};

struct AidingVelocity {
  Vec v_tilde;
  Mat sigma_v;  // covariance [(m/s)^2]

  static AidingVelocity isotropic(const Vec& v_tilde, double sigma);
  void validate() const;
  Mat information() const;  // sigma_v^{-1}
};

struct AidingDrift {
  double k_tilde = 0.0;
  double sigma_k = 1.0;  // STD [m/s]

  void validate() const;
};

}  // namespace dtloc
