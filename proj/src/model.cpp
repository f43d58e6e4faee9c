// SPDX-License-Identifier: Apache-2.0
#include "dtloc/model.hpp"

#include <cmath>
#include <numbers>

namespace dtloc {
namespace {

struct LineOfSight {
  Vec u;         // q - p - v dt_i
  double range;  // |u|
};

LineOfSight line_of_sight(const ParameterVector& theta, const AnchorRef& q, double dt_i, int anchor) {
  LineOfSight los{q - theta.p - theta.v * dt_i, 0.0};
  los.range = los.u.norm();
  if (!(los.range >= kMinAnchorRange)) throw DegenerateGeometryError(anchor);
  return los;
}

void check_dims(const ParameterVector& theta, const AnchorLayout& layout) {
  if (theta.dim() != layout.dim() || theta.v.size() != theta.p.size()) {
    throw ConfigError("parameter and layout dimensions differ");
  }
}

}  // namespace

double toa_model(const ParameterVector& theta, const AnchorRef& q, double dt_i) {
  const auto los = line_of_sight(theta, q, dt_i, -1);
  return los.range + theta.b + theta.k * dt_i;
}

double doppler_model(const ParameterVector& theta, const AnchorRef& q, double dt_i) {
  const auto los = line_of_sight(theta, q, dt_i, -1);
  return -theta.v.dot(los.u) / los.range + theta.k;
}

Vec los_vector(const ParameterVector& theta, const AnchorRef& q, double dt_i) {
  const auto los = line_of_sight(theta, q, dt_i, -1);
  return los.u / los.range;
}

void linearize(const ParameterVector& theta, const AnchorLayout& layout, Vec& h, Mat& G) {
  check_dims(theta, layout);
  const int m = layout.size();
  const ParamIndex ix{layout.dim()};
  h.resize(2 * m);
  G.setZero(2 * m, ix.size());

  for (int i = 0; i < m; ++i) {
    const double dt = layout.offset_time(i);
    const auto los = line_of_sight(theta, layout.anchor(i), dt, i);
    const Vec e = los.u / los.range;
    const double closing = theta.v.dot(e);  // v^T e

    h(i) = -closing + theta.k;
    h(m + i) = los.range + theta.b + theta.k * dt;

    // Doppler row: d/dp = (v - (v^T e) e)^T / r,
    // d/dv = (2 v dt + p - q)^T / r - dt (v^T e) e^T / r.
    const Vec tangential = (theta.v - closing * e) / los.range;
    G.row(i).segment(ix.position(), ix.n) = tangential.transpose();
    G.row(i).segment(ix.velocity(), ix.n) = ((-los.u + theta.v * dt) / los.range - dt * closing * e / los.range).transpose();
    G(i, ix.clock_drift()) = 1.0;

    // TOA row: [-e^T, 1, -e^T dt, dt]
    G.row(m + i).segment(ix.position(), ix.n) = -e.transpose();
    G(m + i, ix.clock_offset()) = 1.0;
    G.row(m + i).segment(ix.velocity(), ix.n) = -dt * e.transpose();
    G(m + i, ix.clock_drift()) = dt;
  }
}

Vec h_eval(const ParameterVector& theta, const AnchorLayout& layout) {
  check_dims(theta, layout);
  const int m = layout.size();
  Vec h(2 * m);
  for (int i = 0; i < m; ++i) {
    const double dt = layout.offset_time(i);
    const auto los = line_of_sight(theta, layout.anchor(i), dt, i);
    h(i) = -theta.v.dot(los.u) / los.range + theta.k;
    h(m + i) = los.range + theta.b + theta.k * dt;
  }
  return h;
}

Mat jacobian(const ParameterVector& theta, const AnchorLayout& layout) {
  Vec h;
  Mat G;
  linearize(theta, layout, h, G);
  return G;
}

double log_likelihood(const MeasurementSet& tau, const ParameterVector& theta, const AnchorLayout& layout) {
  tau.validate();
  if (tau.size() != layout.size()) throw ConfigError("measurement count differs from anchor count");
  const Vec w = tau.noise.weights();
  const Vec r = tau.stacked() - h_eval(theta, layout);
  const double quad = r.cwiseProduct(w).dot(r);
  // ln|W^{-1}| = sum of ln(sigma^2)
  const double log_det_cov = -w.array().log().sum();
  return -0.5 * quad - static_cast<double>(tau.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_cov;
}

}  // namespace dtloc
