// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtloc/types.hpp"

namespace dtloc {

/// Ranges below this are treated as the UD sitting on the anchor.
inline constexpr double kMinAnchorRange = 1e-9;  // [m]

using AnchorRef = Eigen::Ref<const Vec>;

// Scalar measurement models for one anchor q received dt_i seconds after the
// round start. They throw DegenerateGeometryError with anchor index -1.

/// Pseudorange: |q - p - v dt_i| + b + k dt_i.
double toa_model(const ParameterVector& theta, const AnchorRef& q, double dt_i);

/// Doppler in velocity units: -v^T e + k.
double doppler_model(const ParameterVector& theta, const AnchorRef& q, double dt_i);

/// Unit LOS vector from the motion-corrected UD position to the anchor.
Vec los_vector(const ParameterVector& theta, const AnchorRef& q, double dt_i);

/// Stacked measurement map h(theta) = [Doppler_1..M; TOA_1..M].
Vec h_eval(const ParameterVector& theta, const AnchorLayout& layout);

/// Analytic Jacobian dh/dtheta, 2M x (2N+2), columns ordered [p, b, v, k].
Mat jacobian(const ParameterVector& theta, const AnchorLayout& layout);

/// Evaluates h and its Jacobian in one pass (shares the LOS computation).
void linearize(const ParameterVector& theta, const AnchorLayout& layout, Vec& h, Mat& G);

/// Gaussian log-likelihood ln f(tau | theta) with diagonal W from the noise spec.
double log_likelihood(const MeasurementSet& tau, const ParameterVector& theta, const AnchorLayout& layout);

}  // namespace dtloc
