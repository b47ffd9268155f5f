// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "dimerpa/types.hpp"

namespace dimerpa {

/// Normal modes of the linear dimer plus the collective Kerr coefficients.
/// Mode a is the lower mode, a = -sin(theta) a_L + cos(theta) a_R.
inline HybridizedParams hybridize(const CircuitParams& p) {
  p.validate();
  const double w_plus = 0.5 * (p.omega_L + p.omega_R);
  const double w_minus = 0.5 * (p.omega_L - p.omega_R);
  const double r = std::hypot(p.J, w_minus);

  HybridizedParams h;
  h.omega_a = w_plus - r;
  h.omega_b = w_plus + r;
  h.theta = 0.5 * std::atan2(p.J, w_minus);

  const double d = p.omega_L - p.omega_R;
  const double q = d / std::sqrt(4.0 * p.J * p.J + d * d);
  h.kappa_a = 0.5 * p.kappa * (1.0 + q);
  h.kappa_b = 0.5 * p.kappa * (1.0 - q);

  const double ratio2 = (w_minus * w_minus) / (p.J * p.J);
  h.K_ab = p.J * p.J * (p.K_L + p.K_R) / (p.J * p.J + w_minus * w_minus);
  const double common = 0.25 * h.K_ab * (1.0 + 2.0 * ratio2);
  const double skew = (p.K_L - p.K_R) * w_minus / (2.0 * r);
  h.K_aa = common - skew;
  h.K_bb = common + skew;

  const double ksum = p.K_L + p.K_R;
  const double asym = ksum != 0.0 ? (p.K_L - p.K_R) / ksum : 0.0;
  h.mu_minus = std::sqrt(1.0 + ratio2) * asym - w_minus / p.J;
  h.mu_plus = std::sqrt(1.0 + ratio2) * asym + w_minus / p.J;
  return h;
}

}  // namespace dimerpa
