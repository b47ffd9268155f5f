// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "dimerpa/hybridize.hpp"
#include "dimerpa/types.hpp"

namespace dimerpa {

struct KerrShifted {
  double omega_a = 0.0;
  double omega_b = 0.0;
};

/// Static Kerr shift of the hybridized frequencies from the resonator populations.
inline KerrShifted kerr_shifted(const CircuitParams& p, const HybridizedParams& h, double n_L,
                                double n_R) {
  const double s2 = std::pow(std::sin(h.theta), 2);
  const double c2 = std::pow(std::cos(h.theta), 2);
  return {h.omega_a + 2.0 * p.K_L * n_L * s2 + 2.0 * p.K_R * n_R * c2,
          h.omega_b + 2.0 * p.K_L * n_L * c2 + 2.0 * p.K_R * n_R * s2};
}

/// Hybridized-basis couplings from the bare mean field.
/// Two-pump frame: w_o = (w_g + w_c)/2. Single-pump frame: w_o = w_g.
inline EffectiveCouplings effective_couplings(const CircuitParams& p, const MeanFieldSolution& mf,
                                              Frame frame) {
  const HybridizedParams h = hybridize(p);
  const double s = std::sin(h.theta);
  const double c = std::cos(h.theta);
  const double s2 = s * s;
  const double c2 = c * c;
  const double sin2 = std::sin(2.0 * h.theta);

  EffectiveCouplings out;
  if (frame == Frame::two_pump) {
    require(mf.two_tone(), "two-pump frame requested for a single-tone mean field");
    out.frame = 0.5 * (mf.omega_g + mf.omega_c);
    const cplx gcL = mf.alpha_L_g * mf.alpha_L_c;
    const cplx gcR = mf.alpha_R_g * mf.alpha_R_c;
    out.lambda_S_a = 2.0 * (p.K_L * gcL * s2 + p.K_R * gcR * c2);
    out.lambda_S_b = 2.0 * (p.K_L * gcL * c2 + p.K_R * gcR * s2);
    out.lambda_TMS = -(p.K_L * gcL - p.K_R * gcR) * sin2;
  } else {
    require(!mf.two_tone(), "single-pump frame requested for a two-tone mean field");
    out.frame = mf.omega_g;
    const cplx gL2 = mf.alpha_L_g * mf.alpha_L_g;
    const cplx gR2 = mf.alpha_R_g * mf.alpha_R_g;
    out.lambda_S_a = p.K_L * gL2 * s2 + p.K_R * gR2 * c2;
    out.lambda_S_b = p.K_L * gL2 * c2 + p.K_R * gR2 * s2;
    out.lambda_TMS = -0.5 * (p.K_L * gL2 - p.K_R * gR2) * sin2;
  }
  const double nL = std::norm(mf.alpha_L_g) + std::norm(mf.alpha_L_c);
  const double nR = std::norm(mf.alpha_R_g) + std::norm(mf.alpha_R_c);
  out.lambda_BS = -(p.K_L * nL - p.K_R * nR) * sin2;

  const KerrShifted w = kerr_shifted(p, h, nL, nR);
  out.omega_a_tilde = w.omega_a;
  out.omega_b_tilde = w.omega_b;
  out.delta_a = out.frame - w.omega_a;
  out.delta_b = out.frame - w.omega_b;
  return out;
}

/// Balanced symmetric-model couplings from cooperativities (kappa units kept).
/// Delta_a = -2 Lambda_S, Delta_b = +2 Lambda_S, all couplings real.
inline EffectiveCouplings balanced_couplings(double kappa, double C_TMS, double C_BS, double C_S) {
  require(kappa > 0.0 && C_TMS >= 0.0 && C_BS >= 0.0 && C_S >= 0.0,
          "cooperativities must be non-negative");
  EffectiveCouplings c;
  const double S = 0.5 * kappa * std::sqrt(C_S);
  c.lambda_S_a = S;
  c.lambda_S_b = S;
  c.lambda_TMS = 0.5 * kappa * std::sqrt(C_TMS);
  c.lambda_BS = 0.5 * kappa * std::sqrt(C_BS);
  c.delta_a = -2.0 * S;
  c.delta_b = 2.0 * S;
  return c;
}

}  // namespace dimerpa
