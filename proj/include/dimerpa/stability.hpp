// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dimerpa/eig4.hpp"
#include "dimerpa/types.hpp"

namespace dimerpa {

enum class DriftVariant { symmetric, single_port };

/// Real drift matrix over (X_a, P_a, X_b, P_b).
struct DriftMatrix {
  Eigen::Matrix4d entries = Eigen::Matrix4d::Zero();
  double kappa = 0.0;
  DriftVariant variant = DriftVariant::symmetric;
};

/// Per-mode map (c, c^dag) -> (X, P): X = (c + c^dag)/sqrt2, P = i(c^dag - c)/sqrt2.
inline Eigen::Matrix4cd quadrature_map() {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx I(0.0, 1.0);
  Eigen::Matrix4cd w = Eigen::Matrix4cd::Zero();
  for (int m = 0; m < 2; ++m) {
    w(2 * m, 2 * m) = r;
    w(2 * m, 2 * m + 1) = r;
    w(2 * m + 1, 2 * m) = -I * r;
    w(2 * m + 1, 2 * m + 1) = I * r;
  }
  return w;
}

/// Complex-basis dynamical matrix over (c_a, c_a^dag, c_b, c_b^dag) carrying the
/// coupling signs of the quadrature drift matrix (TMS and BS enter with a flip).
/// `bs_ab` and `bs_ba` are the a<-b and b<-a exchange amplitudes.
inline Eigen::Matrix4cd bogoliubov_matrix(const EffectiveCouplings& c, double damp_a, double damp_b,
                                          cplx bs_ab, cplx bs_ba) {
  const cplx I(0.0, 1.0);
  const cplx T = -c.lambda_TMS;
  const cplx Sa = c.lambda_S_a;
  const cplx Sb = c.lambda_S_b;
  const double Da = c.delta_a;
  const double Db = c.delta_b;
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = I * Da - damp_a / 2.0;
  m(0, 1) = -2.0 * I * Sa;
  m(0, 3) = -I * T;
  m(0, 2) = -I * bs_ab;
  m(1, 1) = -I * Da - damp_a / 2.0;
  m(1, 0) = 2.0 * I * std::conj(Sa);
  m(1, 2) = I * std::conj(T);
  m(1, 3) = I * std::conj(bs_ab);
  m(2, 2) = I * Db - damp_b / 2.0;
  m(2, 3) = -2.0 * I * Sb;
  m(2, 1) = -I * T;
  m(2, 0) = -I * bs_ba;
  m(3, 3) = -I * Db - damp_b / 2.0;
  m(3, 2) = 2.0 * I * std::conj(Sb);
  m(3, 0) = I * std::conj(T);
  m(3, 1) = I * std::conj(bs_ba);
  return m;
}

inline Eigen::Matrix4d realify(const Eigen::Matrix4cd& bog) {
  const Eigen::Matrix4cd w = quadrature_map();
  const Eigen::Matrix4cd q = w * bog * w.inverse();
  return q.real();
}

/// Literal transcription for real couplings.
inline Eigen::Matrix4d drift_matrix_real(double kappa, double Da, double Db, double Sa, double Sb,
                                         double T, double B) {
  Eigen::Matrix4d m;
  const double k = -kappa / 2.0;
  // clang-format off
  m << k,        -(Da + 2*Sa), 0,             T - B,
       Da - 2*Sa, k,           T + B,         0,
       0,         T - B,       k,             -(Db + 2*Sb),
       T + B,     0,           Db - 2*Sb,     k;
  // clang-format on
  return m;
}

inline DriftMatrix drift_matrix(const EffectiveCouplings& c, double kappa,
                                DriftVariant variant = DriftVariant::symmetric) {
  require(kappa > 0.0, "kappa must be positive");
  DriftMatrix dm;
  dm.kappa = kappa;
  dm.variant = variant;
  if (variant == DriftVariant::symmetric) {
    const bool real = c.lambda_S_a.imag() == 0.0 && c.lambda_S_b.imag() == 0.0 &&
                      c.lambda_TMS.imag() == 0.0 && c.lambda_BS.imag() == 0.0;
    if (real) {
      dm.entries = drift_matrix_real(kappa, c.delta_a, c.delta_b, c.lambda_S_a.real(),
                                     c.lambda_S_b.real(), c.lambda_TMS.real(), c.lambda_BS.real());
    } else {
      const cplx B = -c.lambda_BS;
      dm.entries = realify(bogoliubov_matrix(c, kappa, kappa, B, std::conj(B)));
    }
  } else {
    // Shared port: kappa/2 per mode and a dissipative exchange on both directions.
    const cplx I(0.0, 1.0);
    const cplx B = -c.lambda_BS;
    const cplx diss = -I * kappa / 4.0;
    dm.entries = realify(bogoliubov_matrix(c, kappa / 2.0, kappa / 2.0, B + diss, std::conj(B) + diss));
  }
  return dm;
}

/// Balanced closed form: (kappa/2)(-1 +/- sqrt(C_TMS - C_BS)), each twice.
inline std::array<cplx, 4> eigenvalues_closed_form(double C_TMS, double C_BS, double kappa) {
  const cplx r = std::sqrt(cplx(C_TMS - C_BS, 0.0));
  const cplx lo = 0.5 * kappa * (-1.0 - r);
  const cplx hi = 0.5 * kappa * (-1.0 + r);
  return {lo, lo, hi, hi};
}

inline std::array<cplx, 4> eigenvalues(const DriftMatrix& dm) { return eigenvalues4(dm.entries); }

enum class Classification { stable, unstable, EP, BP };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::stable: return "stable";
    case Classification::unstable: return "unstable";
    case Classification::EP: return "EP";
    case Classification::BP: return "BP";
  }
  return "?";
}

struct StabilityReport {
  std::array<cplx, 4> eigenvalues{};
  Classification classification = Classification::stable;
  double coop_gap = 0.0;
  bool balanced = false;
  double max_real = 0.0;
};

struct ClassifyOptions {
  double ep_tol = 1e-6;       // in units of kappa
  double bp_tol = 1e-6;       // in units of kappa
  double balance_tol = 1e-9;  // relative to kappa
};

inline bool is_balanced(const EffectiveCouplings& c, double kappa, double tol = 1e-9) {
  const double t = tol * kappa;
  const double s = std::abs(c.lambda_S_a);
  return std::abs(c.lambda_S_a - c.lambda_S_b) <= t && std::abs(std::abs(c.delta_a) - 2.0 * s) <= t &&
         std::abs(std::abs(c.delta_b) - 2.0 * s) <= t && std::abs(c.delta_a + c.delta_b) <= t;
}

inline StabilityReport classify(const DriftMatrix& dm, const EffectiveCouplings& c,
                                const ClassifyOptions& o = {}) {
  StabilityReport r;
  r.eigenvalues = eigenvalues(dm);
  const Cooperativities co = cooperativities(c, dm.kappa);
  r.coop_gap = co.C_TMS - co.C_BS;
  r.balanced = is_balanced(c, dm.kappa, o.balance_tol);
  r.max_real = -1e300;
  for (const auto& e : r.eigenvalues) r.max_real = std::max(r.max_real, e.real());
  if (r.max_real >= 0.0) {
    r.classification = Classification::unstable;
    return r;
  }
  r.classification = Classification::stable;
  if (!r.balanced) return r;
  double spread = 0.0;
  for (const auto& a : r.eigenvalues)
    for (const auto& b : r.eigenvalues) spread = std::max(spread, std::abs(a - b));
  if (spread < o.ep_tol * dm.kappa) {
    r.classification = Classification::EP;
    return r;
  }
  // Leading pair: the eigenvalue with the largest real part (ties -> positive imag).
  cplx lead = r.eigenvalues[0];
  for (const auto& e : r.eigenvalues)
    if (e.real() > lead.real() || (e.real() == lead.real() && e.imag() > lead.imag())) lead = e;
  if (std::abs(std::abs(lead.real()) - std::abs(lead.imag())) < o.bp_tol * dm.kappa)
    r.classification = Classification::BP;
  return r;
}

}  // namespace dimerpa
