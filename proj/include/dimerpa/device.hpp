// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Operating points of the bare dimer: pump frequencies re-centred on the
// Kerr-shifted hybrid modes, mean field on the lowest branch, Floquet gain.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dimerpa/couplings.hpp"
#include "dimerpa/floquet.hpp"
#include "dimerpa/hybridize.hpp"
#include "dimerpa/meanfield.hpp"
#include "dimerpa/response.hpp"

namespace dimerpa {

struct RecenterOptions {
  int max_iterations = 20;
  int ramp_steps = 8;       // power continuation from 1% to 100%
  double tolerance = 1e-7;  // on the shifted frequencies, relative to kappa
  MeanFieldOptions meanfield{};
};

struct OperatingPoint {
  MeanFieldSolution mf;
  double P_g = 0.0;  // W at the device
  double P_c = 0.0;
  double omega_g = 0.0;
  double omega_c = 0.0;  // 0 for a single pump
  double omega_a_tilde = 0.0;
  double omega_b_tilde = 0.0;
  int iterations = 0;
  bool converged = false;

  bool two_tone() const { return omega_c > 0.0; }
};

/// Pump frequencies from the shifted modes: w_g midway, w_c = w_g + w~_a - w~_b.
struct PumpFrequencies {
  double omega_g = 0.0;
  double omega_c = 0.0;
};

inline PumpFrequencies pump_frequencies(double wa, double wb) {
  const double g = 0.5 * (wa + wb);
  return {g, g + wa - wb};
}

namespace detail {

struct ShiftMap {
  const CircuitParams& p;
  HybridizedParams h;
  double P_g, P_c;
  const RecenterOptions& o;
  std::optional<MeanFieldSolution> warm;

  // Mean field at the pump frequencies implied by (wa, wb); returns the new shifted pair.
  std::pair<double, double> operator()(double wa, double wb, MeanFieldSolution& out) {
    const PumpFrequencies f = pump_frequencies(wa, wb);
    const PumpTone g{f.omega_g, P_g, 0.0};
    if (P_c > 0.0) {
      const PumpTone c{f.omega_c, P_c, 0.0};
      if (warm) {
        out = continue_double_pump(p, g, c, *warm, o.meanfield);
      } else {
        const auto br = solve_double_pump(p, g, c, o.meanfield);
        out = select_branch(br);
      }
    } else {
      const auto br = solve_single_pump(p, g, o.meanfield);
      out = select_branch(br);
    }
    warm = out;
    const KerrShifted k = kerr_shifted(p, h, out.n_L, out.n_R);
    return {k.omega_a, k.omega_b};
  }
};

}  // namespace detail

namespace detail {

struct RecenterState {
  Eigen::Vector2d t;
  MeanFieldSolution mf;
  int iterations = 0;
  bool converged = false;
};

// Fixed point w~ = F(w~) at fixed powers: Newton with a finite-difference 2x2
// Jacobian, a step cap of kappa/2 and a half-step fallback.
inline RecenterState recenter(const CircuitParams& p, const HybridizedParams& h, double P_g, double P_c,
                              const RecenterOptions& o, Eigen::Vector2d t,
                              std::optional<MeanFieldSolution> warm) {
  ShiftMap F{p, h, P_g, P_c, o, std::move(warm)};
  const double tol = o.tolerance * p.kappa;
  const double fd = 1e-6 * p.kappa;
  RecenterState st;
  auto defect = [&](const Eigen::Vector2d& x, MeanFieldSolution& m) {
    const auto [a, b] = F(x[0], x[1], m);
    return Eigen::Vector2d(a - x[0], b - x[1]);
  };
  MeanFieldSolution mf;
  Eigen::Vector2d r = defect(t, mf);
  for (int it = 1; it <= o.max_iterations; ++it) {
    st.iterations = it;
    if (r.lpNorm<Eigen::Infinity>() <= tol) break;
    const MeanFieldSolution keep = mf;
    Eigen::Matrix2d jac;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d tp = t;
      tp[k] += fd;
      MeanFieldSolution tmp;
      F.warm = keep;
      jac.col(k) = (defect(tp, tmp) - r) / fd;
    }
    Eigen::Vector2d step = jac.fullPivLu().solve(-r);
    if (!step.allFinite()) step = 0.5 * r;
    const double cap = 0.5 * p.kappa;
    if (step.lpNorm<Eigen::Infinity>() > cap) step *= cap / step.lpNorm<Eigen::Infinity>();
    F.warm = keep;
    MeanFieldSolution m2;
    Eigen::Vector2d t2 = t + step;
    Eigen::Vector2d r2 = defect(t2, m2);
    if (r2.norm() >= r.norm()) {
      F.warm = keep;
      t2 = t + 0.5 * r;
      r2 = defect(t2, m2);
    }
    t = t2;
    r = r2;
    mf = m2;
  }
  st.converged = r.lpNorm<Eigen::Infinity>() <= tol;
  st.t = t;
  st.mf = mf;
  return st;
}

}  // namespace detail

/// Self-consistent operating point. Powers are at the device input (W).
/// Both powers are ramped together from 1% so that the re-centred pump
/// frequencies and the mean field stay on the low branch; `iterations` counts
/// fixed-point iterations at the final power.
inline OperatingPoint operate(const CircuitParams& p, double P_g, double P_c = 0.0,
                              const RecenterOptions& o = {}, const OperatingPoint* warm = nullptr) {
  p.validate();
  require(P_g >= 0.0 && P_c >= 0.0, "pump powers must be non-negative");
  require(!(P_g == 0.0 && P_c > 0.0), "a conversion pump needs a gain pump");
  const HybridizedParams h = hybridize(p);

  detail::RecenterState st;
  if (warm != nullptr && warm->two_tone() == (P_c > 0.0)) {
    st = detail::recenter(p, h, P_g, P_c, o, Eigen::Vector2d(warm->omega_a_tilde, warm->omega_b_tilde),
                          warm->mf);
  }
  if (!st.converged) {
    Eigen::Vector2d t(h.omega_a, h.omega_b);
    std::optional<MeanFieldSolution> mf;
    double s = 0.0;
    double ratio = std::pow(100.0, 1.0 / std::max(1, o.ramp_steps - 1));
    double next = 0.01;
    int guard = 0;
    while (s < 1.0 && guard++ < 40 * o.ramp_steps) {
      auto trial = detail::recenter(p, h, next * P_g, next * P_c, o, t, mf);
      if (trial.converged || next == 1.0) {
        st = trial;
        t = trial.t;
        mf = trial.mf;
        s = next;
        next = std::min(1.0, s * ratio);
        if (!trial.converged) break;
      } else {
        ratio = std::sqrt(ratio);
        if (ratio - 1.0 < 1e-6) {
          st = trial;
          break;
        }
        next = std::min(1.0, s > 0.0 ? s * ratio : next * 0.5);
      }
    }
  }
  OperatingPoint op;
  op.P_g = P_g;
  op.P_c = P_c;
  op.mf = st.mf;
  op.iterations = st.iterations;
  op.converged = st.converged;
  const PumpFrequencies f = pump_frequencies(st.t[0], st.t[1]);
  op.omega_g = f.omega_g;
  op.omega_c = P_c > 0.0 ? f.omega_c : 0.0;
  const KerrShifted k = kerr_shifted(p, h, st.mf.n_L, st.mf.n_R);
  op.omega_a_tilde = k.omega_a;
  op.omega_b_tilde = k.omega_b;
  return op;
}

struct DeviceProfileOptions {
  int N = 2;
  int points = 2001;
  double half_span = 0.45;  // fraction of (w~_b - w~_a) around w~_b
  int threads = 1;
  PeakOptions peaks{};
};

/// Reflection gain around w~_b.
inline GainProfile device_profile(const CircuitParams& p, const OperatingPoint& op,
                                  const DeviceProfileOptions& o = {}) {
  const FloquetBlocks b = floquet_blocks(p, op.mf);
  const double span = o.half_span * std::abs(op.omega_b_tilde - op.omega_a_tilde);
  return sampled_profile([&](double w) { return floquet_gain(p, b, w, o.N); }, op.omega_b_tilde - span,
                         op.omega_b_tilde + span, o.points, "floquet-single-port", o.peaks, o.threads);
}

/// Effective couplings at the operating point in the frame matching its pumps.
inline EffectiveCouplings operating_couplings(const CircuitParams& p, const OperatingPoint& op) {
  return effective_couplings(p, op.mf, op.two_tone() ? Frame::two_pump : Frame::single_pump);
}

inline bool operating_point_stable(const CircuitParams& p, const OperatingPoint& op, int N = 2) {
  return floquet_max_real(floquet_blocks(p, op.mf), N) < 0.0;
}

}  // namespace dimerpa
