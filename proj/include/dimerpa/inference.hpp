// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Kerr coefficients from power-dependent reflection, pump-line attenuation and
// pump powers from gain profiles, photon-number calibration from dephasing.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dimerpa/device.hpp"
#include "dimerpa/lsq.hpp"
#include "dimerpa/meanfield.hpp"
#include "dimerpa/units.hpp"

namespace dimerpa {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;  // SI / dB units as listed
  std::vector<double> sigmas;
  std::vector<std::string> units;
  Eigen::MatrixXd covariance;  // fitted parameters only; derived entries come after them
  double residual_rms = 0.0;
  int n_points = 0;
  std::vector<std::string> flags;

  double value(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
    fail(ErrorCode::invalid_argument, "no fitted parameter named " + name);
  }
  double sigma(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return sigmas[i];
    fail(ErrorCode::invalid_argument, "no fitted parameter named " + name);
  }
  bool flagged(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }
};

namespace detail {

// Maps the scaled LM solution back: value = scale * x, covariance scaled likewise.
inline FitResult make_fit(const LsqResult& r, std::vector<std::string> names, std::vector<double> scale,
                          std::vector<std::string> units, int n_points) {
  FitResult f;
  f.names = std::move(names);
  f.units = std::move(units);
  const Eigen::Index n = r.x.size();
  const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(scale.data(), n);
  f.covariance = s.asDiagonal() * r.covariance * s.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    f.values.push_back(s[i] * r.x[i]);
    f.sigmas.push_back(std::sqrt(std::max(0.0, f.covariance(i, i))));
  }
  f.residual_rms = r.rms;
  f.n_points = n_points;
  if (r.jtj_rcond < 1e-12) f.flags.emplace_back("weakly-identifiable");
  for (double sg : f.sigmas)
    if (!std::isfinite(sg)) {
      f.flags.emplace_back("covariance-singular");
      break;
    }
  return f;
}

}  // namespace detail

// ------------------------------------------------------------ circle fit

struct Circle {
  cplx center{};
  double radius = 0.0;
  double rms = 0.0;  // radial residual
};

/// Algebraic (Kasa) circle fit: x^2 + y^2 + D x + E y + F = 0 in least squares.
inline Circle circle_fit(std::span<const cplx> z) {
  require(z.size() >= 3, "circle fit needs at least three points");
  const Eigen::Index n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx p = z[static_cast<std::size_t>(i)];
    A(i, 0) = p.real();
    A(i, 1) = p.imag();
    A(i, 2) = 1.0;
    b[i] = -std::norm(p);
  }
  const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  Circle c;
  c.center = cplx(-s[0] / 2.0, -s[1] / 2.0);
  c.radius = std::sqrt(std::max(0.0, std::norm(c.center) - s[2]));
  double ss = 0.0;
  for (cplx p : z) ss += std::pow(std::abs(p - c.center) - c.radius, 2);
  c.rms = std::sqrt(ss / static_cast<double>(n));
  return c;
}

// -------------------------------------------------------- spectroscopy

struct SpectroscopySample {
  double power = 0.0;  // W at the device
  double omega = 0.0;  // rad/s
  cplx Gamma{};
};

namespace detail {

// Model reflection times the phase that best aligns it with the data.
inline void gamma_residuals(std::span<const SpectroscopySample> d, std::span<const cplx> model, Eigen::VectorXd& r) {
  cplx overlap{};
  for (std::size_t i = 0; i < d.size(); ++i) overlap += std::conj(model[i]) * d[i].Gamma;
  const cplx ph = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const cplx e = ph * model[i] - d[i].Gamma;
    r[static_cast<Eigen::Index>(2 * i)] = e.real();
    r[static_cast<Eigen::Index>(2 * i + 1)] = e.imag();
  }
}

// |r(b) - r(a)|: how much a parameter step is visible in the data.
inline double residual_shift(const ResidualFn& f, const Eigen::VectorXd& a, const Eigen::VectorXd& b, int m) {
  Eigen::VectorXd ra(m), rb(m);
  f(a, ra);
  f(b, rb);
  return (rb - ra).norm();
}

}  // namespace detail

/// Linear parameters (f_L, f_R, J, kappa) from low-power reflection, Kerr terms
/// off. The initial guess is refined by least squares over complex Gamma.
inline FitResult fit_linear(std::span<const SpectroscopySample> data, const CircuitParams& guess,
                            const LsqOptions& lo = {}) {
  require(data.size() >= 4, "linear fit needs at least four samples");
  const double fs = two_pi * 1e6;  // parameters in MHz
  std::vector<cplx> model(data.size());
  const ResidualFn f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    CircuitParams p = guess;
    p.omega_L = x[0] * fs;
    p.omega_R = x[1] * fs;
    p.J = x[2] * fs;
    p.kappa = std::abs(x[3]) * fs;
    p.K_L = p.K_R = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) model[i] = reflection_dimer(p, data[i].omega, 0.0, 0.0);
    detail::gamma_residuals(data, model, r);
  };
  Eigen::VectorXd x0(4);
  x0 << guess.omega_L / fs, guess.omega_R / fs, guess.J / fs, guess.kappa / fs;
  const int m = static_cast<int>(2 * data.size());
  LsqResult r = least_squares(f, x0, m, lo);
  r.x[3] = std::abs(r.x[3]);
  return detail::make_fit(r, {"f_L", "f_R", "J", "kappa"}, {fs / two_pi, fs / two_pi, fs / two_pi, fs / two_pi},
                          {"Hz", "Hz", "Hz", "Hz"}, m);
}

struct KerrFitOptions {
  int starts = 8;
  double start_lo_hz = 0.1e3;  // |K|/2pi of the first start
  double start_hi_hz = 30e3;
  LsqOptions lsq{};
};

/// (K_L, K_R) from reflection at several probe powers, linear parameters fixed.
/// The forward model takes the lowest-population mean-field branch.
inline FitResult fit_kerr(std::span<const SpectroscopySample> data, const CircuitParams& linear,
                          const KerrFitOptions& o = {}) {
  require(data.size() >= 4, "Kerr fit needs at least four samples");
  const double ks = two_pi * 1e3;  // kHz
  std::vector<cplx> model(data.size());
  const ResidualFn f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    CircuitParams p = linear;
    p.K_L = -std::abs(x[0]) * ks;  // sign fixed by the model; zero allowed
    p.K_R = -std::abs(x[1]) * ks;
    for (std::size_t i = 0; i < data.size(); ++i)
      model[i] = spectroscopy_response(p, data[i].omega, data[i].power).Gamma;
    detail::gamma_residuals(data, model, r);
  };
  const int m = static_cast<int>(2 * data.size());
  std::optional<LsqResult> best;
  for (int s = 0; s < o.starts; ++s) {
    const double t = o.starts > 1 ? static_cast<double>(s) / (o.starts - 1) : 0.0;
    const double mag = o.start_lo_hz * std::pow(o.start_hi_hz / o.start_lo_hz, t) / 1e3;
    Eigen::VectorXd x0(2);
    x0 << -mag, -mag;
    LsqResult r = least_squares(f, x0, m, o.lsq);
    if (!best || r.cost < best->cost) best = std::move(r);
  }
  best->x = -best->x.cwiseAbs();
  FitResult out = detail::make_fit(*best, {"K_L", "K_R"}, {1e3, 1e3}, {"Hz", "Hz"}, m);
  // Linear-regime data: a 1 kHz change in either term barely moves the residual.
  const Eigen::VectorXd xa = best->x.cwiseAbs();
  for (Eigen::Index k = 0; k < 2; ++k) {
    Eigen::VectorXd step = xa;
    step[k] += 1.0;
    if (detail::residual_shift(f, xa, step, m) < 1e-6 * std::sqrt(m)) {
      out.flags.emplace_back("non-identifiable");
      break;
    }
  }
  return out;
}

// ------------------------------------------------------- gain profiles

struct ProfileData {
  double power_dbm = 0.0;     // set power (before the line) of the gain pump
  double conv_power_dbm = -std::numeric_limits<double>::infinity();  // conversion pump, -inf = off
  std::vector<double> omega;  // rad/s
  std::vector<double> gain_db;
};

/// Single-pump model gain at fixed pump frequency; device power = set power + attenuation.
inline std::vector<double> single_pump_gain_db(const CircuitParams& p, double omega_g, double P_device,
                                               std::span<const double> omega, int N = 2) {
  const auto br = solve_single_pump(p, PumpTone{omega_g, P_device, 0.0});
  const MeanFieldSolution mf = select_branch(br);
  const FloquetBlocks b = floquet_blocks(p, mf);
  std::vector<double> g(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) g[i] = power_db(floquet_gain(p, b, omega[i], N));
  return g;
}

struct AttenuationFitOptions {
  double scan_lo_db = -80.0;
  double scan_hi_db = -50.0;
  double scan_step_db = 0.5;
  int N = 2;
  LsqOptions lsq{};
};

/// One attenuation shared by all single-pump profiles, joint least squares in dB.
inline FitResult fit_attenuation(std::span<const ProfileData> profiles, const CircuitParams& p, double omega_g,
                                 const AttenuationFitOptions& o = {}) {
  require(!profiles.empty(), "attenuation fit needs at least one profile");
  int m = 0;
  for (const auto& pr : profiles) {
    require(pr.omega.size() == pr.gain_db.size(), "profile columns differ in length");
    m += static_cast<int>(pr.omega.size());
  }
  const ResidualFn f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    Eigen::Index k = 0;
    for (const auto& pr : profiles) {
      const auto g = single_pump_gain_db(p, omega_g, watts(Dbm{pr.power_dbm + x[0]}), pr.omega, o.N);
      for (std::size_t i = 0; i < g.size(); ++i) r[k++] = g[i] - pr.gain_db[i];
    }
  };
  // Coarse scan first: the residual is flat at low power and multimodal near folds.
  Eigen::VectorXd x(1);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> costs;
  for (double a = o.scan_lo_db; a <= o.scan_hi_db + 1e-9; a += o.scan_step_db) {
    Eigen::VectorXd t(1);
    t[0] = a;
    const double c = sum_squares(f, t, m);
    costs.push_back(c);
    if (c < best) {
      best = c;
      x = t;
    }
  }
  LsqResult r = least_squares(f, x, m, o.lsq);
  FitResult out = detail::make_fit(r, {"attenuation"}, {1.0}, {"dB"}, m);
  // Separate local minima of comparable depth: branch selection ambiguity.
  int minima = 0;
  for (std::size_t i = 1; i + 1 < costs.size(); ++i)
    if (costs[i] < costs[i - 1] && costs[i] < costs[i + 1] && costs[i] < 2.0 * best + 1e-12) ++minima;
  if (minima > 1) out.flags.emplace_back("bimodal-residual");
  Eigen::VectorXd step = r.x;
  step[0] += 1.0;
  if (detail::residual_shift(f, r.x, step, m) < 1e-6 * std::sqrt(m)) out.flags.emplace_back("unidentifiable");
  return out;
}

struct PumpFitOptions {
  std::vector<double> start_g_dbm{-73.0, -71.5, -70.0};  // device powers
  std::vector<double> start_offset_db{6.0, 9.0, 12.0};   // P_c - P_g
  int N = 2;
  RecenterOptions recenter{};
  LsqOptions lsq{};
};

/// Double-pump model gain at the operating point implied by the two powers.
inline std::vector<double> double_pump_gain_db(const CircuitParams& p, double P_g, double P_c,
                                               std::span<const double> omega, int N = 2,
                                               const RecenterOptions& ro = {}) {
  const OperatingPoint op = operate(p, P_g, P_c, ro);
  if (!op.converged) fail(ErrorCode::solver, "operating point did not converge");
  const FloquetBlocks b = floquet_blocks(p, op.mf);
  std::vector<double> g(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) g[i] = power_db(floquet_gain(p, b, omega[i], N));
  return g;
}

/// Both pump powers (dBm at the device after `attenuation_db`) from one double-pump profile.
/// The reported ratio is P_g / P_c in linear units.
inline FitResult fit_pump_powers(const ProfileData& prof, const CircuitParams& p, double attenuation_db,
                                 const PumpFitOptions& o = {}) {
  require(prof.omega.size() == prof.gain_db.size() && prof.omega.size() >= 3, "profile needs >= 3 points");
  const int m = static_cast<int>(prof.omega.size());
  const ResidualFn f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    try {
      const auto g = double_pump_gain_db(p, watts(Dbm{x[0] + attenuation_db}), watts(Dbm{x[1] + attenuation_db}),
                                         prof.omega, o.N, o.recenter);
      for (int i = 0; i < m; ++i) r[i] = g[static_cast<std::size_t>(i)] - prof.gain_db[static_cast<std::size_t>(i)];
    } catch (const Error&) {
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  };
  std::optional<LsqResult> best;
  for (double g0 : o.start_g_dbm)
    for (double off : o.start_offset_db) {
      Eigen::VectorXd x0(2);
      x0 << g0 - attenuation_db, g0 + off - attenuation_db;
      LsqResult r = least_squares(f, x0, m, o.lsq);
      if (!best || r.cost < best->cost) best = std::move(r);
    }
  FitResult out = detail::make_fit(*best, {"P_g", "P_c"}, {1.0, 1.0}, {"dBm", "dBm"}, m);
  const double ratio = std::pow(10.0, (out.values[0] - out.values[1]) / 10.0);
  const double sr = ratio * std::log(10.0) / 10.0 *
                    std::sqrt(std::max(0.0, out.covariance(0, 0) + out.covariance(1, 1) - 2.0 * out.covariance(0, 1)));
  out.names.emplace_back("ratio_g_over_c");
  out.values.push_back(ratio);
  out.sigmas.push_back(sr);
  out.units.emplace_back("1");
  return out;
}

// ----------------------------------------------------------- dephasing

struct DephasingSample {
  double V = 0.0;        // drive amplitude (V)
  double detuning = 0.0; // w_d - w_r, rad/s
  double Gamma_phi = 0.0;  // rad/s
};

struct DephasingModelParams {
  double chi = 0.0;      // rad/s
  double c = 0.0;        // photons / V^2
  double kappa_r = 0.0;  // rad/s
  double omega_r = 0.0;  // rad/s
};

inline double readout_photons(double V, double detuning, double chi, double c, double kappa) {
  const double num = kappa * kappa + chi * chi;
  const double a = 2.0 * detuning + chi;
  const double b = 2.0 * detuning - chi;
  return c * V * V * (num / (kappa * kappa + a * a) + num / (kappa * kappa + b * b));
}

inline double dephasing_rate(double nbar, double detuning, double chi, double kappa) {
  return nbar * kappa * chi * chi / (kappa * kappa + chi * chi + 4.0 * detuning * detuning);
}

inline double dephasing_rate(const DephasingModelParams& m, double V, double detuning) {
  return dephasing_rate(readout_photons(V, detuning, m.chi, m.c, m.kappa_r), detuning, m.chi, m.kappa_r);
}

/// Input-line attenuation implied by c (50 Ohm line, V as peak amplitude).
inline double attenuation_from_c(double c, double omega_r, double kappa_r, double Z0 = 50.0) {
  return power_db(c * Z0 * hbar * omega_r * kappa_r / 4.0);
}

struct DephasingFitOptions {
  std::vector<double> chi_starts_hz{0.1e6, 0.3e6, 1e6, 3e6};
  std::vector<double> c_starts{1e3, 1e4};
  double systematic_db = 0.0;  // added in quadrature to the attenuation sigma
  LsqOptions lsq{};
};

/// (chi, c) jointly over amplitudes and detunings; also reports the line attenuation.
inline FitResult fit_dephasing(std::span<const DephasingSample> data, double kappa_r, double omega_r,
                               const DephasingFitOptions& o = {}) {
  require(data.size() >= 2, "dephasing fit needs at least two samples");
  require(kappa_r > 0.0, "kappa_r must be positive");
  const double xs = two_pi * 1e6;
  const double cs = 1e3;
  const int m = static_cast<int>(data.size());
  double scale = 0.0;
  for (const auto& d : data) scale = std::max(scale, std::abs(d.Gamma_phi));
  if (scale == 0.0) scale = 1.0;
  const ResidualFn f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const double chi = std::abs(x[0]) * xs;
    const double c = std::abs(x[1]) * cs;
    for (int i = 0; i < m; ++i) {
      const auto& d = data[static_cast<std::size_t>(i)];
      r[i] = (dephasing_rate(readout_photons(d.V, d.detuning, chi, c, kappa_r), d.detuning, chi, kappa_r) -
              d.Gamma_phi) / scale;
    }
  };
  std::optional<LsqResult> best;
  for (double ch : o.chi_starts_hz)
    for (double c0 : o.c_starts) {
      Eigen::VectorXd x0(2);
      x0 << ch / 1e6, c0 / cs;
      LsqResult r = least_squares(f, x0, m, o.lsq);
      if (!best || r.cost < best->cost) best = std::move(r);
    }
  best->x = best->x.cwiseAbs();
  LsqResult stats = lsq_statistics(f, best->x, m, o.lsq);
  FitResult out = detail::make_fit(stats, {"chi", "c"}, {1e6, cs}, {"Hz", "photons/V^2"}, m);
  out.residual_rms *= scale;
  bool one_detuning = true;
  for (const auto& d : data) one_detuning = one_detuning && d.detuning == data[0].detuning;
  if (one_detuning) out.flags.emplace_back("chi-c-degenerate");
  const double c = out.values[1];
  const double att = attenuation_from_c(c, omega_r, kappa_r);
  const double s_stat = 10.0 / std::log(10.0) * out.sigmas[1] / c;
  out.names.emplace_back("attenuation");
  out.values.push_back(att);
  out.sigmas.push_back(std::hypot(s_stat, o.systematic_db));
  out.units.emplace_back("dB");
  return out;
}

}  // namespace dimerpa
