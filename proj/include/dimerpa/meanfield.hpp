// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimerpa/poly.hpp"
#include "dimerpa/types.hpp"

namespace dimerpa {

struct MeanFieldOptions {
  int ramp_steps = 64;
  int max_iterations = 200;
  double tolerance = 1e-12;      // normalized residual for Newton
  double fold_rcond = 1e-8;      // Jacobian reciprocal condition flagged as near-fold
  double accept_residual = 1e-10;
};

namespace detail {

// Input amplitudes of the two tones; c-tone absent -> 0.
struct Drive {
  double omega_g = 0.0;
  double omega_c = 0.0;
  cplx in_g{};
  cplx in_c{};
};

inline double amplitude_scale(const CircuitParams& p, const Drive& d) {
  const double kmax = std::max(std::abs(p.K_L), std::abs(p.K_R));
  if (kmax > 0.0) return std::sqrt(p.kappa / kmax);
  return std::max(1.0, 2.0 * std::max(std::abs(d.in_g), std::abs(d.in_c)) / std::sqrt(p.kappa));
}

// Defects of the four complex mean-field equations, order (R_g, L_g, R_c, L_c).
inline std::array<cplx, 4> mf_defects(const CircuitParams& p, const Drive& d, cplx gL, cplx gR,
                                      cplx cL, cplx cR) {
  const double sk = std::sqrt(p.kappa);
  const double dgL = d.omega_g - p.omega_L - p.K_L * (std::norm(gL) + 2.0 * std::norm(cL));
  const double dgR = d.omega_g - p.omega_R - p.K_R * (std::norm(gR) + 2.0 * std::norm(cR));
  const double dcL = d.omega_c - p.omega_L - p.K_L * (2.0 * std::norm(gL) + std::norm(cL));
  const double dcR = d.omega_c - p.omega_R - p.K_R * (2.0 * std::norm(gR) + std::norm(cR));
  const cplx I(0.0, 1.0);
  return {(dgR + I * p.gamma / 2.0) * gR - p.J * gL,
          (dgL + I * p.kappa / 2.0) * gL - p.J * gR + I * sk * d.in_g,
          (dcR + I * p.gamma / 2.0) * cR - p.J * cL,
          (dcL + I * p.kappa / 2.0) * cL - p.J * cR + I * sk * d.in_c};
}

inline double relative_residual(const CircuitParams& p, const Drive& d, const MeanFieldSolution& s) {
  const auto e = mf_defects(p, d, s.alpha_L_g, s.alpha_R_g, s.alpha_L_c, s.alpha_R_c);
  double num = 0.0;
  for (const cplx& v : e) num = std::max(num, std::abs(v));
  const double den = p.kappa * (std::abs(s.alpha_L_g) + std::abs(s.alpha_R_g) + std::abs(s.alpha_L_c) +
                                std::abs(s.alpha_R_c)) +
                     std::sqrt(p.kappa) * (std::abs(d.in_g) + std::abs(d.in_c));
  return den > 0.0 ? num / den : num;
}

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Real 8-vector system in scaled amplitudes x = alpha / A, residual / (kappa A).
struct DoublePumpSystem {
  const CircuitParams& p;
  Drive d;
  double A;
  bool two_tone;

  std::array<cplx, 4> unpack(const Vec8& x) const {
    return {cplx(x[0], x[1]) * A, cplx(x[2], x[3]) * A, cplx(x[4], x[5]) * A,
            cplx(x[6], x[7]) * A};
  }

  Vec8 residual(const Vec8& x) const {
    const auto [gL, gR, cL, cR] = unpack(x);
    const auto e = mf_defects(p, d, gL, gR, cL, cR);
    Vec8 r;
    const double s = 1.0 / (p.kappa * A);
    for (int k = 0; k < 4; ++k) {
      r[2 * k] = e[k].real() * s;
      r[2 * k + 1] = e[k].imag() * s;
    }
    if (!two_tone) r.tail<4>().setZero();
    return r;
  }

  // Jacobian of residual w.r.t. the scaled unknowns.
  Mat8 jacobian(const Vec8& x) const {
    const auto [gL, gR, cL, cR] = unpack(x);
    const cplx I(0.0, 1.0);
    Mat8 jac = Mat8::Zero();
    // Column pairs: 0 gL, 1 gR, 2 cL, 3 cR ; row pairs: 0 R_g, 1 L_g, 2 R_c, 3 L_c.
    const std::array<cplx, 4> amp{gL, gR, cL, cR};
    auto put = [&](int row, int col, cplx d_re, cplx d_im) {
      jac(2 * row, 2 * col) += d_re.real();
      jac(2 * row + 1, 2 * col) += d_re.imag();
      jac(2 * row, 2 * col + 1) += d_im.real();
      jac(2 * row + 1, 2 * col + 1) += d_im.imag();
    };
    struct Eq {
      int row, self, other_res, partner;  // partner = same resonator, other tone
      double omega, w_res, K, loss, self_w, partner_w;
    };
    const std::array<Eq, 4> eqs{{
        {0, 1, 0, 3, d.omega_g, p.omega_R, p.K_R, p.gamma, 1.0, 2.0},
        {1, 0, 1, 2, d.omega_g, p.omega_L, p.K_L, p.kappa, 1.0, 2.0},
        {2, 3, 2, 1, d.omega_c, p.omega_R, p.K_R, p.gamma, 1.0, 2.0},
        {3, 2, 3, 0, d.omega_c, p.omega_L, p.K_L, p.kappa, 1.0, 2.0},
    }};
    for (const Eq& q : eqs) {
      const cplx a = amp[q.self];
      const cplx b = amp[q.partner];
      const double delta = q.omega - q.w_res - q.K * (q.self_w * std::norm(a) + q.partner_w * std::norm(b));
      const cplx lin = delta + I * q.loss / 2.0;
      // d/d(Re a), d/d(Im a) of (delta(a) + i loss/2) a
      put(q.row, q.self, lin - 2.0 * q.K * q.self_w * a.real() * a,
          I * lin - 2.0 * q.K * q.self_w * a.imag() * a);
      put(q.row, q.partner, -2.0 * q.K * q.partner_w * b.real() * a,
          -2.0 * q.K * q.partner_w * b.imag() * a);
      put(q.row, q.other_res, cplx(-p.J, 0.0), -I * p.J);
    }
    jac *= A / (p.kappa * A);
    if (!two_tone) {
      jac.bottomRows<4>().setZero();
      jac.rightCols<4>().setZero();
      jac.bottomRightCorner<4, 4>().setIdentity();
    }
    return jac;
  }
};

struct NewtonResult {
  Vec8 x;
  double norm = 0.0;
  bool converged = false;
  double rcond = 1.0;
};

inline NewtonResult damped_newton(const DoublePumpSystem& sys, Vec8 x, const MeanFieldOptions& o) {
  NewtonResult res;
  Vec8 f = sys.residual(x);
  double fn = f.squaredNorm();
  for (int it = 0; it < o.max_iterations; ++it) {
    if (f.lpNorm<Eigen::Infinity>() <= o.tolerance) {
      res.converged = true;
      break;
    }
    const Mat8 jac = sys.jacobian(x);
    const Vec8 step = jac.fullPivLu().solve(-f);
    if (!step.allFinite()) break;
    double lam = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec8 xt = x + lam * step;
      const Vec8 ft = sys.residual(xt);
      const double ftn = ft.squaredNorm();
      if (ftn <= (1.0 - 2e-4 * lam) * fn) {
        x = xt;
        f = ft;
        fn = ftn;
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    if (!accepted) break;
  }
  if (f.lpNorm<Eigen::Infinity>() <= o.tolerance) res.converged = true;
  res.x = x;
  res.norm = f.lpNorm<Eigen::Infinity>();
  Eigen::JacobiSVD<Mat8> svd(sys.jacobian(x));
  const auto sv = svd.singularValues();
  res.rcond = sv[0] > 0.0 ? sv[7] / sv[0] : 0.0;
  if (!sys.two_tone) {
    Eigen::JacobiSVD<Eigen::Matrix4d> s4(sys.jacobian(x).topLeftCorner<4, 4>());
    const auto v = s4.singularValues();
    res.rcond = v[0] > 0.0 ? v[3] / v[0] : 0.0;
  }
  return res;
}

inline std::vector<MeanFieldSolution> finalize_branches(std::vector<MeanFieldSolution> v,
                                                        double merge_tol) {
  std::sort(v.begin(), v.end(), [](const MeanFieldSolution& a, const MeanFieldSolution& b) {
    return a.n_total() < b.n_total();
  });
  std::vector<MeanFieldSolution> out;
  for (auto& s : v) {
    bool dup = false;
    for (const auto& t : out) {
      const double d = std::abs(s.alpha_L_g - t.alpha_L_g) + std::abs(s.alpha_R_g - t.alpha_R_g) +
                       std::abs(s.alpha_L_c - t.alpha_L_c) + std::abs(s.alpha_R_c - t.alpha_R_c);
      const double scale = 1.0 + std::sqrt(s.n_total());
      if (d <= merge_tol * scale) dup = true;
    }
    if (!dup) out.push_back(s);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].branch_id = static_cast<int>(i);
  return out;
}

// Minimal polynomial helper, ascending coefficients.
struct Poly {
  std::vector<double> c;
  Poly(std::initializer_list<double> l) : c(l) {}
  explicit Poly(std::vector<double> v) : c(std::move(v)) {}
  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<double> r(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return Poly(r);
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    std::vector<double> r(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    return Poly(r);
  }
  friend Poly operator*(double s, Poly a) {
    for (double& x : a.c) x *= s;
    return a;
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0) * b; }
};

}  // namespace detail

/// Single tone: all physical branches from the reduced polynomial in n_R.
inline std::vector<MeanFieldSolution> solve_single_pump(const CircuitParams& p, const PumpTone& tone,
                                                        const MeanFieldOptions& o = {}) {
  p.validate();
  const cplx ain = tone.amplitude();
  detail::Drive drive{tone.frequency, 0.0, ain, {}};
  MeanFieldSolution zero;
  zero.omega_g = tone.frequency;
  if (std::abs(ain) == 0.0) return {zero};

  const double k = p.kappa;
  const double kmax = std::max(std::abs(p.K_L), std::abs(p.K_R));
  const double nin = std::norm(ain) / k;  // n_in = P / (hbar w kappa)
  // Population scale X: Kerr scale when nonlinear, drive scale when linear.
  const double X = kmax > 0.0 ? k / kmax : std::max(nin, 1.0);
  const double dR0 = (tone.frequency - p.omega_R) / k;
  const double dL0 = (tone.frequency - p.omega_L) / k;
  const double g = p.gamma / k;
  const double j = p.J / k;
  const double kR = p.K_R * X / k;
  const double kL = p.K_L * X / k;
  using detail::Poly;
  const Poly u{0.0, 1.0};
  const Poly dR = Poly{dR0} - kR * u;
  const Poly v = (1.0 / (j * j)) * (u * (dR * dR + Poly{g * g / 4.0}));
  const Poly dL = Poly{dL0} - kL * v;
  const Poly re = dL * dR - Poly{g / 4.0 + j * j};
  const Poly im = 0.5 * dR + (0.5 * g) * dL;
  const Poly P = v * (re * re + im * im) - (nin / X) * (dR * dR + Poly{g * g / 4.0});

  std::vector<double> coeffs = P.c;
  std::vector<double> candidates;
  for (const auto& r : poly_roots(coeffs)) {
    if (std::abs(r.imag()) > 1e-6 * (1.0 + std::abs(r.real()))) continue;
    if (r.real() < -1e-12) continue;
    candidates.push_back(std::max(r.real(), 0.0));
  }
  std::vector<MeanFieldSolution> sols;
  const cplx I(0.0, 1.0);
  for (double uu : candidates) {
    // polish on the real polynomial
    for (int it = 0; it < 20; ++it) {
      const double f = polyval<double, double>(coeffs, uu);
      std::vector<double> dc(coeffs.size() > 1 ? coeffs.size() - 1 : 1, 0.0);
      for (std::size_t q = 1; q < coeffs.size(); ++q) dc[q - 1] = coeffs[q] * static_cast<double>(q);
      const double df = polyval<double, double>(dc, uu);
      if (df == 0.0) break;
      const double step = f / df;
      uu -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(uu))) break;
    }
    const double nR = uu * X;
    const double deltaR = tone.frequency - p.omega_R - p.K_R * nR;
    const double nL = nR * (deltaR * deltaR + p.gamma * p.gamma / 4.0) / (p.J * p.J);
    const double deltaL = tone.frequency - p.omega_L - p.K_L * nL;
    const cplx zR = deltaR + I * p.gamma / 2.0;
    const cplx D = (deltaL + I * k / 2.0) * zR - p.J * p.J;
    MeanFieldSolution s;
    s.omega_g = tone.frequency;
    s.alpha_L_g = -I * std::sqrt(k) * ain * zR / D;
    s.alpha_R_g = p.J * s.alpha_L_g / zR;
    s.update_populations();
    s.residual = detail::relative_residual(p, drive, s);
    // One Newton refinement in the full complex system guards against
    // cancellation in the back-substitution.
    if (s.residual > o.accept_residual) {
      detail::DoublePumpSystem sys{p, drive, detail::amplitude_scale(p, drive), false};
      detail::Vec8 x = detail::Vec8::Zero();
      x << s.alpha_L_g.real(), s.alpha_L_g.imag(), s.alpha_R_g.real(), s.alpha_R_g.imag(), 0, 0, 0, 0;
      x /= sys.A;
      const auto nr = detail::damped_newton(sys, x, o);
      const auto a = sys.unpack(nr.x);
      s.alpha_L_g = a[0];
      s.alpha_R_g = a[1];
      s.update_populations();
      s.residual = detail::relative_residual(p, drive, s);
    }
    if (s.residual <= o.accept_residual) sols.push_back(s);
  }
  if (sols.empty()) fail(ErrorCode::solver, "single-pump mean field: no branch converged");
  auto out = detail::finalize_branches(std::move(sols), 1e-7);
  // Fold proximity flag from the 4x4 Jacobian.
  detail::DoublePumpSystem sys{p, drive, detail::amplitude_scale(p, drive), false};
  for (auto& s : out) {
    detail::Vec8 x = detail::Vec8::Zero();
    x << s.alpha_L_g.real(), s.alpha_L_g.imag(), s.alpha_R_g.real(), s.alpha_R_g.imag(), 0, 0, 0, 0;
    x /= sys.A;
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(sys.jacobian(x).topLeftCorner<4, 4>());
    const auto sv = svd.singularValues();
    s.near_fold = sv[0] > 0.0 && sv[3] / sv[0] < o.fold_rcond;
  }
  return out;
}

/// Two tones: power-ramp continuation from zero plus multi-start Newton at full power.
inline std::vector<MeanFieldSolution> solve_double_pump(const CircuitParams& p, const PumpTone& gain,
                                                        const PumpTone& conversion,
                                                        const MeanFieldOptions& o = {},
                                                        const MeanFieldSolution* warm = nullptr) {
  p.validate();
  require(gain.frequency != conversion.frequency, "pump tones must have distinct frequencies");
  const detail::Drive full{gain.frequency, conversion.frequency, gain.amplitude(), conversion.amplitude()};
  const double A = detail::amplitude_scale(p, full);
  auto pack = [A](const MeanFieldSolution& s) {
    detail::Vec8 x;
    x << s.alpha_L_g.real(), s.alpha_L_g.imag(), s.alpha_R_g.real(), s.alpha_R_g.imag(),
        s.alpha_L_c.real(), s.alpha_L_c.imag(), s.alpha_R_c.real(), s.alpha_R_c.imag();
    return detail::Vec8(x / A);
  };
  auto make = [&](const detail::DoublePumpSystem& sys, const detail::NewtonResult& r) {
    const auto a = sys.unpack(r.x);
    MeanFieldSolution s;
    s.alpha_L_g = a[0];
    s.alpha_R_g = a[1];
    s.alpha_L_c = a[2];
    s.alpha_R_c = a[3];
    s.omega_g = gain.frequency;
    s.omega_c = conversion.frequency;
    s.update_populations();
    s.residual = detail::relative_residual(p, full, s);
    s.near_fold = r.rcond < o.fold_rcond;
    return s;
  };

  std::vector<MeanFieldSolution> found;
  const detail::DoublePumpSystem full_sys{p, full, A, true};

  if (warm != nullptr) {
    const auto r = detail::damped_newton(full_sys, pack(*warm), o);
    if (r.converged) found.push_back(make(full_sys, r));
  }

  // Geometric ramp in power; on a failed step the increment is halved.
  {
    detail::Vec8 x = detail::Vec8::Zero();
    const double s0 = 1e-6;
    double s = 0.0;
    double ratio = std::pow(1.0 / s0, 1.0 / std::max(1, o.ramp_steps - 1));
    double next = s0;
    int guard = 0;
    bool ok = true;
    while (s < 1.0 && guard++ < 20 * o.ramp_steps) {
      detail::Drive dd = full;
      dd.in_g *= std::sqrt(next);
      dd.in_c *= std::sqrt(next);
      const detail::DoublePumpSystem sys{p, dd, A, true};
      const auto r = detail::damped_newton(sys, x, o);
      if (r.converged) {
        x = r.x;
        s = next;
        next = std::min(1.0, s * ratio);
      } else {
        ratio = std::sqrt(ratio);
        if (ratio - 1.0 < 1e-9) {
          ok = false;
          break;
        }
        next = std::min(1.0, s > 0.0 ? s * ratio : next * 0.5);
      }
    }
    if (ok && s >= 1.0) {
      const auto r = detail::damped_newton(full_sys, x, o);
      if (r.converged) found.push_back(make(full_sys, r));
    }
  }

  // Extra starts: products of single-tone branches and the linear response.
  {
    std::vector<std::vector<MeanFieldSolution>> singles;
    for (const PumpTone* t : {&gain, &conversion}) {
      try {
        singles.push_back(solve_single_pump(p, *t, o));
      } catch (const Error&) {
        singles.push_back({});
      }
    }
    for (const auto& sg : singles[0])
      for (const auto& sc : singles[1]) {
        MeanFieldSolution seed;
        seed.alpha_L_g = sg.alpha_L_g;
        seed.alpha_R_g = sg.alpha_R_g;
        seed.alpha_L_c = sc.alpha_L_g;
        seed.alpha_R_c = sc.alpha_R_g;
        const auto r = detail::damped_newton(full_sys, pack(seed), o);
        if (r.converged) found.push_back(make(full_sys, r));
      }
  }
  std::erase_if(found, [&](const MeanFieldSolution& s) { return s.residual > o.accept_residual; });
  if (found.empty()) fail(ErrorCode::solver, "double-pump mean field: continuation failed");
  return detail::finalize_branches(std::move(found), 1e-7);
}

/// Newton from a nearby solution (pump sweeps, frequency re-centering); falls
/// back to the full solve and the lowest-population branch.
inline MeanFieldSolution continue_double_pump(const CircuitParams& p, const PumpTone& gain,
                                              const PumpTone& conversion, const MeanFieldSolution& warm,
                                              const MeanFieldOptions& o = {}) {
  const detail::Drive full{gain.frequency, conversion.frequency, gain.amplitude(), conversion.amplitude()};
  const double A = detail::amplitude_scale(p, full);
  const detail::DoublePumpSystem sys{p, full, A, true};
  detail::Vec8 x;
  x << warm.alpha_L_g.real(), warm.alpha_L_g.imag(), warm.alpha_R_g.real(), warm.alpha_R_g.imag(),
      warm.alpha_L_c.real(), warm.alpha_L_c.imag(), warm.alpha_R_c.real(), warm.alpha_R_c.imag();
  const auto r = detail::damped_newton(sys, detail::Vec8(x / A), o);
  if (r.converged) {
    const auto a = sys.unpack(r.x);
    MeanFieldSolution s;
    s.alpha_L_g = a[0];
    s.alpha_R_g = a[1];
    s.alpha_L_c = a[2];
    s.alpha_R_c = a[3];
    s.omega_g = gain.frequency;
    s.omega_c = conversion.frequency;
    s.update_populations();
    s.residual = detail::relative_residual(p, full, s);
    s.near_fold = r.rcond < o.fold_rcond;
    if (s.residual <= o.accept_residual) return s;
  }
  const auto all = solve_double_pump(p, gain, conversion, o);
  std::vector<MeanFieldSolution> v(all.begin(), all.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.n_total() < b.n_total(); });
  return v.front();
}

/// Lowest total population; ties go to the lower branch_id.
inline MeanFieldSolution select_branch(std::span<const MeanFieldSolution> branches) {
  require(!branches.empty(), "select_branch: empty branch list");
  const MeanFieldSolution* best = &branches[0];
  for (const auto& b : branches) {
    if (b.n_total() < best->n_total() ||
        (b.n_total() == best->n_total() && b.branch_id < best->branch_id))
      best = &b;
  }
  return *best;
}

struct SpectroscopyBranch {
  double n_L = 0.0;
  double n_R = 0.0;
  cplx Gamma{};
};

struct SpectroscopyPoint {
  double n_L = 0.0;
  double n_R = 0.0;
  cplx Gamma{};
  std::vector<SpectroscopyBranch> branches;
};

/// Reflection of the probe at the left port, Gamma = 1 + sqrt(kappa) alpha_L / alpha_in.
inline cplx reflection_dimer(const CircuitParams& p, double omega, double n_L, double n_R) {
  const cplx I(0.0, 1.0);
  const double dL = omega - p.omega_L - p.K_L * n_L;
  const double dR = omega - p.omega_R - p.K_R * n_R;
  const cplx zR = dR + I * p.gamma / 2.0;
  const cplx D = (dL + I * p.kappa / 2.0) * zR - p.J * p.J;
  return 1.0 - I * p.kappa * zR / D;
}

inline SpectroscopyPoint spectroscopy_response(const CircuitParams& p, double probe_omega,
                                               double probe_power) {
  require(probe_power >= 0.0, "probe power must be non-negative");
  SpectroscopyPoint out;
  const auto br = solve_single_pump(p, PumpTone{probe_omega, probe_power, 0.0});
  for (const auto& b : br)
    out.branches.push_back({b.n_L, b.n_R, reflection_dimer(p, probe_omega, b.n_L, b.n_R)});
  const auto low = select_branch(br);
  out.n_L = low.n_L;
  out.n_R = low.n_R;
  out.Gamma = reflection_dimer(p, probe_omega, low.n_L, low.n_R);
  return out;
}

}  // namespace dimerpa
