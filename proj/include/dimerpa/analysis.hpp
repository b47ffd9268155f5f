// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Eigenvalue sweeps, gain-bandwidth scans and pump tuning toward the
// Bogoliubov point (C_TMS - C_BS = -1).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dimerpa/couplings.hpp"
#include "dimerpa/device.hpp"
#include "dimerpa/response.hpp"
#include "dimerpa/stability.hpp"

namespace dimerpa {

enum class AmpMode { SP, EP, BP };

inline const char* to_string(AmpMode m) {
  switch (m) {
    case AmpMode::SP: return "SP";
    case AmpMode::EP: return "EP";
    case AmpMode::BP: return "BP";
  }
  return "?";
}

inline AmpMode amp_mode_from_string(const std::string& s) {
  if (s == "SP") return AmpMode::SP;
  if (s == "EP") return AmpMode::EP;
  if (s == "BP") return AmpMode::BP;
  fail(ErrorCode::invalid_argument, "mode must be SP, EP or BP, got " + s);
}

// ---------------------------------------------------------------- eigenvalues

struct EigenSweepRow {
  double gap = 0.0;
  double C_TMS = 0.0;
  double C_BS = 0.0;
  std::array<cplx, 4> eigenvalues{};
  Classification classification = Classification::stable;
};

/// Balanced symmetric model along the gap axis: C_TMS = max(gap, 0) + 1,
/// C_BS = C_TMS - gap, C_S = C_TMS / 4. Eigenvalues come from the drift matrix.
inline std::vector<EigenSweepRow> eigenvalue_sweep(double kappa, std::span<const double> gaps) {
  require(kappa > 0.0, "kappa must be positive");
  std::vector<EigenSweepRow> out;
  out.reserve(gaps.size());
  for (double gap : gaps) {
    EigenSweepRow r;
    r.gap = gap;
    r.C_TMS = std::max(gap, 0.0) + 1.0;
    r.C_BS = r.C_TMS - gap;
    const EffectiveCouplings c = balanced_couplings(kappa, r.C_TMS, r.C_BS, r.C_TMS / 4.0);
    const DriftMatrix dm = drift_matrix(c, kappa);
    const StabilityReport rep = classify(dm, c);
    r.eigenvalues = rep.eigenvalues;
    r.classification = rep.classification;
    out.push_back(r);
  }
  return out;
}

/// Bisection for the instability onset: the gap where max Re(eigenvalue) crosses 0.
inline double instability_onset(double kappa, double lo = 0.0, double hi = 2.0, double tol = 1e-12) {
  auto max_re = [kappa](double gap) {
    const double ct = std::max(gap, 0.0) + 1.0;
    const EffectiveCouplings c = balanced_couplings(kappa, ct, ct - gap, ct / 4.0);
    double m = -1e300;
    for (cplx e : eigenvalues(drift_matrix(c, kappa))) m = std::max(m, e.real());
    return m;
  };
  require(max_re(lo) < 0.0 && max_re(hi) >= 0.0, "onset not bracketed");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (max_re(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ------------------------------------------------------ symmetric families

struct ScanOptions {
  int points = 2001;
  double half_span = 3.0;  // units of kappa
  double tol_db = 0.01;
  int threads = 1;
  PeakOptions peaks{};
};

struct FamilyPoint {
  double C_TMS = 0.0;
  double C_BS = 0.0;
  double C_S = 0.0;
};

/// SP: TMS only. EP: C_BS = C_TMS. BP: C_BS = C_TMS + 1. C_S = C_TMS / 4 with a beam splitter.
inline FamilyPoint family_point(AmpMode m, double C_TMS) {
  switch (m) {
    case AmpMode::SP: return {C_TMS, 0.0, 0.0};
    case AmpMode::EP: return {C_TMS, C_TMS, C_TMS / 4.0};
    case AmpMode::BP: return {C_TMS, C_TMS + 1.0, C_TMS / 4.0};
  }
  return {};
}

/// SP is read in reflection of a quadrature (|s11|^2), EP and BP through s21.
inline GainProfile family_profile(AmpMode m, double C_TMS, double kappa, const ScanOptions& o = {}) {
  const FamilyPoint f = family_point(m, C_TMS);
  const EffectiveCouplings c = balanced_couplings(kappa, f.C_TMS, f.C_BS, f.C_S);
  const DriftMatrix dm = drift_matrix(c, kappa);
  const int row = m == AmpMode::SP ? 0 : 1;
  const double span = o.half_span * kappa;
  return sampled_profile([&](double w) { return std::norm(scattering_quadrature(dm, w)(row, 0)); }, -span, span,
                         o.points, "quadrature-symmetric", o.peaks, o.threads);
}

struct GbwPoint {
  AmpMode mode = AmpMode::SP;
  double target_db = 0.0;
  bool reachable = false;
  double G0_db = 0.0;
  double bandwidth = 0.0;  // rad/s
  double control = 0.0;    // C_TMS (symmetric) or P_g in W (device)
  double gap = 0.0;
  std::string message;
};

namespace detail {

// First crossing of f(x) = G0_dB(x) - target on a geometric upward scan, then
// bisection in log x. f returns +inf where the system is unstable.
template <class F>
std::optional<double> solve_gain(F&& f, double x0, double x_max, double factor, double tol_db, int max_bisect = 80) {
  double a = x0;
  double fa = f(a);
  if (fa > 0.0) return std::nullopt;
  double b = a;
  double fb = fa;
  while (fb < 0.0) {
    a = b;
    fa = fb;
    if (b >= x_max) return std::nullopt;
    b = std::min(b * factor, x_max);
    fb = f(b);
  }
  if (std::isfinite(fb) && std::abs(fb) <= tol_db) return b;
  for (int i = 0; i < max_bisect; ++i) {
    const double m = std::sqrt(a * b);
    const double fm = f(m);
    if (std::isfinite(fm) && std::abs(fm) <= tol_db) return m;
    (fm < 0.0 ? a : b) = m;
  }
  return std::abs(fa) < tol_db * 10 ? std::optional<double>(a) : std::nullopt;
}

}  // namespace detail

/// For each target the family coupling is solved so that G0 matches within tol_db.
inline std::vector<GbwPoint> gbw_scan(AmpMode m, std::span<const double> targets_db, double kappa,
                                      const ScanOptions& o = {}) {
  require(kappa > 0.0, "kappa must be positive");
  std::vector<GbwPoint> out;
  for (double t : targets_db) {
    GbwPoint pt;
    pt.mode = m;
    pt.target_db = t;
    auto f = [&](double ct) {
      if (m == AmpMode::SP && ct >= 1.0) return std::numeric_limits<double>::infinity();
      return power_db(family_profile(m, ct, kappa, o).G0) - t;
    };
    const double xmax = m == AmpMode::SP ? 1.0 - 1e-12 : 1e3;
    const auto x = detail::solve_gain(f, 1e-6, xmax, 1.25, o.tol_db);
    if (!x) {
      pt.message = "target gain not reachable in the stable region";
      out.push_back(pt);
      continue;
    }
    const GainProfile p = family_profile(m, *x, kappa, o);
    const FamilyPoint fp = family_point(m, *x);
    pt.reachable = true;
    pt.G0_db = power_db(p.G0);
    pt.bandwidth = p.bandwidth_3db;
    pt.control = *x;
    pt.gap = fp.C_TMS - fp.C_BS;
    out.push_back(pt);
  }
  return out;
}

/// Single-pump scan of the bare device: P_g solved per target, bandwidth from the Floquet profile.
inline std::vector<GbwPoint> gbw_scan_device(const CircuitParams& p, std::span<const double> targets_db,
                                             const DeviceProfileOptions& po = {}, const RecenterOptions& ro = {},
                                             double tol_db = 0.01) {
  std::vector<GbwPoint> out;
  for (double t : targets_db) {
    GbwPoint pt;
    pt.mode = AmpMode::SP;
    pt.target_db = t;
    std::optional<OperatingPoint> warm;
    auto eval = [&](double P) -> std::optional<GainProfile> {
      const OperatingPoint op = operate(p, P, 0.0, ro, warm ? &*warm : nullptr);
      if (!op.converged || !operating_point_stable(p, op, po.N)) return std::nullopt;
      warm = op;
      return device_profile(p, op, po);
    };
    auto f = [&](double P) {
      const auto pr = eval(P);
      return pr ? power_db(pr->G0) - t : std::numeric_limits<double>::infinity();
    };
    const auto P = detail::solve_gain(f, watts(Dbm{-90.0}), watts(Dbm{-50.0}), std::pow(10.0, 0.05), tol_db);
    const auto pr = P ? eval(*P) : std::nullopt;
    if (!pr) {
      pt.message = "target gain not reachable on a stable single-pump branch";
      out.push_back(pt);
      continue;
    }
    pt.reachable = true;
    pt.G0_db = power_db(pr->G0);
    pt.bandwidth = pr->bandwidth_3db;
    pt.control = *P;
    out.push_back(pt);
  }
  return out;
}

// ------------------------------------------------------------ BP tuning

struct TuneEvaluation {
  bool stable = false;
  GainProfile profile;
  double gap = 0.0;  // C_TMS - C_BS at the evaluated point
};

/// (P_g, P_c) -> profile. Powers are model units (W for the device).
using TuneEvaluator = std::function<TuneEvaluation(double P_g, double P_c)>;

/// Lossless symmetric model driven by two pumps: with e = coupling_per_watt * P,
/// Lambda_TMS = kappa e_g, Lambda_BS = 2 kappa sqrt(e_g e_c), Lambda_S = kappa sqrt(e_g e_c),
/// balanced detunings. Hence C_S = C_BS / 4 and C_BS / C_TMS = 4 P_c / P_g.
struct SymmetricPumpModel {
  double kappa = 1.0;
  double coupling_per_watt = 1.0;
  ScanOptions scan{};

  TuneEvaluation operator()(double P_g, double P_c) const {
    const double eg = coupling_per_watt * P_g;
    const double ec = coupling_per_watt * P_c;
    const double T = kappa * eg;
    const double B = 2.0 * kappa * std::sqrt(eg * ec);
    const double S = kappa * std::sqrt(eg * ec);
    auto coop = [this](double l) { return 4.0 * l * l / (kappa * kappa); };
    const double CT = coop(T), CB = coop(B), CS = coop(S);
    const EffectiveCouplings c = balanced_couplings(kappa, CT, CB, CS);
    const DriftMatrix dm = drift_matrix(c, kappa);
    TuneEvaluation e;
    e.gap = CT - CB;
    const StabilityReport rep = classify(dm, c);
    e.stable = rep.max_real < 0.0;
    if (!e.stable) return e;
    const double span = scan.half_span * kappa;
    try {
      e.profile = sampled_profile([&](double w) { return std::norm(scattering_quadrature(dm, w)(1, 0)); }, -span,
                                  span, scan.points, "quadrature-symmetric", scan.peaks, scan.threads);
    } catch (const Error&) {
      e.stable = false;  // numerically marginal
    }
    return e;
  }
};

/// Bare dimer device in the Floquet single-port model. Successive calls
/// warm-start from the previous operating point, so a fixed call sequence is reproducible.
struct DeviceModel {
  CircuitParams params;
  DeviceProfileOptions profile{};
  RecenterOptions recenter{};
  std::shared_ptr<std::optional<OperatingPoint>> last = std::make_shared<std::optional<OperatingPoint>>();

  TuneEvaluation operator()(double P_g, double P_c) const {
    TuneEvaluation e;
    const OperatingPoint* warm = last->has_value() ? &**last : nullptr;
    const OperatingPoint op = operate(params, P_g, P_c, recenter, warm);
    if (!op.converged) return e;
    *last = op;
    const Cooperativities c = cooperativities(operating_couplings(params, op), params.kappa);
    e.gap = c.C_TMS - c.C_BS;
    e.stable = operating_point_stable(params, op, profile.N);
    if (!e.stable) return e;
    e.profile = device_profile(params, op, profile);
    return e;
  }
};

struct TuneOptions {
  double log_ratio_lo = -1.5;  // log10(P_c / P_g) search interval
  double log_ratio_hi = 0.5;
  double log_pg_start = -1.0;  // first log10(P_g) of the upward bracket
  double log_pg_max = 1.0;     // the bracket gives up above this
  double log_pg_step = 0.05;
  int coarse = 7;
  int budget = 200;  // profile evaluations
  double tol_db = 0.02;
  double accept_db = 0.1;
  double two_peak_penalty = 0.5;
  std::uint64_t seed = 0;  // recorded only; the search is deterministic
};

struct TuneTrace {
  double log_ratio = 0.0;
  double P_g = 0.0;
  double P_c = 0.0;
  double G0_db = 0.0;
  double bandwidth = 0.0;
  int peak_count = 0;
  double gap = 0.0;
  double objective = 0.0;
};

struct TuneResult {
  double P_g = 0.0;
  double P_c = 0.0;
  double ratio = 0.0;  // P_c / P_g
  double G0_db = 0.0;
  double bandwidth = 0.0;
  int peak_count = 0;
  double gap = 0.0;
  bool converged = false;
  int evaluations = 0;
  std::string message;
  std::vector<TuneTrace> trace;  // one row per gain-matched ratio
};

namespace detail {

class Tuner {
 public:
  Tuner(const TuneEvaluator& f, double target, const TuneOptions& o) : f_(f), target_(target), o_(o) {}

  // Best objective at a fixed ratio, or -1 when the target is not met.
  double at_ratio(double lr) {
    const double r = std::pow(10.0, lr);
    auto g = [&](double lp) -> std::pair<double, TuneEvaluation> {
      ++evals_;
      TuneEvaluation e = f_(std::pow(10.0, lp), r * std::pow(10.0, lp));
      if (!e.stable) return {std::numeric_limits<double>::infinity(), std::move(e)};
      return {power_db(e.profile.G0) - target_, std::move(e)};
    };
    double a = warm_lp_.value_or(o_.log_pg_start) - (warm_lp_ ? 4.0 * o_.log_pg_step : 0.0);
    double fa = g(a).first;
    double step = o_.log_pg_step;
    // Step down until below target, then up to the first exceedance.
    int guard = 0;
    while (fa > 0.0 && guard++ < 60 && out_of_budget() == false) {
      a -= step;
      step *= 1.5;
      fa = g(a).first;
    }
    if (fa > 0.0) return -1.0;
    double b = a;
    double fb = fa;
    TuneEvaluation eb;
    step = o_.log_pg_step;
    guard = 0;
    while (fb < 0.0) {
      if (guard++ > 80 || out_of_budget() || b >= o_.log_pg_max) return -1.0;
      a = b;
      fa = fb;
      b = std::min(a + step, o_.log_pg_max);
      step *= 1.1;
      std::tie(fb, eb) = g(b);
    }
    // Illinois on [a, b]; bisection while the upper end is unstable.
    double wa = 1.0, wb = 1.0;
    int side = 0;
    double x = b, fx = fb;
    TuneEvaluation ex = eb;
    while (!(std::isfinite(fx) && std::abs(fx) <= o_.tol_db)) {
      // An unstable upper end that will not move means the target sits past the stability edge.
      if (out_of_budget() || b - a < (std::isfinite(fb) ? 1e-9 : 1e-3)) break;
      x = std::isfinite(fb) ? (a * wb * fb - b * wa * fa) / (wb * fb - wa * fa) : 0.5 * (a + b);
      if (!(x > a && x < b)) x = 0.5 * (a + b);
      std::tie(fx, ex) = g(x);
      if (fx < 0.0) {
        a = x;
        fa = fx;
        wa = 1.0;
        if (side == -1) wb *= 0.5;
        side = -1;
      } else {
        b = x;
        fb = fx;
        wb = 1.0;
        if (side == 1) wa *= 0.5;
        side = 1;
      }
    }
    if (!(std::isfinite(fx) && std::abs(fx) <= o_.accept_db)) return -1.0;
    warm_lp_ = x;
    const double obj = ex.profile.bandwidth_3db * (ex.profile.peak_count > 1 ? o_.two_peak_penalty : 1.0);
    const double P_g = std::pow(10.0, x);
    trace_.push_back({lr, P_g, r * P_g, power_db(ex.profile.G0), ex.profile.bandwidth_3db, ex.profile.peak_count,
                      ex.gap, obj});
    if (obj > best_obj_) {
      best_obj_ = obj;
      best_ = trace_.back();
    }
    return obj;
  }

  bool out_of_budget() const { return evals_ >= o_.budget; }
  int evaluations() const { return evals_; }
  const std::vector<TuneTrace>& trace() const { return trace_; }
  const std::optional<TuneTrace>& best() const { return best_; }

 private:
  const TuneEvaluator& f_;
  double target_;
  const TuneOptions& o_;
  int evals_ = 0;
  std::optional<double> warm_lp_;
  std::vector<TuneTrace> trace_;
  double best_obj_ = -1.0;
  std::optional<TuneTrace> best_;
};

}  // namespace detail

/// Maximizes the 3 dB bandwidth over (P_g, P_c) with G0 held at the target:
/// coarse scan then golden section over log(P_c/P_g); at each ratio P_g is solved
/// for the target gain (upward bracket + Illinois). Two-peak profiles are penalized.
inline TuneResult tune_to_bp(const TuneEvaluator& model, double target_db, const TuneOptions& o = {}) {
  TuneResult res;
  if (target_db <= 0.0) {
    res.converged = true;
    res.message = "target <= 0 dB: pumps off";
    return res;
  }
  require(o.coarse >= 3, "coarse scan needs at least 3 ratios");
  require(o.log_ratio_hi > o.log_ratio_lo, "empty ratio interval");
  detail::Tuner t(model, target_db, o);
  std::vector<double> lr(static_cast<std::size_t>(o.coarse));
  std::vector<double> obj(lr.size());
  for (std::size_t i = 0; i < lr.size(); ++i) {
    lr[i] = o.log_ratio_lo + (o.log_ratio_hi - o.log_ratio_lo) * static_cast<double>(i) / (o.coarse - 1);
    obj[i] = t.at_ratio(lr[i]);
  }
  const std::size_t ib = static_cast<std::size_t>(std::max_element(obj.begin(), obj.end()) - obj.begin());
  if (obj[ib] > 0.0) {
    double a = lr[ib > 0 ? ib - 1 : ib];
    double b = lr[std::min(ib + 1, lr.size() - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = t.at_ratio(c), fd = t.at_ratio(d);
    while (!t.out_of_budget() && b - a > 1e-3) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = t.at_ratio(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = t.at_ratio(d);
      }
    }
  }
  res.evaluations = t.evaluations();
  res.trace = t.trace();
  if (!t.best()) {
    res.message = "no ratio reached the target gain within the budget";
    return res;
  }
  const TuneTrace& b = *t.best();
  res.P_g = b.P_g;
  res.P_c = b.P_c;
  res.ratio = b.P_c / b.P_g;
  res.G0_db = b.G0_db;
  res.bandwidth = b.bandwidth;
  res.peak_count = b.peak_count;
  res.gap = b.gap;
  res.converged = !t.out_of_budget();
  res.message = res.converged ? "ok" : "budget exhausted; best so far";
  return res;
}

// ------------------------------------------------- coalescence sweeps

struct CoalescenceRow {
  double P_c = 0.0;  // W
  bool converged = false;
  bool stable = false;
  double max_real = 0.0;  // largest Floquet exponent real part, rad/s
  double G0_db = 0.0;
  double bandwidth = 0.0;
  int peak_count = 0;
  std::vector<double> peak_freqs;  // rad/s
  double omega_b_tilde = 0.0;
};

/// P_c sweep at fixed P_g (W), warm-started in the given order.
inline std::vector<CoalescenceRow> coalescence_sweep(const CircuitParams& p, double P_g, std::span<const double> P_c,
                                                     const DeviceProfileOptions& po = {},
                                                     const RecenterOptions& ro = {}) {
  std::vector<CoalescenceRow> out;
  std::optional<OperatingPoint> warm;
  for (double pc : P_c) {
    CoalescenceRow r;
    r.P_c = pc;
    const OperatingPoint op = operate(p, P_g, pc, ro, warm ? &*warm : nullptr);
    r.converged = op.converged;
    if (op.converged) {
      warm = op;
      r.max_real = floquet_max_real(floquet_blocks(p, op.mf), po.N);
      r.stable = r.max_real < 0.0;
      const GainProfile g = device_profile(p, op, po);
      r.G0_db = power_db(g.G0);
      r.bandwidth = g.bandwidth_3db;
      r.peak_count = g.peak_count;
      r.peak_freqs = g.peak_freqs;
      r.omega_b_tilde = op.omega_b_tilde;
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Index of the first row with a single peak that follows a two-peak row.
inline std::optional<std::size_t> coalescence_index(std::span<const CoalescenceRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i - 1].converged && rows[i].converged && rows[i - 1].peak_count >= 2 && rows[i].peak_count == 1)
      return i;
  return std::nullopt;
}

}  // namespace dimerpa
