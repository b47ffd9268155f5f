// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dimerpa/floquet.hpp"
#include "dimerpa/parallel.hpp"
#include "dimerpa/stability.hpp"

namespace dimerpa {

/// S(w) = kappa (M + i w)^-1 + 1 over quadratures.
inline Eigen::Matrix4cd scattering_quadrature(const DriftMatrix& dm, double omega) {
  const cplx I(0.0, 1.0);
  const Eigen::Matrix4cd m = dm.entries.cast<cplx>() + I * omega * Eigen::Matrix4cd::Identity();
  Eigen::FullPivLU<Eigen::Matrix4cd> lu(m);
  if (!lu.isInvertible()) fail(ErrorCode::solver, "resolvent is singular at this frequency");
  return dm.kappa * lu.inverse() + Eigen::Matrix4cd::Identity();
}

/// Closed-form zero-frequency s21 power gain of the balanced model.
inline double gain_zero_freq_closed_form(double C_S, double C_TMS, double C_BS) {
  const double den = 1.0 + C_BS - C_TMS;
  if (den <= 0.0) fail(ErrorCode::unreachable, "C_TMS - C_BS >= 1: unstable, gain diverges");
  const double num = 8.0 * std::sqrt(C_S) * (1.0 + std::pow(std::sqrt(C_BS) + std::sqrt(C_TMS), 2));
  const double amp = num / (den * den);
  return amp * amp;
}

/// Single-pump phase-preserving gain ((1 + C)/(1 - C))^2.
inline double gain_single_pump_closed_form(double C_TMS) {
  if (C_TMS >= 1.0) fail(ErrorCode::unreachable, "C_TMS >= 1: unstable");
  const double a = (1.0 + C_TMS) / (1.0 - C_TMS);
  return a * a;
}

struct PeakOptions {
  double min_prominence_db = 0.05;
  double window_db = 10.0;  // peaks lower than G0_dB - window are ignored
};

struct GainProfile {
  std::vector<double> freq_grid;  // rad/s
  std::vector<double> gain;       // linear power gain
  double G0 = 0.0;
  double f_peak = 0.0;
  double bandwidth_3db = 0.0;
  bool bandwidth_truncated = false;
  int peak_count = 0;
  std::vector<double> peak_freqs;
  std::string model_tag;
};

/// Local maxima (in dB) with at least the given prominence, within the window below G0.
inline std::vector<std::size_t> find_peaks(std::span<const double> g, const PeakOptions& o = {}) {
  const std::size_t n = g.size();
  std::vector<double> db(n);
  for (std::size_t i = 0; i < n; ++i) db[i] = power_db(std::max(g[i], 1e-300));
  const double top = *std::max_element(db.begin(), db.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? db[i - 1] : -1e300;
    const double right = i + 1 < n ? db[i + 1] : -1e300;
    if (!(db[i] > left && db[i] >= right)) continue;
    if (db[i] < top - o.window_db) continue;
    // Prominence against the deepest dip before a higher point on each side.
    double lmin = db[i];
    bool lhigher = false;
    for (std::size_t k = i; k-- > 0;) {
      if (db[k] > db[i]) {
        lhigher = true;
        break;
      }
      lmin = std::min(lmin, db[k]);
    }
    double rmin = db[i];
    bool rhigher = false;
    for (std::size_t k = i + 1; k < n; ++k) {
      if (db[k] > db[i]) {
        rhigher = true;
        break;
      }
      rmin = std::min(rmin, db[k]);
    }
    double base;
    if (lhigher && rhigher) base = std::max(lmin, rmin);
    else if (lhigher) base = lmin;
    else if (rhigher) base = rmin;
    else base = std::min(lmin, rmin);
    // Edges of the grid count as valleys only when the curve actually dips.
    if (db[i] - base >= o.min_prominence_db) out.push_back(i);
  }
  return out;
}

inline GainProfile make_profile(std::vector<double> grid, std::vector<double> gain, std::string tag,
                                const PeakOptions& po = {}) {
  require(grid.size() == gain.size() && grid.size() >= 3, "profile needs >= 3 matching points");
  GainProfile p;
  p.freq_grid = std::move(grid);
  p.gain = std::move(gain);
  p.model_tag = std::move(tag);
  const auto it = std::max_element(p.gain.begin(), p.gain.end());
  const std::size_t ip = static_cast<std::size_t>(it - p.gain.begin());
  p.G0 = *it;
  p.f_peak = p.freq_grid[ip];
  const double half = p.G0 / 2.0;
  const auto& f = p.freq_grid;
  const auto& g = p.gain;
  std::size_t lo = ip;
  while (lo > 0 && g[lo - 1] >= half) --lo;
  std::size_t hi = ip;
  while (hi + 1 < g.size() && g[hi + 1] >= half) ++hi;
  double flo = f[lo];
  double fhi = f[hi];
  if (lo > 0) flo = f[lo - 1] + (half - g[lo - 1]) / (g[lo] - g[lo - 1]) * (f[lo] - f[lo - 1]);
  else p.bandwidth_truncated = true;
  if (hi + 1 < g.size()) fhi = f[hi] + (half - g[hi]) / (g[hi + 1] - g[hi]) * (f[hi + 1] - f[hi]);
  else p.bandwidth_truncated = true;
  p.bandwidth_3db = fhi - flo;
  for (std::size_t i : find_peaks(p.gain, po)) p.peak_freqs.push_back(p.freq_grid[i]);
  p.peak_count = static_cast<int>(p.peak_freqs.size());
  return p;
}

inline std::vector<double> linspace(double a, double b, int n) {
  require(n >= 2, "grid needs at least two points");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

/// Samples g on [lo, hi]; a peak narrower than 40 grid steps gets a second,
/// 401-point pass around it and the two grids are merged.
template <class F>
GainProfile sampled_profile(F&& g, double lo, double hi, int points, std::string tag, const PeakOptions& po = {},
                            int threads = 1) {
  std::vector<double> grid = linspace(lo, hi, points);
  std::vector<double> v(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { v[i] = g(grid[i]); });
  GainProfile coarse = make_profile(grid, v, tag, po);
  const double dx = grid[1] - grid[0];
  if (coarse.bandwidth_3db >= 40.0 * dx || coarse.bandwidth_truncated) return coarse;
  const double w = std::max(coarse.bandwidth_3db, 2.0 * dx);
  std::vector<double> fine = linspace(coarse.f_peak - 3.0 * w, coarse.f_peak + 3.0 * w, 401);
  std::vector<double> vf(fine.size());
  parallel_for(fine.size(), threads, [&](std::size_t i) { vf[i] = g(fine[i]); });
  std::vector<std::pair<double, double>> all;
  all.reserve(grid.size() + fine.size());
  for (std::size_t i = 0; i < grid.size(); ++i) all.emplace_back(grid[i], v[i]);
  for (std::size_t i = 0; i < fine.size(); ++i) all.emplace_back(fine[i], vf[i]);
  std::sort(all.begin(), all.end());
  std::vector<double> f2, g2;
  for (const auto& [x, y] : all) {
    if (!f2.empty() && x == f2.back()) continue;
    f2.push_back(x);
    g2.push_back(y);
  }
  return make_profile(std::move(f2), std::move(g2), std::move(tag), po);
}

/// Gain |S_{row,col}(w)|^2 of the quadrature model; default observable s21.
inline GainProfile gain_profile_quadrature(const DriftMatrix& dm, std::vector<double> grid, int row = 1,
                                           int col = 0, int threads = 1) {
  std::vector<double> g(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    g[i] = std::norm(scattering_quadrature(dm, grid[i])(row, col));
  });
  return make_profile(std::move(grid), std::move(g), "quadrature-symmetric");
}

/// Reflection gain of the bare Floquet model on an absolute frequency grid (rad/s).
inline GainProfile gain_profile_floquet(const CircuitParams& p, const MeanFieldSolution& mf,
                                        std::vector<double> grid, int N = 2, int threads = 1,
                                        const PeakOptions& po = {}) {
  const FloquetBlocks b = floquet_blocks(p, mf);
  std::vector<double> g(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { g[i] = floquet_gain(p, b, grid[i], N); });
  return make_profile(std::move(grid), std::move(g), "floquet-single-port", po);
}

struct PhaseSensitiveGain {
  double G_max = 1.0;
  double G_min = 1.0;
  double modulation = 1.0;
};

/// Singular values of the reflected 2x2 quadrature block of one mode (0 = a, 1 = b).
inline PhaseSensitiveGain phase_sensitive_gain(const DriftMatrix& dm, double omega, int mode = 1) {
  require(mode == 0 || mode == 1, "mode must be 0 (a) or 1 (b)");
  const Eigen::Matrix4cd s = scattering_quadrature(dm, omega);
  const Eigen::Matrix2cd blk = s.block<2, 2>(2 * mode, 2 * mode);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(blk);
  const auto sv = svd.singularValues();
  PhaseSensitiveGain r;
  r.G_max = sv[0] * sv[0];
  r.G_min = sv[1] * sv[1];
  r.modulation = r.G_min > 0.0 ? r.G_max / r.G_min : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace dimerpa
