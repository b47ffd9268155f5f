// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dimerpa/response.hpp"

namespace dimerpa {

/// Symmetrized output PSD per output channel, psd_i = sum_j |S_ij|^2 (n_th_j + 1/2).
/// Empty n_th means vacuum on every input.
inline std::vector<double> output_noise(const Eigen::MatrixXcd& S, std::span<const double> n_th = {}) {
  require(n_th.empty() || static_cast<Eigen::Index>(n_th.size()) == S.cols(),
          "thermal occupation list must match the number of inputs");
  std::vector<double> psd(static_cast<std::size_t>(S.rows()), 0.0);
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index j = 0; j < S.cols(); ++j) {
      const double occ = n_th.empty() ? 0.0 : n_th[static_cast<std::size_t>(j)];
      psd[static_cast<std::size_t>(i)] += std::norm(S(i, j)) * (occ + 0.5);
    }
  return psd;
}

struct AddedNoise {
  double n_add = 0.0;
  bool deamplifying = false;  // G < 1: the number loses its usual meaning
};

inline AddedNoise added_noise(double psd_out, double G) {
  require(G > 0.0, "added noise needs G > 0");
  return {psd_out / G - 0.5, G < 1.0};
}

inline double quantum_limit(double G) { return 0.5 * (1.0 - 1.0 / G); }

/// Scattering in the ladder basis (c_a, c_a^dag, c_b, c_b^dag).
inline Eigen::Matrix4cd scattering_mode_basis(const DriftMatrix& dm, double omega) {
  const Eigen::Matrix4cd w = quadrature_map();
  return w.inverse() * scattering_quadrature(dm, omega) * w;
}

struct NoiseSpectrum {
  std::vector<double> freq_grid;
  std::vector<double> gain;
  std::vector<double> psd_out;
  std::vector<double> n_add;
  std::vector<double> quantum_limit;
};

/// Added noise of the phase-preserving channel c_mode -> c_mode (0 = a, 1 = b).
inline NoiseSpectrum noise_spectrum(const DriftMatrix& dm, std::vector<double> grid, int mode = 0,
                                    std::span<const double> n_th = {}, int threads = 1) {
  require(mode == 0 || mode == 1, "mode must be 0 (a) or 1 (b)");
  NoiseSpectrum ns;
  const std::size_t n = grid.size();
  ns.gain.resize(n);
  ns.psd_out.resize(n);
  ns.n_add.resize(n);
  ns.quantum_limit.resize(n);
  std::vector<double> occ(n_th.begin(), n_th.end());
  parallel_for(n, threads, [&](std::size_t i) {
    const Eigen::MatrixXcd s = scattering_mode_basis(dm, grid[i]);
    const int r = 2 * mode;
    const double G = std::norm(s(r, r));
    const double psd = output_noise(s, occ)[static_cast<std::size_t>(r)];
    ns.gain[i] = G;
    ns.psd_out[i] = psd;
    ns.n_add[i] = psd / G - 0.5;
    ns.quantum_limit[i] = quantum_limit(G);
  });
  ns.freq_grid = std::move(grid);
  return ns;
}

/// Per-quadrature output PSDs (X_a, P_a, X_b, P_b) under vacuum input.
inline std::vector<double> quadrature_psd(const DriftMatrix& dm, double omega) {
  return output_noise(scattering_quadrature(dm, omega));
}

}  // namespace dimerpa
