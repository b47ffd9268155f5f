// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Harmonic-balance linear response of the bare dimer around a one- or
// two-tone mean field. Basis per harmonic: (a_L, a_L^dag, a_R, a_R^dag);
// harmonic n carries frequency omega + n * delta_p in the frame w_o.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dimerpa/types.hpp"

namespace dimerpa {

struct FloquetBlocks {
  Eigen::Matrix4cd static_block = Eigen::Matrix4cd::Zero();  // A0, without the i omega term
  Eigen::Matrix4cd lower = Eigen::Matrix4cd::Zero();         // couples harmonic n-1 into n
  Eigen::Matrix4cd upper = Eigen::Matrix4cd::Zero();         // couples harmonic n+1 into n
  double frame = 0.0;
  double delta_p = 0.0;
};

struct FloquetMatrix {
  Eigen::MatrixXcd entries;
  int N = 0;
  double delta_p = 0.0;
  double frame = 0.0;
  double omega = 0.0;

  Eigen::Index dimension() const { return entries.rows(); }
};

inline FloquetBlocks floquet_blocks(const CircuitParams& p, const MeanFieldSolution& mf) {
  const cplx I(0.0, 1.0);
  FloquetBlocks b;
  const bool two = mf.two_tone();
  b.frame = two ? 0.5 * (mf.omega_g + mf.omega_c) : mf.omega_g;
  b.delta_p = two ? mf.omega_g - mf.omega_c : 0.0;

  struct Res {
    double omega, K, loss;
    cplx g, c;
  };
  const Res res[2] = {{p.omega_L, p.K_L, p.kappa, mf.alpha_L_g, mf.alpha_L_c},
                      {p.omega_R, p.K_R, p.gamma, mf.alpha_R_g, mf.alpha_R_c}};
  for (int j = 0; j < 2; ++j) {
    const Res& r = res[j];
    const int i = 2 * j;
    const double delta = b.frame - r.omega - 2.0 * r.K * (std::norm(r.g) + std::norm(r.c));
    b.static_block(i, i) = I * delta - r.loss / 2.0;
    b.static_block(i + 1, i + 1) = -I * delta - r.loss / 2.0;
    if (two) {
      const cplx K1 = 2.0 * r.K * r.g * std::conj(r.c);
      const cplx K2 = std::conj(K1);
      const cplx K3 = r.K * r.g * r.g;
      const cplx K4 = r.K * r.c * r.c;
      const cplx K5 = 2.0 * r.K * r.g * r.c;
      b.static_block(i, i + 1) = -I * K5;
      b.static_block(i + 1, i) = I * std::conj(K5);
      b.lower(i, i) = -I * K1;
      b.lower(i, i + 1) = -I * K3;
      b.lower(i + 1, i + 1) = I * std::conj(K2);
      b.lower(i + 1, i) = I * std::conj(K4);
      b.upper(i, i) = -I * K2;
      b.upper(i, i + 1) = -I * K4;
      b.upper(i + 1, i + 1) = I * std::conj(K1);
      b.upper(i + 1, i) = I * std::conj(K3);
    } else {
      // Single tone in its own frame: the squeeze term is static.
      const cplx K3 = r.K * r.g * r.g;
      b.static_block(i, i + 1) = -I * K3;
      b.static_block(i + 1, i) = I * std::conj(K3);
    }
  }
  b.static_block(0, 2) = -I * p.J;
  b.static_block(2, 0) = -I * p.J;
  b.static_block(1, 3) = I * p.J;
  b.static_block(3, 1) = I * p.J;
  return b;
}

inline FloquetMatrix floquet_matrix(const FloquetBlocks& b, int N, double omega) {
  require(N >= 1, "Floquet truncation N must be >= 1");
  FloquetMatrix f;
  f.N = N;
  f.delta_p = b.delta_p;
  f.frame = b.frame;
  f.omega = omega;
  const int H = 2 * N + 1;
  f.entries = Eigen::MatrixXcd::Zero(4 * H, 4 * H);
  const cplx I(0.0, 1.0);
  for (int a = 0; a < H; ++a) {
    const int n = a - N;
    f.entries.block<4, 4>(4 * a, 4 * a) =
        b.static_block + I * (omega + n * b.delta_p) * Eigen::Matrix4cd::Identity();
    if (a > 0) f.entries.block<4, 4>(4 * a, 4 * (a - 1)) = b.lower;
    if (a + 1 < H) f.entries.block<4, 4>(4 * a, 4 * (a + 1)) = b.upper;
  }
  return f;
}

inline FloquetMatrix floquet_matrix(const CircuitParams& p, const MeanFieldSolution& mf, int N,
                                    double omega) {
  return floquet_matrix(floquet_blocks(p, mf), N, omega);
}

/// Reflection S element a_L -> a_L at harmonic m of the truncated matrix:
/// S = K_ext M^-1 K + 1, K = sqrt(kappa) on L rows and sqrt(gamma) on R rows,
/// K_ext = sqrt(kappa) on L rows only.
inline cplx floquet_reflection(const FloquetMatrix& f, double kappa, int m) {
  require(std::abs(m) <= f.N, "probe harmonic outside the truncation window");
  const Eigen::Index idx = 4 * (f.N + m);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(f.dimension());
  rhs[idx] = std::sqrt(kappa);
  const Eigen::VectorXcd x = f.entries.partialPivLu().solve(rhs);
  return std::sqrt(kappa) * x[idx] + 1.0;
}

/// Probe offset split into harmonic index and residual frequency so that the
/// truncated window is centred on the frame.
struct HarmonicSplit {
  int m = 0;
  double omega = 0.0;
};

inline HarmonicSplit split_probe(const FloquetBlocks& b, double omega_probe) {
  const double off = omega_probe - b.frame;
  if (b.delta_p == 0.0) return {0, off};
  const int m = static_cast<int>(std::lround(off / b.delta_p));
  return {m, off - m * b.delta_p};
}

/// Complex reflection at absolute probe frequency (rad/s). Single-tone mean fields
/// use the static 4x4 block.
inline cplx floquet_response(const CircuitParams& p, const FloquetBlocks& b, double omega_probe, int N) {
  if (b.delta_p == 0.0) {
    const FloquetMatrix f = floquet_matrix(b, 1, omega_probe - b.frame);
    // Harmonics decouple; read the centre block only.
    Eigen::Matrix4cd m = f.entries.block<4, 4>(4, 4);
    Eigen::Vector4cd rhs = Eigen::Vector4cd::Zero();
    rhs[0] = std::sqrt(p.kappa);
    const Eigen::Vector4cd x = m.partialPivLu().solve(rhs);
    return std::sqrt(p.kappa) * x[0] + 1.0;
  }
  const HarmonicSplit s = split_probe(b, omega_probe);
  return floquet_reflection(floquet_matrix(b, N, s.omega), p.kappa, s.m);
}

inline double floquet_gain(const CircuitParams& p, const FloquetBlocks& b, double omega_probe, int N) {
  return std::norm(floquet_response(p, b, omega_probe, N));
}

/// Floquet exponents of the truncated problem (eigenvalues at omega = 0).
inline std::vector<cplx> floquet_exponents(const FloquetBlocks& b, int N) {
  const FloquetMatrix f = floquet_matrix(b, N, 0.0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(f.entries, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::solver, "Floquet eigen-solve failed");
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

inline double floquet_max_real(const FloquetBlocks& b, int N) {
  double m = -1e300;
  for (const auto& e : floquet_exponents(b, N)) m = std::max(m, e.real());
  return m;
}

}  // namespace dimerpa
