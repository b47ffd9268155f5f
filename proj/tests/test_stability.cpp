// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "fixtures.hpp"

namespace dimerpa {
namespace {

using testing::random_balanced;
using testing::reference_circuit;

// Greedy matching distance between two spectra.
double spectrum_distance(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0.0;
  for (const cplx& x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cplx u, cplx v) { return std::abs(u - x) < std::abs(v - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

std::vector<cplx> to_vec(const std::array<cplx, 4>& a) { return {a.begin(), a.end()}; }

// Heisenberg equations of the hybridized quadratic Hamiltonian in (a, a^dag, b, b^dag),
// written out independently of the library.
Eigen::Matrix4cd heisenberg(const EffectiveCouplings& c, double kappa) {
  const cplx I(0.0, 1.0);
  const cplx Sa = c.lambda_S_a, Sb = c.lambda_S_b, T = c.lambda_TMS, B = c.lambda_BS;
  Eigen::Matrix4cd m;
  // clang-format off
  m << I * c.delta_a - kappa / 2, -2.0 * I * Sa, -I * B, -I * T,
       2.0 * I * std::conj(Sa), -I * c.delta_a - kappa / 2, I * std::conj(T), I * std::conj(B),
       -I * std::conj(B), -I * T, I * c.delta_b - kappa / 2, -2.0 * I * Sb,
       I * std::conj(T), I * B, 2.0 * I * std::conj(Sb), -I * c.delta_b - kappa / 2;
  // clang-format on
  return m;
}

TEST(DriftMatrix, UnpumpedIsScaledIdentity) {
  const DriftMatrix dm = drift_matrix(EffectiveCouplings{}, 3.0);
  EXPECT_TRUE(dm.entries.isApprox(-1.5 * Eigen::Matrix4d::Identity()));
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(dm.entries(i, i), -1.5);
}

TEST(DriftMatrix, TwoModeSqueezingTranscription) {
  EffectiveCouplings c;
  c.lambda_TMS = 0.3;
  const DriftMatrix dm = drift_matrix(c, 1.0);
  Eigen::Matrix4d e = -0.5 * Eigen::Matrix4d::Identity();
  e(0, 3) = e(1, 2) = e(2, 1) = e(3, 0) = 0.3;
  EXPECT_TRUE(dm.entries.isApprox(e, 1e-15));
}

TEST(DriftMatrix, RealAndComplexPathsAgree) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    EffectiveCouplings c;
    c.delta_a = n(rng), c.delta_b = n(rng);
    c.lambda_S_a = n(rng), c.lambda_S_b = n(rng), c.lambda_TMS = n(rng), c.lambda_BS = n(rng);
    const Eigen::Matrix4d lit = drift_matrix(c, 1.0).entries;
    const cplx B = -c.lambda_BS;
    const Eigen::Matrix4d via = realify(bogoliubov_matrix(c, 1.0, 1.0, B, std::conj(B)));
    EXPECT_TRUE(lit.isApprox(via, 1e-12));
  }
}

TEST(DriftMatrix, SpectrumMatchesComplexBogoliubovConstruction) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    EffectiveCouplings c;
    c.delta_a = n(rng), c.delta_b = n(rng);
    c.lambda_S_a = {n(rng), n(rng)};
    c.lambda_S_b = {n(rng), n(rng)};
    c.lambda_TMS = {n(rng), n(rng)};
    c.lambda_BS = {n(rng), n(rng)};
    if (i % 2 == 0) {  // real couplings go through the literal matrix
      c.lambda_S_a = c.lambda_S_a.real(), c.lambda_S_b = c.lambda_S_b.real();
      c.lambda_TMS = c.lambda_TMS.real(), c.lambda_BS = c.lambda_BS.real();
    }
    const auto lib = to_vec(eigenvalues(drift_matrix(c, 1.3)));
    const Eigen::Vector4cd ref = Eigen::ComplexEigenSolver<Eigen::Matrix4cd>(heisenberg(c, 1.3)).eigenvalues();
    const std::vector<cplx> rv(ref.data(), ref.data() + 4);
    double scale = 0.0;
    for (cplx z : rv) scale = std::max(scale, std::abs(z));
    EXPECT_LT(spectrum_distance(lib, rv), 1e-8 * scale) << "case " << i;
  }
}

TEST(DriftMatrix, SpectrumClosedUnderConjugation) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    EffectiveCouplings c;
    c.delta_a = n(rng), c.delta_b = n(rng);
    c.lambda_S_a = {n(rng), n(rng)};
    c.lambda_TMS = {n(rng), n(rng)};
    c.lambda_BS = {n(rng), n(rng)};
    const auto ev = to_vec(eigenvalues(drift_matrix(c, 1.0)));
    std::vector<cplx> conj;
    for (cplx z : ev) conj.push_back(std::conj(z));
    EXPECT_LT(spectrum_distance(ev, conj), 1e-9);
  }
}

TEST(ClosedForm, EigenvalueExamples) {
  const double k = 2.0;
  for (cplx e : eigenvalues_closed_form(0.7, 0.7, k)) EXPECT_NEAR(std::abs(e - cplx(-1.0, 0.0)), 0.0, 1e-15);
  const auto bp = eigenvalues_closed_form(0.5, 1.5, k);
  for (cplx e : bp) {
    EXPECT_NEAR(e.real(), -1.0, 1e-15);
    EXPECT_NEAR(std::abs(e.imag()), 1.0, 1e-15);
  }
  const auto un = eigenvalues_closed_form(4.0, 0.0, k);
  EXPECT_NEAR(un[2].real(), 1.0, 1e-15);
}

TEST(ClosedForm, MatchesNumericOnRandomBalanced) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const EffectiveCouplings c = random_balanced(rng, 1.0, false);
    const Cooperativities co = cooperativities(c, 1.0);
    const auto cf = to_vec(eigenvalues_closed_form(co.C_TMS, co.C_BS, 1.0));
    const auto nm = to_vec(eigenvalues(drift_matrix(c, 1.0)));
    double scale = 0.0;
    for (cplx z : cf) scale = std::max(scale, std::abs(z));
    EXPECT_LT(spectrum_distance(nm, cf), 1e-8 * scale);
  }
}

TEST(Classify, Examples) {
  const double k = 1.0;
  const EffectiveCouplings off{};
  StabilityReport r = classify(drift_matrix(off, k), off);
  EXPECT_NE(r.classification, Classification::unstable);
  for (cplx e : r.eigenvalues) EXPECT_NEAR(std::abs(e + 0.5), 0.0, 1e-15);

  const EffectiveCouplings half = balanced_couplings(k, 1.0, 0.5, 0.25);
  r = classify(drift_matrix(half, k), half);
  EXPECT_EQ(r.classification, Classification::stable);
  EXPECT_TRUE(r.balanced);
  double lo = 1e9, hi = -1e9;
  for (cplx e : r.eigenvalues) {
    EXPECT_NEAR(e.imag(), 0.0, 1e-9);
    lo = std::min(lo, e.real());
    hi = std::max(hi, e.real());
  }
  EXPECT_NEAR(hi - lo, std::sqrt(0.5), 1e-9);

  const EffectiveCouplings over = balanced_couplings(k, 1.21, 0.0, 0.3);
  EXPECT_EQ(classify(drift_matrix(over, k), over).classification, Classification::unstable);

  const EffectiveCouplings ep = balanced_couplings(k, 0.58, 0.58, 0.145);
  EXPECT_EQ(classify(drift_matrix(ep, k), ep).classification, Classification::EP);
  const EffectiveCouplings bp = balanced_couplings(k, 1.42, 2.42, 0.355);
  EXPECT_EQ(classify(drift_matrix(bp, k), bp).classification, Classification::BP);
}

TEST(Classify, ExceptionalPointsNeedBalance) {
  EffectiveCouplings c = balanced_couplings(1.0, 0.58, 0.58, 0.145);
  c.delta_a *= 1.1;
  const StabilityReport r = classify(drift_matrix(c, 1.0), c);
  EXPECT_FALSE(r.balanced);
  EXPECT_EQ(r.classification, Classification::stable);
}

TEST(Classify, InstabilityOnsetAtUnitGap) {
  EXPECT_NEAR(instability_onset(1.0), 1.0, 1e-9);
  EXPECT_NEAR(instability_onset(3.0), 1.0, 1e-9);
}

TEST(SinglePortVariant, DiagonalAndUnpumpedStability) {
  const DriftMatrix dm = drift_matrix(EffectiveCouplings{}, 2.0, DriftVariant::single_port);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(dm.entries(i, i), -0.5, 1e-15);
  for (cplx e : eigenvalues(dm)) EXPECT_LE(e.real(), 1e-12);
}

TEST(Floquet, RejectsZeroTruncation) {
  const CircuitParams p = reference_circuit();
  MeanFieldSolution m;
  m.omega_g = p.omega_L;
  m.omega_c = p.omega_R;
  EXPECT_THROW(floquet_matrix(p, m, 0, 0.0), Error);
}

TEST(Floquet, UnpumpedIsBlockDiagonalLinearResolvent) {
  const CircuitParams p = reference_circuit();
  MeanFieldSolution m;
  m.omega_g = 0.5 * (p.omega_L + p.omega_R);
  m.omega_c = m.omega_g - 2.0 * p.J;
  const double w = 0.3 * p.kappa;
  const FloquetMatrix f = floquet_matrix(p, m, 2, w);
  ASSERT_EQ(f.dimension(), 20);
  const cplx I(0.0, 1.0);
  const double frame = 0.5 * (m.omega_g + m.omega_c);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const Eigen::Matrix4cd blk = f.entries.block<4, 4>(4 * a, 4 * b);
      if (a != b) {
        EXPECT_EQ(blk.norm(), 0.0);
        continue;
      }
      const double s = w + (a - 2) * (m.omega_g - m.omega_c);
      Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
      e(0, 0) = I * (frame - p.omega_L + s) - p.kappa / 2.0;
      e(1, 1) = -I * (frame - p.omega_L - s) - p.kappa / 2.0;
      e(2, 2) = I * (frame - p.omega_R + s) - p.gamma / 2.0;
      e(3, 3) = -I * (frame - p.omega_R - s) - p.gamma / 2.0;
      e(0, 2) = e(2, 0) = -I * p.J;
      e(1, 3) = e(3, 1) = I * p.J;
      EXPECT_LT((blk - e).norm(), 1e-6 * p.kappa);
    }
}

TEST(Floquet, SinglePumpStaticBlockFromLinearizedKerr) {
  CircuitParams p = reference_circuit();
  p.gamma = angular(Hz{1e6});
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 50.0);
  const cplx I(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    MeanFieldSolution m;
    m.alpha_L_g = {n(rng), n(rng)};
    m.alpha_R_g = {n(rng), n(rng)};
    m.omega_g = p.omega_L + n(rng) * 1e5;
    m.update_populations();
    const FloquetBlocks b = floquet_blocks(p, m);
    EXPECT_EQ(b.lower.norm(), 0.0);
    EXPECT_EQ(b.upper.norm(), 0.0);
    const double dL = m.omega_g - p.omega_L - 2.0 * p.K_L * m.n_L;
    const double dR = m.omega_g - p.omega_R - 2.0 * p.K_R * m.n_R;
    Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
    e(0, 0) = I * dL - p.kappa / 2.0;
    e(0, 1) = -I * p.K_L * m.alpha_L_g * m.alpha_L_g;
    e(0, 2) = -I * p.J;
    e(1, 1) = std::conj(e(0, 0));
    e(1, 0) = std::conj(e(0, 1));
    e(1, 3) = I * p.J;
    e(2, 2) = I * dR - p.gamma / 2.0;
    e(2, 3) = -I * p.K_R * m.alpha_R_g * m.alpha_R_g;
    e(2, 0) = -I * p.J;
    e(3, 3) = std::conj(e(2, 2));
    e(3, 2) = std::conj(e(2, 3));
    e(3, 1) = I * p.J;
    EXPECT_LT((b.static_block - e).norm(), 1e-9 * e.norm());
  }
}

TEST(Floquet, SpectrumConvergesWithTruncation) {
  const CircuitParams p = reference_circuit();
  const OperatingPoint op = operate(p, watts(Dbm{-72.79}), watts(Dbm{-82.79}));
  ASSERT_TRUE(op.converged);
  const FloquetBlocks b = floquet_blocks(p, op.mf);
  const double m2 = floquet_max_real(b, 2);
  const double m3 = floquet_max_real(b, 3);
  EXPECT_LT(std::abs(m2 - m3), 1e-6 * p.kappa);
}

}  // namespace
}  // namespace dimerpa
