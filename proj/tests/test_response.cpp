// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "fixtures.hpp"

namespace dimerpa {
namespace {

using testing::random_balanced;
using testing::reference_circuit;

Eigen::Matrix4d symplectic_form() {
  Eigen::Matrix4d o = Eigen::Matrix4d::Zero();
  o(0, 1) = o(2, 3) = 1.0;
  o(1, 0) = o(3, 2) = -1.0;
  return o;
}

TEST(Scattering, UnpumpedZeroFrequencyIsMinusIdentity) {
  const DriftMatrix dm = drift_matrix(EffectiveCouplings{}, 1.7);
  EXPECT_TRUE(scattering_quadrature(dm, 0.0).isApprox(-Eigen::Matrix4cd::Identity(), 1e-14));
}

// Hand-coded zero-frequency elements of the balanced model.
TEST(Scattering, ZeroFrequencyMatchesClosedFormElements) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const EffectiveCouplings c = random_balanced(rng, 1.0);
    const Cooperativities co = cooperativities(c, 1.0);
    const double ct = co.C_TMS, cb = co.C_BS, cs = co.C_S_a;
    const double d = 1.0 + cb - ct;
    const double s11 = (-1.0 + cb - ct) / d;
    const double s14 = 2.0 * (std::sqrt(cb) - std::sqrt(ct)) / d;
    const double s23 = -2.0 * (std::sqrt(cb) + std::sqrt(ct)) / d;
    const double s24 = 16.0 * std::sqrt(cs) * std::sqrt(ct) / (d * d);
    const double s21 = 8.0 * std::sqrt(cs) * (1.0 + std::pow(std::sqrt(cb) + std::sqrt(ct), 2)) / (d * d);
    const double s34 = 8.0 * std::sqrt(cs) * (1.0 + std::pow(std::sqrt(cb) - std::sqrt(ct), 2)) / (d * d);
    Eigen::Matrix4d e;
    // clang-format off
    e << s11, 0,   0,   s14,
         s21, s11, s23, s24,
         s24, s14, s11, s34,
         s23, 0,   0,   s11;
    // clang-format on
    const Eigen::Matrix4cd s = scattering_quadrature(drift_matrix(c, 1.0), 0.0);
    EXPECT_LT(s.imag().norm(), 1e-12 * e.norm());
    EXPECT_LT((s.real() - e).norm(), 1e-9 * e.norm()) << "C_TMS " << ct << " C_BS " << cb;
    EXPECT_NEAR(std::norm(s(1, 0)), gain_zero_freq_closed_form(cs, ct, cb), 1e-9 * std::norm(s(1, 0)));
  }
}

TEST(Scattering, SymplecticAtZeroFrequency) {
  std::mt19937_64 rng(22);
  const Eigen::Matrix4d om = symplectic_form();
  for (int i = 0; i < 300; ++i) {
    const EffectiveCouplings c = random_balanced(rng, 1.0);
    const Eigen::Matrix4d s = scattering_quadrature(drift_matrix(c, 1.0), 0.0).real();
    EXPECT_LT((s * om * s.transpose() - om).norm(), 1e-9 * std::max(1.0, s.squaredNorm()));
    EXPECT_NEAR(s(0, 0) * s(0, 0) - s(0, 3) * s(1, 2), 1.0, 1e-9 * std::max(1.0, s.squaredNorm()));
  }
}

TEST(Scattering, UnpumpedIsPassiveAtAllFrequencies) {
  const DriftMatrix dm = drift_matrix(EffectiveCouplings{}, 1.0);
  for (double w = -5.0; w <= 5.0; w += 0.01) {
    const Eigen::Matrix4cd s = scattering_quadrature(dm, w);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s(i, i)), 1.0, 1e-12);
  }
}

TEST(ClosedFormGain, Examples) {
  EXPECT_EQ(gain_zero_freq_closed_form(0.0, 0.3, 0.2), 0.0);
  EXPECT_NEAR(gain_zero_freq_closed_form(0.29, 0.58, 0.58), 204.6, 0.05);
  EXPECT_NEAR(power_db(gain_zero_freq_closed_form(0.29, 0.58, 0.58)), 23.1, 0.05);
  // C_S = C_TMS / 4 gives the 20 dB pair quoted for the EP/BP comparison.
  EXPECT_NEAR(power_db(gain_zero_freq_closed_form(0.145, 0.58, 0.58)), 20.0, 0.15);
  EXPECT_NEAR(power_db(gain_zero_freq_closed_form(0.355, 1.42, 2.42)), 20.0, 0.25);
  EXPECT_DOUBLE_EQ(gain_single_pump_closed_form(0.0), 1.0);
  EXPECT_DOUBLE_EQ(gain_single_pump_closed_form(0.5), 9.0);
  EXPECT_THROW(gain_zero_freq_closed_form(0.1, 1.5, 0.4), Error);
  EXPECT_THROW(gain_single_pump_closed_form(1.0), Error);
}

TEST(ClosedFormGain, ExceptionalPointResolvent) {
  const EffectiveCouplings c = balanced_couplings(1.0, 0.58, 0.58, 0.29);
  const double g = std::norm(scattering_quadrature(drift_matrix(c, 1.0), 0.0)(1, 0));
  EXPECT_NEAR(g, gain_zero_freq_closed_form(0.29, 0.58, 0.58), 1e-9 * g);
}

TEST(Profile, BandwidthAndPeakBookkeeping) {
  std::vector<double> grid = linspace(-2.0, 2.0, 4001);
  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) g[i] = 100.0 / (1.0 + grid[i] * grid[i] / 0.01);  // FWHM 0.2
  const GainProfile p = make_profile(grid, g, "test");
  EXPECT_DOUBLE_EQ(p.G0, 100.0);
  EXPECT_NEAR(p.f_peak, 0.0, 1e-12);
  EXPECT_NEAR(p.bandwidth_3db, 0.2, 1e-5);
  EXPECT_EQ(p.peak_count, 1);
  EXPECT_FALSE(p.bandwidth_truncated);

  for (std::size_t i = 0; i < grid.size(); ++i)
    g[i] = 50.0 / (1.0 + std::pow(grid[i] - 0.3, 2) / 0.01) + 50.0 / (1.0 + std::pow(grid[i] + 0.3, 2) / 0.01);
  EXPECT_EQ(make_profile(grid, g, "test").peak_count, 2);
}

TEST(Profile, BandwidthIsRefinementInvariant) {
  ScanOptions coarse, fine;
  coarse.points = 1201;  // spacing kappa / 200
  fine.points = 4801;
  for (AmpMode m : {AmpMode::SP, AmpMode::EP, AmpMode::BP}) {
    const double ct = m == AmpMode::SP ? 0.8 : (m == AmpMode::EP ? 0.5 : 1.3);
    const double a = family_profile(m, ct, 1.0, coarse).bandwidth_3db;
    const double b = family_profile(m, ct, 1.0, fine).bandwidth_3db;
    EXPECT_NEAR(a, b, 0.01 * b) << to_string(m);
  }
}

TEST(FloquetProfile, UnpumpedIsUnimodular) {
  const CircuitParams p = reference_circuit();
  const HybridizedParams h = hybridize(p);
  MeanFieldSolution single;
  single.omega_g = 0.5 * (h.omega_a + h.omega_b);
  MeanFieldSolution two = single;
  two.omega_c = single.omega_g + h.omega_a - h.omega_b;
  const auto grid = linspace(h.omega_a - 5.0 * p.kappa, h.omega_b + 5.0 * p.kappa, 801);
  for (const auto& m : {single, two}) {
    const GainProfile g = gain_profile_floquet(p, m, grid, 2);
    for (double v : g.gain) EXPECT_NEAR(v, 1.0, 1e-12);
  }
}

// Expected: peak moves up with power. The mean-field model red-shifts both modes and the
// peak follows them down, so this stays red.
TEST(FloquetProfile, SinglePumpPeakMovesUpWithPower) {
  const CircuitParams p = reference_circuit();
  const HybridizedParams h = hybridize(p);
  const OperatingPoint ref = operate(p, watts(Dbm{-73.0}));
  const auto grid = linspace(ref.omega_b_tilde - 2.0 * h.kappa_b, ref.omega_b_tilde + 2.0 * h.kappa_b, 801);
  double prev = -1e300;
  for (double d : {-75.0, -74.5, -74.0, -73.5}) {
    const MeanFieldSolution mf = select_branch(solve_single_pump(p, PumpTone{ref.omega_g, watts(Dbm{d}), 0.0}));
    const double f = gain_profile_floquet(p, mf, grid, 2).f_peak;
    EXPECT_GT(f, prev) << d;
    prev = f;
  }
}

TEST(FloquetProfile, SinglePumpGainGrowsWithPower) {
  const CircuitParams p = reference_circuit();
  const HybridizedParams h = hybridize(p);
  const OperatingPoint ref = operate(p, watts(Dbm{-73.0}));
  const auto grid = linspace(ref.omega_b_tilde - 2.0 * h.kappa_b, ref.omega_b_tilde + 2.0 * h.kappa_b, 801);
  double prev = 0.0;
  for (double d : {-76.0, -75.0, -74.0, -73.0}) {
    const MeanFieldSolution mf = select_branch(solve_single_pump(p, PumpTone{ref.omega_g, watts(Dbm{d}), 0.0}));
    const double g0 = gain_profile_floquet(p, mf, grid, 2).G0;
    EXPECT_GT(g0, prev) << d;
    prev = g0;
  }
}

TEST(PhaseSensitive, UnpumpedIsUnity) {
  const PhaseSensitiveGain g = phase_sensitive_gain(drift_matrix(EffectiveCouplings{}, 1.0), 0.0);
  EXPECT_NEAR(g.G_max, 1.0, 1e-14);
  EXPECT_NEAR(g.G_min, 1.0, 1e-14);
  EXPECT_NEAR(g.modulation, 1.0, 1e-13);
}

TEST(PhaseSensitive, PureSqueezerIsMinimumUncertainty) {
  for (double s : {0.05, 0.1, 0.2, 0.24}) {
    EffectiveCouplings c;
    c.lambda_S_b = s;
    const PhaseSensitiveGain g = phase_sensitive_gain(drift_matrix(c, 1.0), 0.0, 1);
    EXPECT_NEAR(g.G_max * g.G_min, 1.0, 1e-6);
    EXPECT_GT(g.modulation, 1.0);
  }
}

TEST(PhaseSensitive, BogoliubovPointModulation) {
  const double t[] = {20.0};
  const GbwPoint bp = gbw_scan(AmpMode::BP, t, 1.0)[0];
  ASSERT_TRUE(bp.reachable);
  const FamilyPoint f = family_point(AmpMode::BP, bp.control);
  const PhaseSensitiveGain g =
      phase_sensitive_gain(drift_matrix(balanced_couplings(1.0, f.C_TMS, f.C_BS, f.C_S), 1.0), 0.0, 0);
  EXPECT_GT(power_db(g.modulation), 30.0);
}

}  // namespace
}  // namespace dimerpa
