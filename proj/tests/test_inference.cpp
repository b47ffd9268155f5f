// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

namespace dimerpa {
namespace {

using testing::reference_circuit;

std::vector<double> probe_grid(const CircuitParams& p, int per_mode) {
  const HybridizedParams h = hybridize(p);
  std::vector<double> w = linspace(h.omega_a - 3.0 * h.kappa_a, h.omega_a + 2.0 * h.kappa_a, per_mode);
  const auto b = linspace(h.omega_b - 3.0 * h.kappa_b, h.omega_b + 2.0 * h.kappa_b, per_mode);
  w.insert(w.end(), b.begin(), b.end());
  return w;
}

CircuitParams without_kerr(CircuitParams p) {
  p.K_L = p.K_R = 0.0;
  return p;
}

TEST(CircleFit, RecoversCircle) {
  std::vector<cplx> z;
  for (int i = 0; i < 50; ++i) z.push_back(cplx(0.3, -0.2) + 0.7 * std::polar(1.0, 0.1 * i));
  const Circle c = circle_fit(z);
  EXPECT_NEAR(c.center.real(), 0.3, 1e-12);
  EXPECT_NEAR(c.center.imag(), -0.2, 1e-12);
  EXPECT_NEAR(c.radius, 0.7, 1e-12);
  EXPECT_LT(c.rms, 1e-12);
  const std::vector<cplx> few{1.0, 2.0};
  EXPECT_THROW(circle_fit(few), Error);
}

TEST(LinearFit, RecoversCircuitFromLowPowerReflection) {
  const CircuitParams p = reference_circuit();
  const double pw[] = {-140.0};
  const auto d = synth_spectroscopy(p, pw, probe_grid(p, 40), 0.0, 1);
  CircuitParams guess = p;
  guess.omega_L += angular(Hz{2e6});
  guess.omega_R -= angular(Hz{2e6});
  guess.J *= 1.05;
  guess.kappa *= 0.9;
  const FitResult f = fit_linear(d, guess);
  EXPECT_NEAR(f.value("f_L"), to_hz(p.omega_L).value, 1e3);
  EXPECT_NEAR(f.value("f_R"), to_hz(p.omega_R).value, 1e3);
  EXPECT_NEAR(f.value("J"), to_hz(p.J).value, 1e3);
  EXPECT_NEAR(f.value("kappa"), to_hz(p.kappa).value, 1e3);
}

class KerrFit : public ::testing::Test {
 protected:
  CircuitParams p = reference_circuit();
  std::vector<double> powers{-120.0, -98.0, -91.0, -89.0};
};

TEST_F(KerrFit, NoiselessRoundTrip) {
  const auto d = synth_spectroscopy(p, powers, probe_grid(p, 15), 0.0, 1);
  const FitResult f = fit_kerr(d, without_kerr(p));
  EXPECT_NEAR(f.value("K_L"), to_hz(p.K_L).value, 1.0);
  EXPECT_NEAR(f.value("K_R"), to_hz(p.K_R).value, 1.0);
  EXPECT_LT(f.residual_rms, 1e-6);
}

TEST_F(KerrFit, GlobalPhaseDoesNotMatter) {
  auto d = synth_spectroscopy(p, powers, probe_grid(p, 15), 0.01, 5);
  const FitResult a = fit_kerr(d, without_kerr(p));
  for (auto& s : d) s.Gamma *= std::polar(1.0, 1.234);
  const FitResult b = fit_kerr(d, without_kerr(p));
  EXPECT_NEAR(a.value("K_L"), b.value("K_L"), 1e-3 * std::abs(a.value("K_L")));
  EXPECT_NEAR(a.value("K_R"), b.value("K_R"), 1e-3 * std::abs(a.value("K_R")));
}

// Oracle: brute-force cost grid around the truth.
TEST_F(KerrFit, AgreesWithGridSearch) {
  const double pw[] = {-98.0, -91.0};
  const auto d = synth_spectroscopy(p, pw, probe_grid(p, 8), 0.02, 7);
  const FitResult f = fit_kerr(d, without_kerr(p));
  auto cost = [&](double kl, double kr) {
    CircuitParams q = p;
    q.K_L = angular(Hz{kl});
    q.K_R = angular(Hz{kr});
    std::vector<cplx> m(d.size());
    cplx ov{};
    for (std::size_t i = 0; i < d.size(); ++i) {
      m[i] = spectroscopy_response(q, d[i].omega, d[i].power).Gamma;
      ov += std::conj(m[i]) * d[i].Gamma;
    }
    const cplx ph = ov / std::abs(ov);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += std::norm(ph * m[i] - d[i].Gamma);
    return s;
  };
  double best = 1e300, bl = 0.0, br = 0.0;
  for (double kl = -4000.0; kl <= -2000.0; kl += 100.0)
    for (double kr = -4200.0; kr <= -2200.0; kr += 100.0)
      if (const double c = cost(kl, kr); c < best) best = c, bl = kl, br = kr;
  EXPECT_LE(cost(f.value("K_L"), f.value("K_R")), best * (1.0 + 1e-9));
  EXPECT_NEAR(f.value("K_L"), bl, 150.0);
  EXPECT_NEAR(f.value("K_R"), br, 150.0);
}

TEST_F(KerrFit, VanishingKerrIsRecoveredAsZero) {
  const CircuitParams lin = without_kerr(p);
  const auto d = synth_spectroscopy(lin, powers, probe_grid(p, 10), 0.0, 1);
  const FitResult f = fit_kerr(d, lin);
  EXPECT_NEAR(f.value("K_L"), 0.0, 1.0);
  EXPECT_NEAR(f.value("K_R"), 0.0, 1.0);
}

TEST_F(KerrFit, LinearRegimeIsNotIdentifiable) {
  const double pw[] = {-160.0, -150.0};
  const auto d = synth_spectroscopy(p, pw, probe_grid(p, 10), 0.0, 1);
  KerrFitOptions o;
  o.starts = 2;
  EXPECT_TRUE(fit_kerr(d, without_kerr(p), o).flagged("non-identifiable"));
}

class AttenuationFit : public ::testing::Test {
 protected:
  CircuitParams p = reference_circuit();
  OperatingPoint ref = operate(p, watts(Dbm{-73.0}));
  std::vector<double> omega =
      linspace(ref.omega_b_tilde - 2.0 * hybridize(p).kappa_b, ref.omega_b_tilde + 2.0 * hybridize(p).kappa_b, 41);
};

TEST_F(AttenuationFit, NoiselessRoundTrip) {
  const double set[] = {-8.1, -6.6};
  const auto prof = synth_single_pump_profiles(p, ref.omega_g, set, -66.4, omega, 0.0, 2);
  const FitResult f = fit_attenuation(prof, p, ref.omega_g);
  EXPECT_NEAR(f.value("attenuation"), -66.4, 1e-4);
  EXPECT_FALSE(f.flagged("unidentifiable"));
}

TEST_F(AttenuationFit, VanishingPowerIsUnidentifiable) {
  const double set[] = {-100.0};
  const auto prof = synth_single_pump_profiles(p, ref.omega_g, set, -66.4, omega, 0.0, 2);
  EXPECT_TRUE(fit_attenuation(prof, p, ref.omega_g).flagged("unidentifiable"));
}

TEST(PumpFit, ZeroConversionMatchesSinglePump) {
  const CircuitParams p = reference_circuit();
  const double Pg = watts(Dbm{-74.0});
  const OperatingPoint op = operate(p, Pg);
  const auto w = linspace(op.omega_b_tilde - 3e7, op.omega_b_tilde + 3e7, 21);
  const auto a = double_pump_gain_db(p, Pg, 0.0, w);
  const auto b = single_pump_gain_db(p, op.omega_g, Pg, w);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-6);
}

TEST(PumpFit, NoiselessRoundTrip) {
  const CircuitParams p = reference_circuit();
  const OperatingPoint op = operate(p, watts(Dbm{-71.5}), watts(Dbm{-62.6}));
  const double kb = hybridize(p).kappa_b;
  const auto w = linspace(op.omega_b_tilde - 2.0 * kb, op.omega_b_tilde + 2.0 * kb, 31);
  const ProfileData d = synth_double_pump_profile(p, -71.5, -62.6, w, 0.0, 3);
  const FitResult f = fit_pump_powers(d, p, 0.0);
  EXPECT_NEAR(f.value("P_g"), -71.5, 1e-3);
  EXPECT_NEAR(f.value("P_c"), -62.6, 1e-2);
  EXPECT_NEAR(f.value("ratio_g_over_c"), std::pow(10.0, (-71.5 + 62.6) / 10.0), 1e-3);
}

class DephasingFit : public ::testing::Test {
 protected:
  DephasingModelParams m{two_pi * 0.51e6, 5300.0, two_pi * 2.54e6, two_pi * 8.06e9};
};

TEST_F(DephasingFit, HandValues) {
  EXPECT_EQ(dephasing_rate(m, 0.0, 0.0), 0.0);
  // One photon on resonance: kappa chi^2 / (kappa^2 + chi^2) = 0.0984 MHz.
  EXPECT_NEAR(to_hz(dephasing_rate(1.0, 0.0, m.chi, m.kappa_r)).value / 1e6, 0.0984, 5e-4);
  EXPECT_NEAR(readout_photons(0.01, 0.0, m.chi, m.c, m.kappa_r), 2.0 * m.c * 1e-4, 1e-12);
  EXPECT_NEAR(attenuation_from_c(m.c, m.omega_r, m.kappa_r), -112.48, 0.01);
}

TEST_F(DephasingFit, NoiselessRoundTrip) {
  const double V[] = {0.02, 0.04};
  const auto det = linspace(-two_pi * 8e6, two_pi * 8e6, 41);
  const auto d = synth_dephasing(m, V, det, 0.0, 1);
  const FitResult f = fit_dephasing(d, m.kappa_r, m.omega_r);
  EXPECT_NEAR(f.value("chi"), 0.51e6, 1.0);
  EXPECT_NEAR(f.value("c"), 5300.0, 1e-2);
  EXPECT_NEAR(f.value("attenuation"), attenuation_from_c(m.c, m.omega_r, m.kappa_r), 1e-6);
  EXPECT_FALSE(f.flagged("chi-c-degenerate"));
}

TEST_F(DephasingFit, SingleDetuningIsFlagged) {
  const double V[] = {0.02, 0.04, 0.06};
  const double det[] = {0.0};
  const auto d = synth_dephasing(m, V, det, 0.0, 1);
  EXPECT_TRUE(fit_dephasing(d, m.kappa_r, m.omega_r).flagged("chi-c-degenerate"));
}

}  // namespace
}  // namespace dimerpa
