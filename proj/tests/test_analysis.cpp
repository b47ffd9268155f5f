// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace dimerpa {
namespace {

using testing::reference_circuit;

TEST(EigenSweep, Examples) {
  const double gaps[] = {-1.0, -0.5, 0.0, 0.5, 1.2};
  const auto rows = eigenvalue_sweep(1.0, gaps);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[2].classification, Classification::EP);
  EXPECT_EQ(rows[4].classification, Classification::unstable);
  EXPECT_EQ(rows[0].classification, Classification::BP);
  for (int i : {1, 3}) EXPECT_EQ(rows[static_cast<std::size_t>(i)].classification, Classification::stable) << i;
  for (const auto& r : rows) {
    const auto cf = eigenvalues_closed_form(r.C_TMS, r.C_BS, 1.0);
    for (cplx e : r.eigenvalues) {
      double best = 1e300;
      for (cplx f : cf) best = std::min(best, std::abs(e - f));
      EXPECT_LT(best, 1e-6) << "gap " << r.gap;
    }
  }
  EXPECT_NEAR(instability_onset(1.0), 1.0, 1e-9);
  EXPECT_NEAR(instability_onset(3.0), 1.0, 1e-9);
}

TEST(AmpModeNames, RoundTrip) {
  for (AmpMode m : {AmpMode::SP, AmpMode::EP, AmpMode::BP}) EXPECT_EQ(amp_mode_from_string(to_string(m)), m);
  try {
    amp_mode_from_string("XX");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(GainBandwidth, SinglePumpProductIsConstant) {
  const double t[] = {10.0, 15.0, 20.0, 25.0};
  const auto pts = gbw_scan(AmpMode::SP, t, 1.0);
  double lo = 1e300, hi = 0.0;
  for (const auto& p : pts) {
    ASSERT_TRUE(p.reachable);
    EXPECT_NEAR(p.G0_db, p.target_db, 0.01);
    const double prod = p.bandwidth * std::pow(10.0, p.G0_db / 20.0);
    lo = std::min(lo, prod);
    hi = std::max(hi, prod);
  }
  EXPECT_LT(hi / lo - 1.0, 0.15);
  EXPECT_NEAR(pts[2].bandwidth, 0.1, 0.01);  // kappa / sqrt(G)
}

TEST(GainBandwidth, BogoliubovBandwidthStaysNearKappa) {
  const double t[] = {10.0, 15.0, 20.0, 25.0};
  const auto pts = gbw_scan(AmpMode::BP, t, 1.0);
  for (const auto& p : pts) {
    ASSERT_TRUE(p.reachable);
    EXPECT_GE(p.bandwidth, 0.8);
    EXPECT_LE(p.bandwidth, 1.2);
    EXPECT_NEAR(p.gap, -1.0, 1e-12);
  }
  EXPECT_GE(pts[3].bandwidth / pts[0].bandwidth, 0.7);
}

TEST(GainBandwidth, ExceptionalPointBandwidthSaturates) {
  const double t[] = {15.0, 25.0};
  const auto pts = gbw_scan(AmpMode::EP, t, 1.0);
  EXPECT_NEAR(pts[1].bandwidth / pts[0].bandwidth, 1.0, 0.05);
  EXPECT_LT(pts[1].bandwidth, 0.5);
}

TEST(GainBandwidth, UnreachableTargetIsFlagged) {
  ScanOptions o;
  o.points = 401;
  const double t[] = {250.0};
  const auto pts = gbw_scan(AmpMode::SP, t, 1.0, o);
  EXPECT_FALSE(pts[0].reachable);
  EXPECT_FALSE(pts[0].message.empty());
}

TEST(TuneToBp, ZeroTargetLeavesPumpsOff) {
  const TuneResult r = tune_to_bp(SymmetricPumpModel{}, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.P_g, 0.0);
  EXPECT_EQ(r.P_c, 0.0);
}

TEST(TuneToBp, DeterministicAndWideband) {
  const SymmetricPumpModel m;
  const TuneResult a = tune_to_bp(m, 20.0);
  const TuneResult b = tune_to_bp(m, 20.0);
  ASSERT_TRUE(a.converged) << a.message;
  EXPECT_EQ(a.P_g, b.P_g);
  EXPECT_EQ(a.P_c, b.P_c);
  EXPECT_EQ(a.evaluations, b.evaluations);
  EXPECT_NEAR(a.G0_db, 20.0, 0.1);
  EXPECT_GE(a.bandwidth, 0.8);
  EXPECT_EQ(a.peak_count, 1);
}

// Oracle: dense ratio grid, P_g solved by plain bisection at each ratio.
TEST(TuneToBp, OptimumMatchesDenseRatioScan) {
  const SymmetricPumpModel m;
  const TuneResult r = tune_to_bp(m, 20.0);
  ASSERT_TRUE(r.converged);
  double best = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double ratio = std::pow(10.0, -1.5 + 2.0 * i / 40.0);
    auto g = [&](double lp) {
      const TuneEvaluation e = m(std::pow(10.0, lp), ratio * std::pow(10.0, lp));
      return e.stable ? power_db(e.profile.G0) - 20.0 : 1e300;
    };
    double lo = -4.0, hi = lo;
    while (g(hi) < 0.0 && hi < 1.0) hi += 0.05;
    if (g(hi) < 0.0) continue;
    lo = hi - 0.05;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const TuneEvaluation e = m(std::pow(10.0, lo), ratio * std::pow(10.0, lo));
    if (e.stable && std::abs(power_db(e.profile.G0) - 20.0) < 0.1) {
      const double obj = e.profile.bandwidth_3db * (e.profile.peak_count > 1 ? 0.5 : 1.0);
      best = std::max(best, obj);
    }
  }
  EXPECT_GT(best, 0.0);
  EXPECT_GE(r.bandwidth, 0.99 * best);
}

// The bandwidth optimum of the symmetric pump map sits below the gap -1 line and drifts with gain.
TEST(TuneToBp, OptimumSitsAtUnitNegativeGap) {
  const TuneResult r = tune_to_bp(SymmetricPumpModel{}, 20.0);
  EXPECT_LE(std::abs(r.gap + 1.0), 0.15) << "gap " << r.gap;
}

TEST(TuneToBp, PumpRatioIsGainIndependent) {
  double lo = 1e300, hi = 0.0;
  for (double t : {10.0, 15.0, 20.0, 25.0}) {
    const TuneResult r = tune_to_bp(SymmetricPumpModel{}, t);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  EXPECT_LT(hi / lo - 1.0, 0.2);
}

TEST(Device, RecenteringConverges) {
  const CircuitParams p = reference_circuit();
  const OperatingPoint sp = operate(p, watts(Dbm{-73.0}));
  EXPECT_TRUE(sp.converged);
  EXPECT_LE(sp.iterations, 20);
  EXPECT_FALSE(sp.two_tone());
  const OperatingPoint dp = operate(p, watts(Dbm{-72.79}), watts(Dbm{-82.79}));
  EXPECT_TRUE(dp.converged);
  EXPECT_LE(dp.iterations, 20);
  EXPECT_NEAR(dp.omega_c - dp.omega_g, dp.omega_a_tilde - dp.omega_b_tilde, 1e-6 * p.kappa);
  EXPECT_NEAR(dp.omega_g, 0.5 * (dp.omega_a_tilde + dp.omega_b_tilde), 1e-6 * p.kappa);
}

TEST(Device, SinglePumpGainBandwidthProduct) {
  const CircuitParams p = reference_circuit();
  const double keq = hybridize(p).kappa_eq();
  const double t[] = {10.0, 20.0};
  for (const auto& g : gbw_scan_device(p, t)) {
    ASSERT_TRUE(g.reachable) << g.message;
    EXPECT_NEAR(g.G0_db, g.target_db, 0.05);
    EXPECT_NEAR(g.bandwidth * std::pow(10.0, g.G0_db / 20.0), keq, angular(Hz{4e6}));
  }
}

TEST(Device, PeaksCoalesceAsConversionPowerRises) {
  const CircuitParams p = reference_circuit();
  std::vector<double> pc;
  for (double d = -68.0; d <= -64.0 + 1e-9; d += 0.5) pc.push_back(watts(Dbm{d}));
  const auto rows = coalescence_sweep(p, watts(Dbm{-76.0}), pc);
  const auto i = coalescence_index(rows);
  ASSERT_TRUE(i.has_value());
  EXPECT_NEAR(to_dbm(rows[*i].P_c).value, -66.0, 1.0);
  for (const auto& r : rows) EXPECT_TRUE(r.converged);
}

}  // namespace
}  // namespace dimerpa
