// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded synthetic datasets for round-trip checks of the fits.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dimerpa/inference.hpp"

namespace dimerpa {

/// Reflection at each (power, frequency) with complex Gaussian noise of std `noise` per component.
inline std::vector<SpectroscopySample> synth_spectroscopy(const CircuitParams& p, std::span<const double> powers_dbm,
                                                          std::span<const double> omegas, double noise,
                                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<SpectroscopySample> out;
  for (double pd : powers_dbm)
    for (double w : omegas) {
      const double P = watts(Dbm{pd});
      cplx g = spectroscopy_response(p, w, P).Gamma;
      const double re = n(rng), im = n(rng);
      g += noise * cplx(re, im);
      out.push_back({P, w, g});
    }
  return out;
}

/// Single-pump profiles at set powers; gains get Gaussian noise in dB.
inline std::vector<ProfileData> synth_single_pump_profiles(const CircuitParams& p, double omega_g,
                                                           std::span<const double> set_dbm, double attenuation_db,
                                                           std::span<const double> omegas, double noise_db,
                                                           std::uint64_t seed, int N = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ProfileData> out;
  for (double s : set_dbm) {
    ProfileData d;
    d.power_dbm = s;
    d.omega.assign(omegas.begin(), omegas.end());
    d.gain_db = single_pump_gain_db(p, omega_g, watts(Dbm{s + attenuation_db}), omegas, N);
    for (double& g : d.gain_db) g += noise_db * n(rng);
    out.push_back(std::move(d));
  }
  return out;
}

inline ProfileData synth_double_pump_profile(const CircuitParams& p, double Pg_dbm, double Pc_dbm,
                                             std::span<const double> omegas, double noise_db, std::uint64_t seed,
                                             int N = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ProfileData d;
  d.power_dbm = Pg_dbm;
  d.conv_power_dbm = Pc_dbm;
  d.omega.assign(omegas.begin(), omegas.end());
  d.gain_db = double_pump_gain_db(p, watts(Dbm{Pg_dbm}), watts(Dbm{Pc_dbm}), omegas, N);
  for (double& g : d.gain_db) g += noise_db * n(rng);
  return d;
}

/// Dephasing rates on a (V, detuning) grid; additive Gaussian noise with std
/// `noise` times the largest clean rate.
inline std::vector<DephasingSample> synth_dephasing(const DephasingModelParams& m, std::span<const double> volts,
                                                    std::span<const double> detunings, double noise,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<DephasingSample> out;
  double top = 0.0;
  for (double v : volts)
    for (double d : detunings) {
      out.push_back({v, d, dephasing_rate(m, v, d)});
      top = std::max(top, out.back().Gamma_phi);
    }
  for (auto& s : out) s.Gamma_phi += noise * top * n(rng);
  return out;
}

}  // namespace dimerpa
