// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "dimerpa/errors.hpp"
#include "dimerpa/units.hpp"

namespace dimerpa {

using cplx = std::complex<double>;

/// Bare dimer circuit. All rates are angular (rad/s); Kerr is rad/s per photon.
struct CircuitParams {
  double omega_L = 0.0;
  double omega_R = 0.0;
  double J = 0.0;
  double kappa = 0.0;  // port coupling of the left resonator
  double gamma = 0.0;  // internal loss, attached to the right resonator
  double K_L = 0.0;
  double K_R = 0.0;

  /// Throws Error(invalid_argument). Kerr sign is only checked when
  /// `allow_zero_kerr` is false; linear limits are used throughout the tests.
  void validate(bool allow_zero_kerr = true) const {
    require(std::isfinite(omega_L) && std::isfinite(omega_R) && omega_L > 0.0,
            "resonance frequencies must be positive");
    require(omega_R >= omega_L, "convention omega_R >= omega_L violated");
    require(J > 0.0, "hopping J must be positive");
    require(kappa > 0.0, "kappa must be positive");
    require(gamma >= 0.0, "gamma must be non-negative");
    if (allow_zero_kerr) {
      require(K_L <= 0.0 && K_R <= 0.0, "Kerr coefficients must be negative");
    } else {
      require(K_L < 0.0 && K_R < 0.0, "Kerr coefficients must be negative");
    }
  }
};

struct HybridizedParams {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  double theta = 0.0;
  double K_aa = 0.0;
  double K_bb = 0.0;
  double K_ab = 0.0;
  double mu_minus = 0.0;  // stored, unused in linear response
  double mu_plus = 0.0;

  double kappa_eq() const { return 2.0 * kappa_a * kappa_b / (kappa_a + kappa_b); }
};

struct PumpTone {
  double frequency = 0.0;  // rad/s
  double power = 0.0;      // W at the device input
  double phase = 0.0;      // rad

  /// Input amplitude sqrt(P / hbar w) e^{i phase}, in sqrt(photons/s).
  cplx amplitude() const {
    require(power >= 0.0, "pump power must be non-negative");
    require(frequency > 0.0, "pump frequency must be positive");
    return std::polar(std::sqrt(power / (hbar * frequency)), phase);
  }
};

struct PumpConfig {
  PumpTone gain_tone;
  std::optional<PumpTone> conversion_tone;
  double attenuation_db = 0.0;

  void validate() const {
    if (conversion_tone) {
      require(conversion_tone->frequency != gain_tone.frequency,
              "conversion tone must differ in frequency from the gain tone");
    }
  }

  /// Tone as seen at the device after the line attenuation.
  static PumpTone at_device(PumpTone t, double attenuation_db) {
    t.power *= from_power_db(attenuation_db);
    return t;
  }
};

enum class Frame { single_pump, two_pump };

struct EffectiveCouplings {
  double delta_a = 0.0;
  double delta_b = 0.0;
  cplx lambda_S_a{};
  cplx lambda_S_b{};
  cplx lambda_TMS{};
  cplx lambda_BS{};
  double frame = 0.0;  // rotating-frame frequency w_o
  double omega_a_tilde = 0.0;
  double omega_b_tilde = 0.0;
};

struct Cooperativities {
  double C_TMS = 0.0;
  double C_BS = 0.0;
  double C_S_a = 0.0;
  double C_S_b = 0.0;
};

inline Cooperativities cooperativities(const EffectiveCouplings& c, double kappa) {
  require(kappa > 0.0, "kappa must be positive");
  auto coop = [kappa](cplx l) { return 4.0 * std::norm(l) / (kappa * kappa); };
  return {coop(c.lambda_TMS), coop(c.lambda_BS), coop(c.lambda_S_a), coop(c.lambda_S_b)};
}

struct MeanFieldSolution {
  cplx alpha_L_g{};
  cplx alpha_R_g{};
  cplx alpha_L_c{};
  cplx alpha_R_c{};
  double n_L = 0.0;
  double n_R = 0.0;
  double residual = 0.0;
  int branch_id = 0;
  bool near_fold = false;
  double omega_g = 0.0;  // pump frequencies the amplitudes refer to
  double omega_c = 0.0;  // 0 when only the gain tone is present

  bool two_tone() const { return omega_c > 0.0; }
  double n_total() const { return n_L + n_R; }

  void update_populations() {
    n_L = std::norm(alpha_L_g) + std::norm(alpha_L_c);
    n_R = std::norm(alpha_R_g) + std::norm(alpha_R_c);
  }
};

}  // namespace dimerpa
