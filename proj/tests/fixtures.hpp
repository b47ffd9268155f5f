// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "dimerpa/dimerpa.hpp"

namespace dimerpa::testing {

/// Measured device (lossless, Kerr in Hz).
inline CircuitParams reference_circuit() {
  return {angular(Hz{8.299e9}), angular(Hz{8.368e9}), angular(Hz{95e6}), angular(Hz{44e6}), 0.0,
          angular(Hz{-2.9e3}),  angular(Hz{-3.2e3})};
}

inline double mhz(double omega) { return to_hz(omega).value / 1e6; }

/// Random balanced couplings with C_TMS - C_BS < 1 when `stable`.
inline EffectiveCouplings random_balanced(std::mt19937_64& rng, double kappa, bool stable = true) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (;;) {
    const double ct = u(rng), cb = u(rng), cs = u(rng);
    if (stable && ct - cb >= 0.95) continue;
    return balanced_couplings(kappa, ct, cb, cs);
  }
}

}  // namespace dimerpa::testing
