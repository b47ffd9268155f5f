// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace dimerpa {

inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Thin wrappers for values that cross the Hz / dBm boundary of the toolkit.
struct Hz {
  double value = 0.0;
};

struct Dbm {
  double value = 0.0;
};

constexpr double angular(Hz f) { return two_pi * f.value; }
constexpr Hz to_hz(double omega) { return Hz{omega / two_pi}; }

inline double watts(Dbm p) { return 1e-3 * std::pow(10.0, p.value / 10.0); }
inline Dbm to_dbm(double watts) { return Dbm{10.0 * std::log10(watts / 1e-3)}; }

// Power ratios use 10 log10, amplitude ratios 20 log10.
inline double power_db(double ratio) { return 10.0 * std::log10(ratio); }
inline double amplitude_db(double ratio) { return 20.0 * std::log10(ratio); }
inline double from_power_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace dimerpa
