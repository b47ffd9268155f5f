// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "dimerpa/errors.hpp"

namespace dimerpa {

/// Evaluate sum c[k] x^k (ascending coefficients) with Horner.
template <class T, class C>
T polyval(std::span<const C> c, T x) {
  T acc{0};
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + T(c[k]);
  return acc;
}

/// All complex roots of a real polynomial with ascending coefficients.
/// Companion-matrix eigenvalues (complex Schur), then Newton polish in long double.
inline std::vector<std::complex<double>> poly_roots(std::span<const double> coeffs) {
  std::size_t n = coeffs.size();
  while (n > 0 && coeffs[n - 1] == 0.0) --n;
  require(n >= 1, "zero polynomial");
  const std::size_t deg = n - 1;
  std::vector<std::complex<double>> roots;
  if (deg == 0) return roots;

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  const double lead = coeffs[deg];
  for (std::size_t i = 0; i < deg; ++i) comp(0, i) = -coeffs[deg - 1 - i] / lead;
  for (std::size_t i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::solver, "companion eigen-solve failed");

  std::vector<long double> cl(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<long double> dl(deg);
  for (std::size_t k = 1; k <= deg; ++k) dl[k - 1] = cl[k] * static_cast<long double>(k);

  roots.reserve(deg);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    using CL = std::complex<long double>;
    CL z(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    for (int it = 0; it < 8; ++it) {
      const CL f = polyval<CL, long double>(cl, z);
      const CL df = polyval<CL, long double>(dl, z);
      if (std::abs(df) == 0.0L) break;
      const CL step = f / df;
      z -= step;
      if (std::abs(step) <= 1e-18L * (1.0L + std::abs(z))) break;
    }
    roots.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  }
  return roots;
}

}  // namespace dimerpa
