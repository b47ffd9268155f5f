// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Spectrum of a real 4x4 matrix through its characteristic polynomial in
// __float128. Built for drift matrices, whose shifted part is Hamiltonian
// (spectrum symmetric under x -> -x) and often defective.

#include <quadmath.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <complex>

namespace dimerpa {
namespace detail {

using quad = __float128;

struct qc {
  quad re = 0;
  quad im = 0;
};

inline qc operator+(qc a, qc b) { return {a.re + b.re, a.im + b.im}; }
inline qc operator-(qc a, qc b) { return {a.re - b.re, a.im - b.im}; }
inline qc operator*(qc a, qc b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline qc operator/(qc a, qc b) {
  const quad d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline quad qabs(qc a) { return hypotq(a.re, a.im); }

inline qc qsqrt(qc a) {
  if (a.re == 0 && a.im == 0) return {};
  const quad r = hypotq(a.re, a.im);
  if (a.re >= 0) {
    const quad u = sqrtq((r + a.re) / 2);
    return {u, a.im / (2 * u)};
  }
  quad v = sqrtq((r - a.re) / 2);
  if (a.im < 0) v = -v;
  return {a.im / (2 * v), v};
}

}  // namespace detail

/// Eigenvalues of a real 4x4 matrix, sorted by (real, imag).
inline std::array<std::complex<double>, 4> eigenvalues4(const Eigen::Matrix4d& m) {
  using detail::qc;
  using detail::quad;

  const quad shift = (quad(m(0, 0)) + m(1, 1) + m(2, 2) + m(3, 3)) / 4;
  quad n[4][4];
  quad scale = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      n[i][j] = quad(m(i, j)) - (i == j ? shift : quad(0));
      scale = std::max(scale, fabsq(n[i][j]));
    }

  std::array<std::complex<double>, 4> out;
  if (scale == 0) {
    out.fill({static_cast<double>(shift), 0.0});
    return out;
  }

  quad n2[4][4] = {};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) n2[i][j] += n[i][k] * n[k][j];
  quad t2 = 0, t3 = 0, t4 = 0;
  for (int i = 0; i < 4; ++i) {
    t2 += n2[i][i];
    for (int k = 0; k < 4; ++k) {
      t3 += n2[i][k] * n[k][i];
      t4 += n2[i][k] * n2[k][i];
    }
  }
  // x^4 + e2 x^2 - e3 x + e4, Newton identities with e1 = 0.
  const quad e2 = -t2 / 2;
  const quad e3 = t3 / 3;
  const quad e4 = (t2 * t2 / 2 - t4) / 4;

  std::array<qc, 4> x;
  const quad s3 = scale * scale * scale;
  if (fabsq(e3) <= quad(1e-28) * s3) {
    const qc disc = detail::qsqrt(qc{e2 * e2 - 4 * e4, 0});
    const qc y1 = (qc{-e2, 0} + disc) / qc{2, 0};
    const qc y2 = (qc{-e2, 0} - disc) / qc{2, 0};
    const qc r1 = detail::qsqrt(y1);
    const qc r2 = detail::qsqrt(y2);
    x = {r1, qc{-r1.re, -r1.im}, r2, qc{-r2.re, -r2.im}};
  } else {
    // Durand-Kerner on the monic quartic.
    auto p = [&](qc z) {
      const qc z2 = z * z;
      return z2 * z2 + qc{e2, 0} * z2 - qc{e3, 0} * z + qc{e4, 0};
    };
    qc seed{quad(0.4), quad(0.9)};
    qc r{scale, 0};
    for (int i = 0; i < 4; ++i) {
      x[i] = r;
      r = r * seed;
    }
    for (int it = 0; it < 500; ++it) {
      quad moved = 0;
      for (int i = 0; i < 4; ++i) {
        qc den{1, 0};
        for (int j = 0; j < 4; ++j)
          if (j != i) den = den * (x[i] - x[j]);
        const qc step = p(x[i]) / den;
        x[i] = x[i] - step;
        moved = std::max(moved, detail::qabs(step));
      }
      if (moved <= quad(1e-32) * scale) break;
    }
  }
  for (int i = 0; i < 4; ++i)
    out[i] = {static_cast<double>(x[i].re + shift), static_cast<double>(x[i].im)};
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

}  // namespace dimerpa
