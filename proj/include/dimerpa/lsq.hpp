// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Levenberg-Marquardt with central-difference Jacobians. Parameters should be
// scaled to O(1) by the caller; the difference step is 1e-6 relative.

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>
#include <cmath>
#include <functional>
#include <limits>

#include "dimerpa/errors.hpp"

namespace dimerpa {

using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LsqOptions {
  int max_evaluations = 2000;
  double xtol = 1e-12;
  double ftol = 1e-14;
  double diff_epsfcn = 1e-12;  // step = sqrt(epsfcn) |x|
};

struct LsqResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1, s^2 = SSR / (m - n)
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // SSR
  double rms = 0.0;
  int evaluations = 0;
  int status = 0;
  double jtj_rcond = 0.0;  // small -> weakly identifiable
};

namespace detail {

struct LsqFunctor : Eigen::DenseFunctor<double> {
  LsqFunctor(int n, int m, const ResidualFn* f, int* count)
      : Eigen::DenseFunctor<double>(n, m), fn(f), evals(count) {}
  int operator()(const InputType& x, ValueType& r) const {
    r.resize(values());
    (*fn)(x, r);
    ++*evals;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (!std::isfinite(r[i])) r[i] = 1e150;
    return 0;
  }
  const ResidualFn* fn;
  int* evals;
};

}  // namespace detail

inline double sum_squares(const ResidualFn& f, const Eigen::VectorXd& x, int m) {
  Eigen::VectorXd r(m);
  f(x, r);
  return r.squaredNorm();
}

/// Covariance and Jacobian at x, without iterating.
inline LsqResult lsq_statistics(const ResidualFn& f, const Eigen::VectorXd& x, int m,
                                const LsqOptions& o = {}) {
  int count = 0;
  detail::LsqFunctor base(static_cast<int>(x.size()), m, &f, &count);
  Eigen::NumericalDiff<detail::LsqFunctor, Eigen::Central> nd(base, o.diff_epsfcn);
  LsqResult out;
  out.x = x;
  Eigen::VectorXd r(m);
  base(x, r);
  out.cost = r.squaredNorm();
  out.rms = std::sqrt(out.cost / m);
  out.jacobian.resize(m, x.size());
  nd.df(x, out.jacobian);
  const Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj);
  const auto sv = svd.singularValues();
  out.jtj_rcond = sv.size() > 0 && sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
  const double dof = std::max<double>(1.0, static_cast<double>(m - x.size()));
  const double s2 = out.cost / dof;
  if (out.jtj_rcond > 1e-15) {
    out.covariance = s2 * jtj.inverse();
  } else {
    out.covariance = Eigen::MatrixXd::Constant(x.size(), x.size(), std::numeric_limits<double>::infinity());
  }
  out.evaluations = count;
  return out;
}

inline LsqResult least_squares(const ResidualFn& f, Eigen::VectorXd x0, int m, const LsqOptions& o = {}) {
  require(m >= x0.size(), "least squares needs at least as many residuals as parameters");
  int count = 0;
  detail::LsqFunctor base(static_cast<int>(x0.size()), m, &f, &count);
  Eigen::NumericalDiff<detail::LsqFunctor, Eigen::Central> nd(base, o.diff_epsfcn);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::LsqFunctor, Eigen::Central>> lm(nd);
  lm.setMaxfev(o.max_evaluations);
  lm.setXtol(o.xtol);
  lm.setFtol(o.ftol);
  const auto status = lm.minimize(x0);
  LsqResult out = lsq_statistics(f, x0, m, o);
  out.evaluations += count;
  out.status = static_cast<int>(status);
  return out;
}

}  // namespace dimerpa
