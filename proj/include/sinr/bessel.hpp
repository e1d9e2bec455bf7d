#pragma once

// Bessel functions of the first kind at integer order, plus the classical
// upper bound |J_k(x)| <= (|x|/2)^|k| / |k|! used to certify expansion tails.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "sinr/errors.hpp"

namespace sinr {

namespace detail {

// Ascending series  sum_j (-1)^j (x/2)^{k+2j} / (j! (j+k)!)  for k >= 0.
inline double bessel_series(int k, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= k; ++i) term *= half / i;
  if (term == 0.0) return 0.0;
  const double q = -half * half;
  double sum = term;
  for (int j = 1; j < 500; ++j) {
    term *= q / (static_cast<double>(j) * (j + k));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// J_k(x) = (1/2pi) * integral over a full period of cos(k t - x sin t). The
// integrand is periodic and entire, so the rectangle rule is exact up to
// aliased orders k +- N, which are negligible once N exceeds |x| + k by a margin.
inline double bessel_periodic_rule(int k, double x) {
  const int n = 2 * (static_cast<int>(std::abs(x)) + k + 48);
  const double step = 2.0 * std::numbers::pi / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = i * step;
    sum += std::cos(k * t - x * std::sin(t));
  }
  return sum / n;
}

}  // namespace detail

/// J_k(x) for integer order k and finite real x.
///
/// Uses the ascending series for |x| <= 8 and an exponentially convergent
/// periodic quadrature beyond. Negative orders go through J_{-k} = (-1)^k J_k.
inline double bessel_j(int k, double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
  if (k < 0) {
    const double v = bessel_j(-k, x);
    return (k % 2 == 0) ? v : -v;
  }
  if (std::abs(x) <= 8.0) return detail::bessel_series(k, x);
  return detail::bessel_periodic_rule(k, x);
}

/// (|x|/2)^|k| / |k|!, which dominates |J_k(x)|. Equal to 1 at k = 0.
inline double bessel_bound(int k, double x) {
  const int n = std::abs(k);
  const double half = 0.5 * std::abs(x);
  double b = 1.0;
  for (int i = 1; i <= n; ++i) b *= half / i;
  return b;
}

namespace detail {

// Upper bound on sum_{t > n} u^t / t!  (Taylor remainder of e^u).
inline double exp_series_tail(double u, int n) {
  if (u <= 0.0) return 0.0;
  return std::exp((n + 1) * std::log(u) - std::lgamma(n + 2.0) + u);
}

}  // namespace detail

/// Certified upper bound on sum over all integer t of |J_t(x)|.
///
/// Combines sum_t J_t(x)^2 = 1 (Cauchy-Schwarz over |t| <= N) with the
/// power bound beyond N, and the plain bound-sum 2 e^{|x|/2} - 1.
inline double bessel_abs_sum_bound(double x) {
  const double u = 0.5 * std::abs(x);
  double best = 2.0 * std::exp(u) - 1.0;
  const int n_max = static_cast<int>(std::ceil(8.0 * u)) + 30;
  for (int n = 0; n <= n_max; ++n)
    best = std::min(best, std::sqrt(2.0 * n + 1.0) + 2.0 * detail::exp_series_tail(u, n));
  return best;
}

/// Certified upper bound on sum over |t| > k of |J_t(x)|. Nondecreasing in |x|.
inline double bessel_abs_tail_bound(double x, int k) {
  const double u = 0.5 * std::abs(x);
  double best = 2.0 * detail::exp_series_tail(u, k);
  const int n_max = std::max(k + 1, static_cast<int>(std::ceil(8.0 * u)) + 30);
  for (int n = k + 1; n <= n_max; ++n)
    best = std::min(best, std::sqrt(2.0 * (n - k)) + 2.0 * detail::exp_series_tail(u, n));
  return best;
}

}  // namespace sinr
