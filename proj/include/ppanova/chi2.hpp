#pragma once

#include <cmath>
#include <limits>

#include "ppanova/errors.hpp"

namespace ppanova {

namespace detail {

// Regularized lower incomplete gamma P(a, x) by its series expansion;
// converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
// fraction; converges quickly for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  const double gln = std::lgamma(a);
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

}  // namespace detail

/// Upper-tail probability of the chi-squared distribution: P(X > x) for
/// X ~ chi2_df, via the regularized incomplete gamma function. For df = 2
/// this reduces to exp(-x/2).
inline double chi2_pvalue(double x, int df) {
  if (df < 1) throw invalid_input("chi2_pvalue needs df >= 1");
  if (!(x >= 0.0)) throw invalid_input("chi2_pvalue needs a value >= 0");
  return detail::gamma_q(0.5 * df, 0.5 * x);
}

inline double chi2_cdf(double x, int df) { return 1.0 - chi2_pvalue(x, df); }

/// Quantile of chi2_df at probability p, by bisection on the tail function.
inline double chi2_quantile(double p, int df) {
  if (df < 1) throw invalid_input("chi2_quantile needs df >= 1");
  if (!(p >= 0.0 && p < 1.0)) {
    throw invalid_input("chi2_quantile needs p in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (chi2_cdf(hi, df) < p) {
    hi *= 2.0;
    if (hi > 1e8) break;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ppanova
