#include "splitting/special.hpp"

#include <cmath>
#include <limits>

namespace splitting {

double log_factorial(long n) { return std::lgamma(static_cast<double>(n) + 1.0); }

namespace {

// e^{-s} sum_{k >= shape} s^k / k!, by the power series.
double lower_series(int shape, double s) {
  const double lead = std::exp(-s + shape * std::log(s) - log_factorial(shape));
  double term = 1.0;
  double sum = 1.0;
  for (int k = shape + 1; k < shape + 10000; ++k) {
    term *= s / k;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return lead * sum;
}

// e^{-s} sum_{k < shape} s^k / k!, summed from the largest term down.
double upper_finite(int shape, double s) {
  double term = 1.0;  // s^{shape-1}/(shape-1)! scaled out
  double sum = 1.0;
  for (int k = shape - 1; k >= 1; --k) {
    term *= k / s;
    sum += term;
  }
  return std::exp(-s + (shape - 1) * std::log(s) - log_factorial(shape - 1)) * sum;
}

}  // namespace

double gamma_p(int shape, double s) {
  if (s <= 0.0) return 0.0;
  if (std::isinf(s)) return 1.0;
  if (s < shape + 1.0) return lower_series(shape, s);
  return 1.0 - upper_finite(shape, s);
}

double gamma_q(int shape, double s) {
  if (s <= 0.0) return 1.0;
  if (std::isinf(s)) return 0.0;
  if (s < shape + 1.0) return 1.0 - lower_series(shape, s);
  return upper_finite(shape, s);
}

double gamma_increment(int shape, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (lo >= shape + 1.0) return gamma_q(shape, lo) - gamma_q(shape, hi);
  return gamma_p(shape, hi) - gamma_p(shape, lo);
}

double binomial_tail(long n, double x, long k) {
  if (k <= 0) return 1.0;
  if (k > n || x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lx = std::log(x);
  const double l1x = std::log1p(-x);
  const double lnf = log_factorial(n);
  const auto pmf = [&](long j) {
    return std::exp(lnf - log_factorial(j) - log_factorial(n - j) + j * lx + (n - j) * l1x);
  };
  if (static_cast<double>(n) * x <= static_cast<double>(k)) {
    // Upper terms decrease from j = k on; sum them directly.
    double sum = 0.0;
    for (long j = k; j <= n; ++j) {
      const double t = pmf(j);
      sum += t;
      if (t < 1e-18 * sum) break;
    }
    return sum;
  }
  double below = 0.0;
  for (long j = 0; j < k; ++j) below += pmf(j);
  return 1.0 - below;
}

}  // namespace splitting
