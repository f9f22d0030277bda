#pragma once

namespace splitting {

/// P(t_D <= s) for t_D ~ Gamma(D, 1), integer D >= 1: the regularized lower
/// incomplete gamma function. Absolute error below 1e-15.
double gamma_p(int shape, double s);

/// P(t_D > s) = 1 - gamma_p(shape, s), computed without cancellation.
double gamma_q(int shape, double s);

/// P(lo < t_D <= hi) for lo <= hi, choosing the tail that avoids cancellation.
double gamma_increment(int shape, double lo, double hi);

/// P(Binomial(n, x) >= k).
double binomial_tail(long n, double x, long k);

double log_factorial(long n);

}  // namespace splitting
