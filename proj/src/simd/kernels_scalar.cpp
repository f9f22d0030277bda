#include "variants.hpp"

namespace splitting::simd::detail {

void binomial_step_scalar(const double* prev, double* next, std::size_t m, double v) {
  const double q = 1.0 - v;
  if (m == 0) {
    next[0] = 0.0;
    return;
  }
  next[0] = q * prev[0];
  for (std::size_t j = 1; j < m; ++j) next[j] = q * prev[j] + v * prev[j - 1];
  next[m] = v * prev[m - 1];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += a[i] * b[i];
    acc[1] += a[i + 1] * b[i + 1];
    acc[2] += a[i + 2] * b[i + 2];
    acc[3] += a[i + 3] * b[i + 3];
  }
  return finish_dot(acc, a, b, i, n);
}

}  // namespace splitting::simd::detail
