#include <arm_neon.h>

#include "variants.hpp"

namespace splitting::simd::detail {

void binomial_step_neon(const double* prev, double* next, std::size_t m, double v) {
  const double q = 1.0 - v;
  if (m == 0) {
    next[0] = 0.0;
    return;
  }
  next[0] = q * prev[0];
  const float64x2_t vq = vdupq_n_f64(q);
  const float64x2_t vv = vdupq_n_f64(v);
  std::size_t j = 1;
  for (; j + 2 <= m; j += 2) {
    const float64x2_t cur = vld1q_f64(prev + j);
    const float64x2_t left = vld1q_f64(prev + j - 1);
    vst1q_f64(next + j, vaddq_f64(vmulq_f64(vq, cur), vmulq_f64(vv, left)));
  }
  for (; j < m; ++j) next[j] = q * prev[j] + v * prev[j - 1];
  next[m] = v * prev[m - 1];
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  // Two 2-lane registers stand in for the four partial sums.
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double lanes[4];
  vst1q_f64(lanes, lo);
  vst1q_f64(lanes + 2, hi);
  return finish_dot(lanes, a, b, i, n);
}

}  // namespace splitting::simd::detail
