// Compiled with -mavx2 only; reached exclusively through the runtime dispatch.
#include <immintrin.h>

#include "variants.hpp"

namespace splitting::simd::detail {

void binomial_step_avx2(const double* prev, double* next, std::size_t m, double v) {
  const double q = 1.0 - v;
  if (m == 0) {
    next[0] = 0.0;
    return;
  }
  next[0] = q * prev[0];
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vv = _mm256_set1_pd(v);
  std::size_t j = 1;
  for (; j + 4 <= m; j += 4) {
    const __m256d cur = _mm256_loadu_pd(prev + j);
    const __m256d left = _mm256_loadu_pd(prev + j - 1);
    _mm256_storeu_pd(next + j, _mm256_add_pd(_mm256_mul_pd(vq, cur), _mm256_mul_pd(vv, left)));
  }
  for (; j < m; ++j) next[j] = q * prev[j] + v * prev[j - 1];
  next[m] = v * prev[m - 1];
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return finish_dot(lanes, a, b, i, n);
}

}  // namespace splitting::simd::detail
