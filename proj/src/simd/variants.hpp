#pragma once

#include <cstddef>

namespace splitting::simd::detail {

void binomial_step_scalar(const double* prev, double* next, std::size_t m, double v);
double dot_scalar(const double* a, const double* b, std::size_t n);

#if defined(SPLITTING_HAVE_AVX2)
void binomial_step_avx2(const double* prev, double* next, std::size_t m, double v);
double dot_avx2(const double* a, const double* b, std::size_t n);
#endif

#if defined(SPLITTING_HAVE_NEON)
void binomial_step_neon(const double* prev, double* next, std::size_t m, double v);
double dot_neon(const double* a, const double* b, std::size_t n);
#endif

// Shared lane-combination order for the four partial sums and the tail.
inline double finish_dot(const double acc[4], const double* a, const double* b, std::size_t from,
                         std::size_t n) {
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (std::size_t i = from; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace splitting::simd::detail
