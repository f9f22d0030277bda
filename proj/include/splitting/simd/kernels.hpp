#pragma once

// Data-parallel inner loops of the cost recursion.
//
// Every variant evaluates exactly the same floating-point operations in the
// same order (four interleaved accumulators for reductions, no fused
// multiply-add), so scalar, AVX2 and NEON results are bit-identical. That
// keeps numeric output independent of the machine the tables were built on.

#include <cstddef>
#include <span>
#include <string_view>

namespace splitting::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  /// next[j] = (1 - v) * prev[j] + v * prev[j - 1] for j in [0, m], with
  /// prev[-1] = prev[m] = 0. One step of the binomial(n, v) row recurrence.
  void (*binomial_step)(const double* prev, double* next, std::size_t m, double v);
  /// sum_i a[i] * b[i] with four interleaved partial sums.
  double (*dot)(const double* a, const double* b, std::size_t n);
};

bool available(Isa isa);
const KernelTable& table(Isa isa);

/// Best variant for this CPU, or the one forced by the SPLITTING_SIMD
/// environment variable ("scalar", "avx2", "neon").
const KernelTable& active();

std::string_view name(Isa isa);

/// Straight left-to-right sum; the tolerance oracle for dot().
double dot_reference(std::span<const double> a, std::span<const double> b);

}  // namespace splitting::simd
