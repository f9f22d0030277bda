#pragma once

// Oracle-grade expected costs and cost distributions.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "splitting/model.hpp"
#include "splitting/simd/kernels.hpp"

namespace splitting {

enum class CostMode { exact, float64 };

std::string to_string(CostMode mode);

struct CostTable {
  CostMode mode = CostMode::float64;
  int threshold = 2;
  /// E(R_n) for n = 0..n_max.
  std::vector<double> values;
  /// Same values as exact rationals; empty in float64 mode.
  std::vector<Rational> exact_values;

  std::size_t n_max() const { return values.empty() ? 0 : values.size() - 1; }
};

struct ExactLimits {
  std::size_t max_exact_n = 2000;
  std::size_t max_float_n = std::size_t{1} << 22;
  int max_pmf_n = 16;
  long max_pmf_value = 1L << 14;
};

/// E(R_n) for 0 <= n <= n_max from the expectation of the cost recursion,
/// solving each step for its self-referential (all items in one subset) term.
/// Throws std::invalid_argument for invalid or random-weight specs and
/// ResourceError when n_max exceeds the mode's bound.
CostTable expected_cost_table(const SplittingSpec& spec, std::size_t n_max, CostMode mode,
                              const ExactLimits& limits = {});

/// Float64 table through an explicit kernel variant, bypassing the limits.
CostTable float_cost_table(const SplittingSpec& spec, std::size_t n_max, const simd::KernelTable& kernels);

/// E(R_n) for the symmetric Q-ary algorithm through the de-Poissonized
/// order-statistic formula: a series over Q-adic bands of U_(n)^D.
double closed_form_qary(int q, int threshold, long n);

struct CostPmf {
  long n = 0;
  std::vector<std::pair<long, double>> support;  // (value, probability), ascending
  double tail_mass = 0.0;

  double mean() const;
};

/// Distribution of R_n, truncated where the omitted mass drops below tail_eps.
CostPmf cost_distribution(const SplittingSpec& spec, int n, double tail_eps,
                          const ExactLimits& limits = {});

struct PoissonTransformValue {
  double value = 0.0;
  /// Upper bound on the truncation error beyond the table's end.
  double error_bound = 0.0;
};

/// sum_n E(R_n) x^n e^{-x} / n!. Throws ResourceError when the table is too
/// short for the truncation error to stay below 1e-10.
PoissonTransformValue poisson_transform_expect(const CostTable& table, double x);

/// CSV "n,expected_cost,mode"; exact tables print "num/den".
std::string cost_table_csv(const CostTable& table);
/// CSV "k,prob" followed by "# tail_mass=...".
std::string cost_pmf_csv(const CostPmf& pmf);

}  // namespace splitting
