#pragma once

// Leading-order asymptotics of the mean and variance of the cost.
//
// Non-arithmetic measures: E(R_n)/n -> E(G) / ((D-1) E(-log W)).
// Arithmetic measures with span lambda: E(R_n)/n ~ F({log n / lambda}) for a
// periodic F whose period mean is that same constant. For the symmetric
// Q-ary algorithm F is written F1, and F2 is the matching variance profile.
// All profiles are indexed by the fractional part {z} = z - floor(z).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "splitting/exact.hpp"
#include "splitting/model.hpp"

namespace splitting {

inline constexpr double kProfileTol = 1e-10;

double limit_constant(const SplittingMeasure& measure, double expected_branch, int threshold);

/// z - floor(z).
double frac(double z);

enum class ProfileKind { F, F1, F2 };
enum class ProfileMethod { kink_quadrature, series, monte_carlo };

std::string to_string(ProfileKind kind);
std::string to_string(ProfileMethod method);

struct PeriodicProfile {
  ProfileKind kind = ProfileKind::F;
  double lambda = 0.0;
  std::vector<double> grid;    // x in [0, 1)
  std::vector<double> values;
  /// Per-point error estimates; empty when `tol` applies uniformly.
  std::vector<double> errors;
  ProfileMethod method = ProfileMethod::kink_quadrature;
  double tol = kProfileTol;
};

/// Uniform grid i / size, i < size.
std::vector<double> unit_grid(int size);

/// F(x) for an arithmetic measure with span lambda, summed piecewise between
/// the kinks of the fractional part.
double periodic_F(const SplittingMeasure& measure, double expected_branch, int threshold,
                  double lambda, double x, double tol = kProfileTol);

/// Throws std::invalid_argument when the span is not arithmetic.
PeriodicProfile periodic_profile_F(const SplittingMeasure& measure, double expected_branch,
                                   int threshold, const SpanResult& span, int grid_size,
                                   double tol = kProfileTol);

/// F1(x) for the symmetric Q-ary algorithm, x in [0, 1).
double f1_quadrature(int q, int threshold, double x, double tol = kProfileTol);

/// Q sum_{n in Z} P(t_D <= y Q^n) / (y Q^n) for 0 < y <= Q; equals
/// F1(log_Q y).
double f1_series(int q, int threshold, double y, double tol = kProfileTol);

PeriodicProfile f1_profile(int q, int threshold, int grid_size, double tol = kProfileTol);

/// Integrand of the variance profile. a, b in [0, 1) are the fractional
/// offsets of u and v; the function vanishes on the diagonal.
double f2_integrand(int q, double a, double b, double u, double v);

struct F2Value {
  double value = 0.0;
  double error = 0.0;  // refinement difference or Monte Carlo standard error
};

/// Tensor Gauss-Legendre (order 8) over cells bounded by the kinks
/// u, v = Q^{x - m}. The error is the change under one halving of every cell.
/// Throws ResourceError when the error stays above tol.
F2Value f2_quadrature(int q, int threshold, double x, double tol = 1e-8);

/// Symmetrized average of the integrand over `pairs` Gamma(D) pairs.
F2Value f2_monte_carlo(int q, int threshold, double x, std::uint64_t pairs, std::uint64_t seed,
                       unsigned threads = 1);

PeriodicProfile f2_profile(int q, int threshold, int grid_size, ProfileMethod method,
                           std::uint64_t seed = 0, std::uint64_t pairs = 10'000'000,
                           unsigned threads = 1);

/// CSV "x,value,method,tol"; tol is the per-point error when known.
std::string profile_csv(const PeriodicProfile& profile);

struct ConvergenceRow {
  long n = 0;
  double ratio = 0.0;
  double predicted = 0.0;
  double rel_error = 0.0;
};

/// Predicted E(R_n)/n: the limit constant, or F({log n / lambda}) when the
/// span is arithmetic.
std::function<double(long)> predicted_ratio(const SplittingMeasure& measure, double expected_branch,
                                            int threshold, const SpanResult& span);

/// Rows for ascending n_list; `expected_cost(n)` supplies E(R_n).
std::vector<ConvergenceRow> convergence_report(const SplittingMeasure& measure, double expected_branch,
                                               int threshold, const SpanResult& span,
                                               const std::vector<long>& n_list,
                                               const std::function<double(long)>& expected_cost);

std::vector<ConvergenceRow> convergence_report(const SplittingMeasure& measure, double expected_branch,
                                               int threshold, const SpanResult& span,
                                               const std::vector<long>& n_list, const CostTable& table);

/// n = floor(y Q^k) for k in [k_min, k_max] and y on a geometric grid of
/// y_points per period, deduplicated and ascending.
std::vector<long> geometric_n_grid(double base, int k_min, int k_max, int y_points);

/// CSV "n,ratio,predicted,rel_error".
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

}  // namespace splitting
