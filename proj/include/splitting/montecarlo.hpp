#pragma once

// Monte Carlo estimators of the cost: direct tree simulation, the renewal
// representations of the Poisson transform and of E(R_n), the Q-adic
// interval-count representation, and the law-of-large-numbers and
// central-limit study harnesses built on them.
//
// Every replica draws from its own StreamKey{seed, estimator tag, index},
// and reductions run in index order, so results do not depend on `threads`.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitting/model.hpp"
#include "splitting/rng.hpp"

namespace splitting {

struct TreeStats {
  long cost = 1;  // R, root included
  int max_depth = 0;
  int full_levels = 0;
  std::vector<long> level_nodes;  // level_nodes[p - 1] = nodes at level p >= 1
};

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  long replicas = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> extras;
};

struct SimLimits {
  long node_budget = 10'000'000;  // splits per tree
  long max_steps = 10'000'000;    // walk steps per replica
};

/// One splitting tree on n items. Throws BudgetError past the split budget.
TreeStats simulate_tree(const SplittingSpec& spec, long n, Rng& rng, const SimLimits& limits = {});

/// Trees for replicas 0..replicas-1 of the tree stream.
std::vector<TreeStats> simulate_trees(const SplittingSpec& spec, long n, long replicas, std::uint64_t seed,
                                      unsigned threads = 1, const SimLimits& limits = {});

/// Mean and standard error of the cost over simulated trees, with mean
/// depth and mean full levels as extras.
McEstimate summarize_trees(const std::vector<TreeStats>& trees, std::uint64_t seed);

McEstimate estimate_cost(const SplittingSpec& spec, long n, long replicas, std::uint64_t seed,
                         unsigned threads = 1, const SimLimits& limits = {});

/// Draws from the atoms of a splitting measure.
class MeasureSampler {
 public:
  explicit MeasureSampler(const SplittingMeasure& measure);
  double operator()(Rng& rng) const;
  /// Same draw as -log of operator().
  double neg_log(Rng& rng) const;

 private:
  std::size_t index(Rng& rng) const;
  std::vector<double> cumulative_, values_, neg_logs_;
};

/// Per-replica value of the Poisson-transform representation:
/// sum_{i >= 0} 1{t_D <= x W_1...W_i} / (W_1...W_i).
double rep8_replica(const MeasureSampler& sampler, int threshold, double x, Rng& rng, long max_steps);

/// 1 + E(G) times the mean of rep8_replica; estimates E(R(x)).
McEstimate rep8_estimate(const SplittingMeasure& measure, double expected_branch, int threshold, double x,
                         long replicas, std::uint64_t seed, unsigned threads = 1, const SimLimits& limits = {});

/// D-th smallest of n uniforms, from exponential spacings.
double order_statistic(int d, long n, Rng& rng);

/// sum_{i < T} 1 / (W_1...W_i), T the first i >= 1 with W_1...W_i < U.
double rep12_replica(const MeasureSampler& sampler, int threshold, long n, Rng& rng, long max_steps);

/// 1 + E(G) times the mean of rep12_replica; estimates E(R_n).
McEstimate rep12_estimate(const SplittingMeasure& measure, double expected_branch, int threshold, long n,
                          long replicas, std::uint64_t seed, unsigned threads = 1, const SimLimits& limits = {});

struct WalkConfig {
  SplittingMeasure measure;
  double x = 0.0;
  long max_steps = 10'000'000;
};

struct PsiWalkResult {
  McEstimate psi_scaled;   // Psi(x) e^{-x}
  McEstimate overshoot;    // e^{S_nu - x}
};

/// Random walk S_i = sum -log W_k run until it first exceeds x.
PsiWalkResult psi_walk(const WalkConfig& config, long replicas, std::uint64_t seed, unsigned threads = 1);

/// E((1 - log W) / W) - 1, the bound on the mean overshoot moment.
double overshoot_bound(const SplittingMeasure& measure);

/// Cost of the symmetric Q-ary tree over points in [0, 1): one plus Q times
/// the number of Q-adic intervals holding at least D points.
TreeStats qadic_tree(int q, int threshold, std::span<const double> points);

long qadic_sample_rn(int q, int threshold, long n, Rng& rng);

/// Points of a unit-rate Poisson process on [0, 1] x [0, x_max]: (position,
/// arrival level), sorted by level. Restricting to level <= x gives the
/// Poisson(x) sample for every x <= x_max at once.
std::vector<std::pair<double, double>> poisson_points(double x_max, Rng& rng);

/// Cost over the points with level <= x.
long qadic_cost_at(int q, int threshold, const std::vector<std::pair<double, double>>& points, double x);

long poisson_qadic_sample(int q, int threshold, double x, Rng& rng);

/// Mean of qadic_sample_rn over replicas.
McEstimate qadic_estimate(int q, int threshold, long n, long replicas, std::uint64_t seed, unsigned threads = 1);

/// Mean of poisson_qadic_sample over replicas.
McEstimate poisson_qadic_estimate(int q, int threshold, double x, long replicas, std::uint64_t seed,
                                  unsigned threads = 1);

struct LlnRow {
  double x = 0.0;
  double f1 = 0.0;
  double frequency = 0.0;
  double std_err = 0.0;  // binomial
  long replicas = 0;
};

/// Frequency of |R(x) / (x F1(log_Q x)) - 1| >= eps for each x.
std::vector<LlnRow> lln_study(int q, int threshold, const std::vector<double>& x_list, long replicas, double eps,
                              std::uint64_t seed, unsigned threads = 1);

struct CltResult {
  double x = 0.0;
  long replicas = 0;
  double mean = 0.0;
  double variance = 0.0;
  double variance_per_x = 0.0;
  /// Mean of the standardized values; zero up to rounding.
  double standardized_mean = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double f2 = 0.0;             // F2({log_Q x})
  double f2_error = 0.0;
  double variance_ratio = 0.0; // variance / (x F2)
  std::vector<double> samples;
};

/// Samples R(y Q^N) and compares the sample moments with a Gaussian and the
/// sample variance with x F2.
CltResult clt_study(int q, int threshold, double y, int big_n, long replicas, std::uint64_t seed,
                    unsigned threads = 1);

/// JSON record {op, params, mean, stderr, replicas, seed, extras}.
std::string estimate_json(const std::string& op, const std::map<std::string, double>& params,
                          const McEstimate& est);

}  // namespace splitting
