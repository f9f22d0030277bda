#pragma once

// Splitting-algorithm descriptions and the splitting measure they induce.
//
// A split of n >= D items draws a degree l from the branch law, then a weight
// vector V_l, and routes every item independently to subset i with
// probability V_{i,l}. The splitting measure W is the size-biased law of the
// routing probabilities: integral f dW = E(sum_i V_i f(V_i)).

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "splitting/rational.hpp"
#include "splitting/rng.hpp"

namespace splitting {

/// V_{i,l} = 1/l for every arc.
struct SymmetricWeights {};

/// One fixed weight vector.
struct DeterministicWeights {
  std::vector<Rational> weights;
};

struct MixtureCase {
  Rational prob;
  std::vector<Rational> weights;
};

/// Finitely many weight vectors, one picked at random per split.
struct MixtureWeights {
  std::vector<MixtureCase> cases;
};

/// Opaque random weight vector. Only the tree simulator can use it; every
/// exact path rejects it. `max_weight` is the declared almost-sure bound on
/// every coordinate and must be < 1.
struct RandomWeights {
  std::function<void(Rng&, std::span<double>)> sample;
  double max_weight = 1.0;
  std::string label = "random";
};

using WeightLaw = std::variant<SymmetricWeights, DeterministicWeights, MixtureWeights, RandomWeights>;

struct BranchEntry {
  int degree = 0;
  Rational prob;
};

struct SplittingSpec {
  int threshold = 2;  // D
  std::vector<BranchEntry> branch;
  std::map<int, WeightLaw> weights;

  /// Knuth's binary algorithm: D = 2, G = 2, fair weights.
  static SplittingSpec knuth();
  /// Symmetric Q-ary algorithm with threshold D.
  static SplittingSpec symmetric_qary(int q, int threshold);
  /// Constant degree len(weights) with one deterministic weight vector.
  static SplittingSpec qary(std::vector<Rational> weights, int threshold);
};

struct Violation {
  std::string field;
  std::string rule;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Empty result means the spec is valid.
std::vector<Violation> validate(const SplittingSpec& spec);

/// True when no weight law is a RandomWeights sampler.
bool has_exact_weights(const SplittingSpec& spec);

/// Q when the spec is the symmetric constant-degree-Q algorithm.
std::optional<int> symmetric_degree(const SplittingSpec& spec);

Rational expected_branch(const SplittingSpec& spec);

struct Atom {
  Rational value;  // a in (0, 1)
  Rational mass;
};

class SplittingMeasure {
 public:
  /// Builds from explicit atoms. Masses must sum to exactly 1 and values must
  /// lie in (0, 1); duplicate values are merged. `expected_branch` defaults to
  /// integral dW/x, which equals E(G) when no weight is zero.
  static SplittingMeasure from_atoms(std::vector<Atom> atoms,
                                     std::optional<double> expected_branch = std::nullopt);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double expected_branch() const { return expected_branch_; }
  /// E(-log W).
  double neg_log_moment() const { return neg_log_moment_; }
  /// E(|log W| / W).
  double heavy_moment() const { return heavy_moment_; }
  /// Largest atom.
  const Rational& delta() const { return atoms_.back().value; }

  std::vector<double> values() const;
  std::vector<double> masses() const;

 private:
  SplittingMeasure() = default;
  std::vector<Atom> atoms_;
  double expected_branch_ = 0.0;
  double neg_log_moment_ = 0.0;
  double heavy_moment_ = 0.0;
};

/// Splitting measure of a valid spec with exact weight laws. Throws
/// std::invalid_argument when the precondition fails.
SplittingMeasure build_measure(const SplittingSpec& spec);

struct MeasureMoments {
  double expected_branch;
  double neg_log;
  double heavy;
  Rational delta;
};

MeasureMoments moments(const SplittingMeasure& measure);

enum class SpanKind { arithmetic, non_arithmetic, undecidable };

struct SpanResult {
  SpanKind kind = SpanKind::non_arithmetic;
  std::optional<double> lambda;
  /// k_i with a_i = exp(-k_i * lambda), in atom order.
  std::optional<std::vector<std::int64_t>> multipliers;
  /// exp(-lambda) as an exact rational.
  std::optional<Rational> base;
  /// Set for undecidable results: which atom exceeded the bound.
  std::string note;

  bool arithmetic() const { return kind == SpanKind::arithmetic; }
};

inline constexpr std::uint64_t kDefaultFactorBound = 1'000'000'000'000ULL;

/// Decides exponential arithmeticity exactly from prime factorizations of the
/// atoms. Numerators or denominators above `factor_bound` give an
/// undecidable result.
SpanResult detect_span(const SplittingMeasure& measure,
                       std::uint64_t factor_bound = kDefaultFactorBound);

}  // namespace splitting
