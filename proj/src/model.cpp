#include "splitting/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace splitting {

SplittingSpec SplittingSpec::knuth() { return symmetric_qary(2, 2); }

SplittingSpec SplittingSpec::symmetric_qary(int q, int threshold) {
  SplittingSpec s;
  s.threshold = threshold;
  s.branch.push_back({q, Rational(1)});
  s.weights[q] = SymmetricWeights{};
  return s;
}

SplittingSpec SplittingSpec::qary(std::vector<Rational> weights, int threshold) {
  SplittingSpec s;
  s.threshold = threshold;
  const int q = static_cast<int>(weights.size());
  s.branch.push_back({q, Rational(1)});
  s.weights[q] = DeterministicWeights{std::move(weights)};
  return s;
}

namespace {

void check_vector(const std::vector<Rational>& w, int degree, const std::string& field,
                  std::vector<Violation>& out) {
  if (static_cast<int>(w.size()) != degree) {
    out.push_back({field, "weight vector length ≠ degree"});
  }
  Rational sum(0);
  int positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto f = field + "[" + std::to_string(i) + "]";
    if (w[i].sign() < 0) out.push_back({f, "weight < 0"});
    if (w[i] >= Rational(1)) out.push_back({f, "weight not < 1"});
    if (w[i].sign() > 0) ++positive;
    sum += w[i];
  }
  if (sum != Rational(1)) out.push_back({field, "weights sum ≠ 1"});
  if (positive < 2) out.push_back({field, "fewer than two positive weights"});
}

bool is_probability(const Rational& p) { return p.sign() >= 0 && p <= Rational(1); }

}  // namespace

std::vector<Violation> validate(const SplittingSpec& spec) {
  std::vector<Violation> out;
  if (spec.threshold < 2) out.push_back({"D", "D < 2"});
  if (spec.branch.empty()) out.push_back({"branch", "empty branch law"});

  Rational total(0);
  std::vector<int> seen;
  for (std::size_t i = 0; i < spec.branch.size(); ++i) {
    const auto& e = spec.branch[i];
    const auto field = "branch[" + std::to_string(i) + "]";
    if (e.degree < 2) out.push_back({field + ".degree", "degree < 2"});
    if (!is_probability(e.prob)) out.push_back({field + ".prob", "probability outside [0, 1]"});
    if (std::find(seen.begin(), seen.end(), e.degree) != seen.end()) {
      out.push_back({field + ".degree", "duplicate degree"});
    }
    seen.push_back(e.degree);
    total += e.prob;

    const auto law = spec.weights.find(e.degree);
    const auto wfield = "weights." + std::to_string(e.degree);
    if (law == spec.weights.end()) {
      out.push_back({wfield, "missing weight law for degree " + std::to_string(e.degree)});
      continue;
    }
    std::visit(
        [&](const auto& w) {
          using T = std::decay_t<decltype(w)>;
          if constexpr (std::is_same_v<T, DeterministicWeights>) {
            check_vector(w.weights, e.degree, wfield + ".vector", out);
          } else if constexpr (std::is_same_v<T, MixtureWeights>) {
            if (w.cases.empty()) out.push_back({wfield + ".cases", "empty mixture"});
            Rational mix(0);
            for (std::size_t c = 0; c < w.cases.size(); ++c) {
              const auto cfield = wfield + ".cases[" + std::to_string(c) + "]";
              if (!is_probability(w.cases[c].prob)) {
                out.push_back({cfield + ".prob", "probability outside [0, 1]"});
              }
              mix += w.cases[c].prob;
              check_vector(w.cases[c].weights, e.degree, cfield + ".vector", out);
            }
            if (!w.cases.empty() && mix != Rational(1)) {
              out.push_back({wfield + ".cases", "mixture probabilities sum ≠ 1"});
            }
          } else if constexpr (std::is_same_v<T, RandomWeights>) {
            if (!w.sample) out.push_back({wfield, "missing sampler"});
            if (!(w.max_weight < 1.0)) out.push_back({wfield, "weight not < 1"});
          }
        },
        law->second);
  }
  if (!spec.branch.empty() && total != Rational(1)) {
    out.push_back({"branch", "branch probabilities sum ≠ 1"});
  }
  return out;
}

bool has_exact_weights(const SplittingSpec& spec) {
  return std::none_of(spec.weights.begin(), spec.weights.end(), [](const auto& kv) {
    return std::holds_alternative<RandomWeights>(kv.second);
  });
}

std::optional<int> symmetric_degree(const SplittingSpec& spec) {
  if (spec.branch.size() != 1 || spec.branch[0].prob != Rational(1)) return std::nullopt;
  const int q = spec.branch[0].degree;
  const auto it = spec.weights.find(q);
  if (it == spec.weights.end()) return std::nullopt;
  if (std::holds_alternative<SymmetricWeights>(it->second)) return q;
  // A deterministic vector of all 1/q is the same algorithm.
  if (const auto* d = std::get_if<DeterministicWeights>(&it->second)) {
    const Rational inv(1, q);
    if (static_cast<int>(d->weights.size()) == q &&
        std::all_of(d->weights.begin(), d->weights.end(), [&](const Rational& w) { return w == inv; })) {
      return q;
    }
  }
  return std::nullopt;
}

Rational expected_branch(const SplittingSpec& spec) {
  Rational eg(0);
  for (const auto& e : spec.branch) eg += e.prob * Rational(e.degree);
  return eg;
}

SplittingMeasure SplittingMeasure::from_atoms(std::vector<Atom> atoms,
                                              std::optional<double> expected_branch) {
  std::map<Rational, Rational> merged;
  Rational total(0);
  for (auto& a : atoms) {
    if (a.value.sign() <= 0 || a.value >= Rational(1)) {
      throw std::invalid_argument("measure atom " + a.value.str() + " outside (0, 1)");
    }
    if (a.mass.sign() < 0) throw std::invalid_argument("negative atom mass");
    total += a.mass;
    if (a.mass.is_zero()) continue;
    merged[a.value] += a.mass;
  }
  if (total != Rational(1)) throw std::invalid_argument("measure masses sum to " + total.str());

  SplittingMeasure m;
  double inv_moment = 0.0;
  for (auto& [v, mass] : merged) {
    const double mv = mass.to_double();
    const double nl = -v.log();
    const double vd = v.to_double();
    m.neg_log_moment_ += mv * nl;
    m.heavy_moment_ += mv * nl / vd;
    inv_moment += mv / vd;
    m.atoms_.push_back({v, mass});
  }
  m.expected_branch_ = expected_branch.value_or(inv_moment);
  return m;
}

std::vector<double> SplittingMeasure::values() const {
  std::vector<double> out;
  for (const auto& a : atoms_) out.push_back(a.value.to_double());
  return out;
}

std::vector<double> SplittingMeasure::masses() const {
  std::vector<double> out;
  for (const auto& a : atoms_) out.push_back(a.mass.to_double());
  return out;
}

SplittingMeasure build_measure(const SplittingSpec& spec) {
  if (!validate(spec).empty()) throw std::invalid_argument("build_measure: invalid spec");
  if (!has_exact_weights(spec)) throw std::invalid_argument("build_measure: random weight law");

  std::vector<Atom> atoms;
  for (const auto& e : spec.branch) {
    if (e.prob.is_zero()) continue;
    const auto& law = spec.weights.at(e.degree);
    // Size-biased weighting: an arc with weight v contributes mass prob * v at v.
    const auto add_vector = [&](const Rational& prob, const std::vector<Rational>& w) {
      for (const auto& v : w) {
        if (v.sign() > 0) atoms.push_back({v, prob * v});
      }
    };
    if (std::holds_alternative<SymmetricWeights>(law)) {
      atoms.push_back({Rational(1, e.degree), e.prob});
    } else if (const auto* d = std::get_if<DeterministicWeights>(&law)) {
      add_vector(e.prob, d->weights);
    } else if (const auto* mix = std::get_if<MixtureWeights>(&law)) {
      for (const auto& c : mix->cases) add_vector(e.prob * c.prob, c.weights);
    }
  }
  return SplittingMeasure::from_atoms(std::move(atoms), expected_branch(spec).to_double());
}

MeasureMoments moments(const SplittingMeasure& measure) {
  return {measure.expected_branch(), measure.neg_log_moment(), measure.heavy_moment(),
          measure.delta()};
}

// ---------------------------------------------------------------------------
// Span detection

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for all 64-bit inputs.
bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

void factor_into(u64 n, int sign, std::map<u64, std::int64_t>& exps) {
  bool prime = is_prime(n);
  for (u64 p = 2; !prime && p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    while (n % p == 0) {
      exps[p] += sign;
      n /= p;
    }
    prime = is_prime(n);
  }
  if (n > 1) exps[n] += sign;
}

std::int64_t gcd_abs(std::int64_t a, std::int64_t b) { return std::gcd(std::llabs(a), std::llabs(b)); }

}  // namespace

SpanResult detect_span(const SplittingMeasure& measure, std::uint64_t factor_bound) {
  SpanResult result;
  std::vector<std::map<u64, std::int64_t>> vectors;
  for (const auto& atom : measure.atoms()) {
    const auto num = atom.value.numerator();
    const auto den = atom.value.denominator();
    for (const auto* z : {&num, &den}) {
      if (!z->fits_ulong_p() || z->get_ui() > factor_bound) {
        result.kind = SpanKind::undecidable;
        result.note = "atom " + atom.value.str() + " exceeds factorization bound " +
                      std::to_string(factor_bound);
        return result;
      }
    }
    std::map<u64, std::int64_t> e;
    factor_into(num.get_ui(), +1, e);
    factor_into(den.get_ui(), -1, e);
    std::erase_if(e, [](const auto& kv) { return kv.second == 0; });
    vectors.push_back(std::move(e));
  }

  // Primitive direction from the first atom; every other exponent vector must
  // be a positive integer multiple of it.
  std::int64_t g0 = 0;
  for (const auto& [p, k] : vectors.front()) g0 = gcd_abs(g0, k);
  std::map<u64, std::int64_t> dir;
  for (const auto& [p, k] : vectors.front()) dir[p] = k / g0;

  std::vector<std::int64_t> mult;
  for (const auto& e : vectors) {
    if (e.size() != dir.size()) return result;
    const auto& [p0, d0] = *dir.begin();
    const auto it0 = e.find(p0);
    if (it0 == e.end() || it0->second % d0 != 0) return result;
    const std::int64_t k = it0->second / d0;
    if (k <= 0) return result;
    for (const auto& [p, d] : dir) {
      const auto it = e.find(p);
      if (it == e.end() || it->second != k * d) return result;
    }
    mult.push_back(k);
  }

  std::int64_t g = 0;
  for (auto k : mult) g = std::gcd(g, k);
  for (auto& k : mult) k /= g;

  Rational base(1);
  for (const auto& [p, d] : dir) {
    const Rational prime(static_cast<long>(p));
    const auto step = pow(prime, static_cast<unsigned long>(std::llabs(d * g)));
    if (d > 0) base *= step;
    else base /= step;
  }
  result.kind = SpanKind::arithmetic;
  result.lambda = -base.log();
  result.multipliers = std::move(mult);
  result.base = base;
  return result;
}

}  // namespace splitting
