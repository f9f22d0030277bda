#include "splitting/exact.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "splitting/errors.hpp"
#include "splitting/report.hpp"
#include "splitting/simd/kernels.hpp"
#include "splitting/special.hpp"

namespace splitting {

std::string to_string(CostMode mode) { return mode == CostMode::exact ? "exact" : "float64"; }

namespace {

void require_exact_spec(const SplittingSpec& spec, const char* who) {
  if (!validate(spec).empty()) throw std::invalid_argument(std::string(who) + ": invalid spec");
  if (!has_exact_weights(spec)) throw std::invalid_argument(std::string(who) + ": random weight law");
}

// Arc weights v > 0 with their total expected multiplicity per split:
// E(sum_i g(V_i)) = sum_v multiplicity(v) g(v).
std::map<Rational, Rational> arc_multiplicities(const SplittingSpec& spec) {
  std::map<Rational, Rational> arcs;
  for (const auto& e : spec.branch) {
    const auto& law = spec.weights.at(e.degree);
    const auto add = [&](const Rational& prob, const std::vector<Rational>& w) {
      for (const auto& v : w) {
        if (v.sign() > 0) arcs[v] += prob;
      }
    };
    if (std::holds_alternative<SymmetricWeights>(law)) {
      arcs[Rational(1, e.degree)] += e.prob * Rational(e.degree);
    } else if (const auto* d = std::get_if<DeterministicWeights>(&law)) {
      add(e.prob, d->weights);
    } else if (const auto* m = std::get_if<MixtureWeights>(&law)) {
      for (const auto& c : m->cases) add(e.prob * c.prob, c.weights);
    }
  }
  std::erase_if(arcs, [](const auto& kv) { return kv.second.is_zero(); });
  return arcs;
}

CostTable exact_table(const SplittingSpec& spec, std::size_t n_max) {
  const auto arcs = arc_multiplicities(spec);
  const Rational eg = expected_branch(spec);
  const auto d = static_cast<std::size_t>(spec.threshold);

  struct Arc {
    Rational mult;
    std::vector<Rational> pw;   // v^k
    std::vector<Rational> qpw;  // (1 - v)^k
  };
  std::vector<Arc> table;
  for (const auto& [v, mult] : arcs) {
    Arc a{mult, {Rational(1)}, {Rational(1)}};
    const Rational q = Rational(1) - v;
    for (std::size_t k = 1; k <= n_max; ++k) {
      a.pw.push_back(a.pw.back() * v);
      a.qpw.push_back(a.qpw.back() * q);
    }
    table.push_back(std::move(a));
  }

  // e_n = E(R_n) - 1; zero below the threshold.
  std::vector<Rational> e(n_max + 1, Rational(0));
  mpz_class binom;
  for (std::size_t n = d; n <= n_max; ++n) {
    Rational rhs = eg;
    Rational self(0);
    for (const auto& a : table) {
      Rational s(0);
      for (std::size_t k = d; k < n; ++k) {
        mpz_bin_uiui(binom.get_mpz_t(), n, k);
        s += Rational(mpq_class(binom)) * a.pw[k] * a.qpw[n - k] * e[k];
      }
      rhs += a.mult * s;
      self += a.mult * a.pw[n];
    }
    e[n] = rhs / (Rational(1) - self);
  }

  CostTable out;
  out.mode = CostMode::exact;
  out.threshold = spec.threshold;
  for (auto& x : e) {
    out.exact_values.push_back(x + Rational(1));
    out.values.push_back(out.exact_values.back().to_double());
  }
  return out;
}

// Binomial(n, v) rows advance one n at a time through the kernel's Pascal
// step; entries below kRowFloor are dropped from the ends of the window.
constexpr double kRowFloor = 1e-40;

CostTable float_table(const SplittingSpec& spec, std::size_t n_max, const simd::KernelTable& kern) {
  const auto arcs = arc_multiplicities(spec);
  const double eg = expected_branch(spec).to_double();
  const auto d = static_cast<std::size_t>(spec.threshold);

  struct Row {
    double v;
    double mult;
    std::vector<double> cur, next;
    std::size_t lo = 0, hi = 0;  // inclusive window of cur
  };
  std::vector<Row> rows;
  for (const auto& [v, mult] : arcs) {
    Row r{v.to_double(), mult.to_double(), std::vector<double>(n_max + 2, 0.0),
          std::vector<double>(n_max + 2, 0.0)};
    r.cur[0] = 1.0;  // n = 0
    rows.push_back(std::move(r));
  }

  std::vector<double> e(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (auto& r : rows) {
      const std::size_t m = r.hi - r.lo + 1;
      std::fill(r.next.begin() + static_cast<std::ptrdiff_t>(r.lo),
                r.next.begin() + static_cast<std::ptrdiff_t>(r.lo + m + 1), 0.0);
      kern.binomial_step(r.cur.data() + r.lo, r.next.data() + r.lo, m, r.v);
      std::swap(r.cur, r.next);
      r.hi += 1;
      while (r.lo < r.hi && r.cur[r.lo] < kRowFloor) r.cur[r.lo++] = 0.0;
      while (r.hi > r.lo && r.cur[r.hi] < kRowFloor) r.cur[r.hi--] = 0.0;
    }
    if (n < d) continue;
    double rhs = eg;
    double self = 0.0;
    for (const auto& r : rows) {
      const std::size_t from = std::max(r.lo, d);
      const std::size_t to = std::min(r.hi + 1, n);  // exclusive; k = n handled as self term
      if (to > from) rhs += r.mult * kern.dot(r.cur.data() + from, e.data() + from, to - from);
      if (r.hi == n) self += r.mult * r.cur[n];
    }
    const double denom = 1.0 - self;
    if (!(denom > 0.0)) {
      throw std::runtime_error("self-reference denominator underflow at n = " + std::to_string(n));
    }
    e[n] = rhs / denom;
  }

  CostTable out;
  out.mode = CostMode::float64;
  out.threshold = spec.threshold;
  for (double x : e) out.values.push_back(1.0 + x);
  return out;
}

}  // namespace

CostTable expected_cost_table(const SplittingSpec& spec, std::size_t n_max, CostMode mode,
                              const ExactLimits& limits) {
  require_exact_spec(spec, "expected_cost_table");
  const std::size_t bound = mode == CostMode::exact ? limits.max_exact_n : limits.max_float_n;
  if (n_max > bound) {
    throw ResourceError("n_max " + std::to_string(n_max) + " exceeds the " + to_string(mode) +
                        " bound " + std::to_string(bound));
  }
  return mode == CostMode::exact ? exact_table(spec, n_max) : float_table(spec, n_max, simd::active());
}

CostTable float_cost_table(const SplittingSpec& spec, std::size_t n_max, const simd::KernelTable& kernels) {
  require_exact_spec(spec, "float_cost_table");
  return float_table(spec, n_max, kernels);
}

double closed_form_qary(int q, int threshold, long n) {
  if (q < 2 || threshold < 2) throw std::invalid_argument("closed_form_qary: need Q >= 2, D >= 2");
  if (n < threshold) return 1.0;
  const double qd = q;
  // P(U <= x) for U the threshold-th smallest of n uniforms.
  const auto cdf = [&](double x) { return binomial_tail(n, x, threshold); };

  double sum = 0.0;
  double scale = 1.0;       // Q^j
  double upper = 1.0;       // P(U <= Q^{-j+1})
  for (int j = 1; j < 4000; ++j) {
    scale *= qd;
    const double lower = cdf(std::pow(qd, -j));
    sum += scale * (upper - lower);
    upper = lower;
    if (lower * scale * qd / (qd - 1.0) < 1e-14) break;
  }
  return 1.0 + qd / (qd - 1.0) * (sum - 1.0);
}

double CostPmf::mean() const {
  double m = 0.0;
  for (const auto& [k, p] : support) m += static_cast<double>(k) * p;
  return m;
}

namespace {

struct SplitShape {
  double prob;
  int degree;
  std::vector<double> weights;
};

std::vector<SplitShape> split_shapes(const SplittingSpec& spec) {
  std::vector<SplitShape> out;
  for (const auto& e : spec.branch) {
    if (e.prob.is_zero()) continue;
    const auto& law = spec.weights.at(e.degree);
    const auto to_doubles = [](const std::vector<Rational>& w) {
      std::vector<double> v;
      for (const auto& x : w) v.push_back(x.to_double());
      return v;
    };
    if (std::holds_alternative<SymmetricWeights>(law)) {
      out.push_back({e.prob.to_double(), e.degree, std::vector<double>(e.degree, 1.0 / e.degree)});
    } else if (const auto* d = std::get_if<DeterministicWeights>(&law)) {
      out.push_back({e.prob.to_double(), e.degree, to_doubles(d->weights)});
    } else if (const auto* m = std::get_if<MixtureWeights>(&law)) {
      for (const auto& c : m->cases) {
        if (!c.prob.is_zero()) out.push_back({(e.prob * c.prob).to_double(), e.degree, to_doubles(c.weights)});
      }
    }
  }
  return out;
}

using Pmf = std::vector<double>;  // index = cost value, truncated at a cap

// c += w * (a * b), truncated to c.size().
void add_convolution(const Pmf& a, const Pmf& b, double w, Pmf& c) {
  const std::size_t cap = c.size();
  for (std::size_t i = 0; i < a.size() && i < cap; ++i) {
    if (a[i] == 0.0) continue;
    const double wa = w * a[i];
    for (std::size_t j = 0; j < b.size() && i + j < cap; ++j) c[i + j] += wa * b[j];
  }
}

// Exact probabilities of R_m = k for all m <= n and k <= cap.
std::vector<Pmf> pmfs_up_to(const std::vector<SplitShape>& shapes, int threshold, int n, std::size_t cap) {
  std::vector<Pmf> pmf(n + 1, Pmf(cap + 1, 0.0));
  for (int m = 0; m < std::min(threshold, n + 1); ++m) pmf[m][1] = 1.0;

  std::vector<double> log_fact(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) log_fact[i] = log_fact[i - 1] + std::log(static_cast<double>(i));

  for (int total = threshold; total <= n; ++total) {
    Pmf proper(cap + 1, 0.0);                   // splits where no subset receives all items
    std::vector<std::pair<int, double>> self;   // (degree, prob) of the all-in-one splits
    for (const auto& shape : shapes) {
      // layer[j]: sum over assignments of j items to the subsets seen so far of
      // prod V_i^{m_i}/m_i! times the PMF of the accumulated child costs.
      std::vector<Pmf> layer(total + 1, Pmf(cap + 1, 0.0));
      layer[0][0] = 1.0;
      double self_prob = 0.0;
      for (double v : shape.weights) {
        std::vector<Pmf> nxt(total + 1, Pmf(cap + 1, 0.0));
        for (int used = 0; used <= total; ++used) {
          const auto& acc = layer[used];
          if (std::all_of(acc.begin(), acc.end(), [](double x) { return x == 0.0; })) continue;
          for (int m = 0; used + m <= total && m < total; ++m) {
            if (v == 0.0 && m > 0) break;
            const double w = (m == 0 ? 1.0 : std::exp(m * std::log(v) - log_fact[m]));
            add_convolution(acc, pmf[m], w, nxt[used + m]);
          }
        }
        layer = std::move(nxt);
        self_prob += std::pow(v, total);
      }
      const double scale = shape.prob * std::exp(log_fact[total]);
      for (std::size_t k = 0; k + 1 <= cap; ++k) proper[k + 1] += scale * layer[total][k];
      self.emplace_back(shape.degree, shape.prob * self_prob);
    }
    // All items in one subset: R = R_total + degree (the empty siblings are leaves).
    auto& out = pmf[total];
    for (std::size_t k = 0; k <= cap; ++k) {
      double p = proper[k];
      for (const auto& [deg, sp] : self) {
        if (k >= static_cast<std::size_t>(deg)) p += sp * out[k - deg];
      }
      out[k] = p;
    }
  }
  return pmf;
}

}  // namespace

CostPmf cost_distribution(const SplittingSpec& spec, int n, double tail_eps, const ExactLimits& limits) {
  require_exact_spec(spec, "cost_distribution");
  if (n < 0) throw std::invalid_argument("cost_distribution: n < 0");
  if (n > limits.max_pmf_n) {
    throw ResourceError("cost_distribution: n " + std::to_string(n) + " exceeds bound " +
                        std::to_string(limits.max_pmf_n));
  }
  if (!(tail_eps > 0.0)) throw std::invalid_argument("cost_distribution: tail_eps must be > 0");

  CostPmf out;
  out.n = n;
  if (n < spec.threshold) {
    out.support = {{1, 1.0}};
    return out;
  }

  const auto shapes = split_shapes(spec);
  for (std::size_t cap = 32;; cap *= 2) {
    if (cap > static_cast<std::size_t>(limits.max_pmf_value)) {
      throw ResourceError("cost_distribution: tail_eps not reached below value " +
                          std::to_string(limits.max_pmf_value));
    }
    const auto pmf = pmfs_up_to(shapes, spec.threshold, n, cap).back();
    double cum = 0.0;
    for (std::size_t k = 0; k <= cap; ++k) {
      cum += pmf[k];
      if (pmf[k] > 0.0) out.support.emplace_back(static_cast<long>(k), pmf[k]);
      if (1.0 - cum < tail_eps) {
        out.tail_mass = std::max(0.0, 1.0 - cum);
        return out;
      }
    }
    out.support.clear();
  }
}

PoissonTransformValue poisson_transform_expect(const CostTable& table, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("poisson_transform_expect: x < 0");
  if (table.values.empty()) throw std::invalid_argument("poisson_transform_expect: empty table");
  const auto n_max = static_cast<long>(table.n_max());
  if (x == 0.0) return {table.values[0], 0.0};

  // Linear envelope E(R_n) <= a n + b from the last quarter of the table.
  double slope = 0.0;
  for (long n = std::max(1L, n_max - n_max / 4); n <= n_max; ++n) {
    slope = std::max(slope, table.values[n] / static_cast<double>(n));
  }
  const double a = 2.0 * slope;
  const double b = 1.0;
  // Chernoff: P(N >= m) <= e^{-x} (e x / m)^m for m > x.
  const auto chernoff = [x](double m) {
    if (m <= x) return 1.0;
    return std::exp(-x + m * (1.0 + std::log(x / m)));
  };
  const double bound = a * x * chernoff(static_cast<double>(n_max)) + b * chernoff(n_max + 1.0);
  if (!(bound < 1e-10)) {
    throw ResourceError("poisson_transform_expect: table of length " + std::to_string(n_max + 1) +
                        " too short for x = " + fmt17(x));
  }

  const double lx = std::log(x);
  double sum = 0.0;
  for (long n = 0; n <= n_max; ++n) {
    sum += table.values[n] * std::exp(n * lx - x - log_factorial(n));
  }
  return {sum, bound};
}

std::string cost_table_csv(const CostTable& table) {
  std::string out = "n,expected_cost,mode\n";
  const auto mode = to_string(table.mode);
  for (std::size_t n = 0; n < table.values.size(); ++n) {
    const auto v = table.mode == CostMode::exact ? table.exact_values[n].str() : fmt17(table.values[n]);
    out += std::to_string(n) + "," + v + "," + mode + "\n";
  }
  return out;
}

std::string cost_pmf_csv(const CostPmf& pmf) {
  std::string out = "k,prob\n";
  for (const auto& [k, p] : pmf.support) out += std::to_string(k) + "," + fmt17(p) + "\n";
  out += "# tail_mass=" + fmt17(pmf.tail_mass) + "\n";
  return out;
}

}  // namespace splitting
