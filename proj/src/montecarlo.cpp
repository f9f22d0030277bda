#include "splitting/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "splitting/asymptotics.hpp"
#include "splitting/errors.hpp"
#include "splitting/parallel.hpp"
#include "splitting/report.hpp"

namespace splitting {

namespace {

// Categorical draw over cumulative probabilities; the last positive entry is
// widened past 1 so rounding in the cumulative sum never strands a draw.
std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> c(probs.size());
  double s = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    s += probs[i];
    c[i] = s;
    if (probs[i] > 0.0) last = i;
  }
  for (std::size_t i = last; i < c.size(); ++i) c[i] = 2.0;
  return c;
}

std::size_t pick(const std::vector<double>& cum, double u) {
  return static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
}

std::vector<double> to_doubles(const std::vector<Rational>& w) {
  std::vector<double> out;
  for (const auto& x : w) out.push_back(x.to_double());
  return out;
}

class Splitter {
 public:
  explicit Splitter(const SplittingSpec& spec) {
    std::vector<double> probs;
    for (const auto& e : spec.branch) {
      probs.push_back(e.prob.to_double());
      Law law;
      law.degree = e.degree;
      const auto& w = spec.weights.at(e.degree);
      if (std::holds_alternative<SymmetricWeights>(w)) {
        law.cases.push_back(cumulative(std::vector<double>(e.degree, 1.0 / e.degree)));
        law.case_cum = {2.0};
      } else if (const auto* d = std::get_if<DeterministicWeights>(&w)) {
        law.cases.push_back(cumulative(to_doubles(d->weights)));
        law.case_cum = {2.0};
      } else if (const auto* m = std::get_if<MixtureWeights>(&w)) {
        std::vector<double> cp;
        for (const auto& c : m->cases) {
          cp.push_back(c.prob.to_double());
          law.cases.push_back(cumulative(to_doubles(c.weights)));
        }
        law.case_cum = cumulative(cp);
      } else {
        law.random = &std::get<RandomWeights>(w);
      }
      laws_.push_back(std::move(law));
    }
    branch_cum_ = cumulative(probs);
  }

  // Routes n items; counts receives one entry per subset.
  void split(long n, Rng& rng, std::vector<long>& counts, std::vector<double>& scratch) const {
    const Law& law = laws_[branch_cum_.size() == 1 ? 0 : pick(branch_cum_, rng.uniform())];
    const std::vector<double>* cum;
    if (law.random) {
      scratch.assign(law.degree, 0.0);
      law.random->sample(rng, scratch);
      std::vector<double> w(scratch);
      scratch = cumulative(w);
      cum = &scratch;
    } else {
      cum = &law.cases[law.cases.size() == 1 ? 0 : pick(law.case_cum, rng.uniform())];
    }
    counts.assign(law.degree, 0);
    for (long i = 0; i < n; ++i) ++counts[pick(*cum, rng.uniform())];
  }

 private:
  struct Law {
    int degree = 0;
    std::vector<std::vector<double>> cases;  // cumulative weights
    std::vector<double> case_cum;
    const RandomWeights* random = nullptr;
  };
  std::vector<Law> laws_;
  std::vector<double> branch_cum_;
};

TreeStats simulate_with(const Splitter& splitter, int threshold, long n, Rng& rng, const SimLimits& limits) {
  TreeStats st;
  if (n < threshold) return st;
  std::vector<long> frontier{n}, next, counts;
  std::vector<double> scratch;
  long splits = 0;
  bool full = true;
  while (!frontier.empty()) {
    ++st.max_depth;
    if (full) ++st.full_levels;
    long level = 0;
    bool all_internal = true;
    next.clear();
    for (long m : frontier) {
      if (++splits > limits.node_budget) {
        throw BudgetError("simulate_tree: split budget " + std::to_string(limits.node_budget) + " exceeded");
      }
      splitter.split(m, rng, counts, scratch);
      level += static_cast<long>(counts.size());
      for (long c : counts) {
        if (c >= threshold) {
          next.push_back(c);
        } else {
          all_internal = false;
        }
      }
    }
    st.level_nodes.push_back(level);
    st.cost += level;
    full = full && all_internal;
    std::swap(frontier, next);
  }
  return st;
}

McEstimate to_estimate(std::span<const double> values, double offset, double scale, std::uint64_t seed) {
  const auto s = summarize(values);
  McEstimate e;
  e.mean = offset + scale * s.mean;
  e.std_err = scale * s.std_err;
  e.replicas = static_cast<long>(values.size());
  e.seed = seed;
  return e;
}

void require_replicas(long replicas) {
  if (replicas < 2) throw std::invalid_argument("need at least two replicas");
}

}  // namespace

TreeStats simulate_tree(const SplittingSpec& spec, long n, Rng& rng, const SimLimits& limits) {
  if (!validate(spec).empty()) throw std::invalid_argument("simulate_tree: invalid spec");
  return simulate_with(Splitter(spec), spec.threshold, n, rng, limits);
}

std::vector<TreeStats> simulate_trees(const SplittingSpec& spec, long n, long replicas, std::uint64_t seed,
                                      unsigned threads, const SimLimits& limits) {
  if (!validate(spec).empty()) throw std::invalid_argument("simulate_trees: invalid spec");
  const Splitter splitter(spec);
  return map_indexed<TreeStats>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Rng rng(StreamKey(seed, Stream::tree, i));
    return simulate_with(splitter, spec.threshold, n, rng, limits);
  });
}

McEstimate summarize_trees(const std::vector<TreeStats>& trees, std::uint64_t seed) {
  std::vector<double> cost, depth, full;
  for (const auto& t : trees) {
    cost.push_back(static_cast<double>(t.cost));
    depth.push_back(t.max_depth);
    full.push_back(t.full_levels);
  }
  auto e = to_estimate(cost, 0.0, 1.0, seed);
  e.extras["mean_max_depth"] = summarize(depth).mean;
  e.extras["mean_full_levels"] = summarize(full).mean;
  return e;
}

McEstimate estimate_cost(const SplittingSpec& spec, long n, long replicas, std::uint64_t seed, unsigned threads,
                         const SimLimits& limits) {
  require_replicas(replicas);
  return summarize_trees(simulate_trees(spec, n, replicas, seed, threads, limits), seed);
}

MeasureSampler::MeasureSampler(const SplittingMeasure& measure)
    : cumulative_(cumulative(measure.masses())), values_(measure.values()) {
  for (double v : values_) neg_logs_.push_back(-std::log(v));
}

std::size_t MeasureSampler::index(Rng& rng) const {
  return cumulative_.size() == 1 ? 0 : pick(cumulative_, rng.uniform());
}

double MeasureSampler::operator()(Rng& rng) const { return values_[index(rng)]; }

double MeasureSampler::neg_log(Rng& rng) const { return neg_logs_[index(rng)]; }

double rep8_replica(const MeasureSampler& sampler, int threshold, double x, Rng& rng, long max_steps) {
  const double t = rng.gamma_int(threshold);
  double sum = 0.0, prod = 1.0;
  for (long steps = 0; t <= x * prod; ++steps) {
    if (steps >= max_steps) throw BudgetError("rep8: step guard exceeded");
    sum += 1.0 / prod;
    prod *= sampler(rng);
  }
  return sum;
}

McEstimate rep8_estimate(const SplittingMeasure& measure, double expected_branch, int threshold, double x,
                         long replicas, std::uint64_t seed, unsigned threads, const SimLimits& limits) {
  require_replicas(replicas);
  if (!(x > 0.0)) throw std::invalid_argument("rep8_estimate: x must be > 0");
  const MeasureSampler sampler(measure);
  const auto vals = map_indexed<double>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Rng rng(StreamKey(seed, Stream::rep8, i));
    return rep8_replica(sampler, threshold, x, rng, limits.max_steps);
  });
  return to_estimate(vals, 1.0, expected_branch, seed);
}

double order_statistic(int d, long n, Rng& rng) {
  const double head = rng.gamma_int(d);
  double rest = 0.0;
  for (long i = d; i <= n; ++i) rest += rng.exponential();
  return head / (head + rest);
}

double rep12_replica(const MeasureSampler& sampler, int threshold, long n, Rng& rng, long max_steps) {
  const double u = order_statistic(threshold, n, rng);
  double sum = 0.0, prod = 1.0;
  for (long steps = 0;; ++steps) {
    if (steps >= max_steps) throw BudgetError("rep12: step guard exceeded");
    sum += 1.0 / prod;
    prod *= sampler(rng);
    if (prod < u) return sum;
  }
}

McEstimate rep12_estimate(const SplittingMeasure& measure, double expected_branch, int threshold, long n,
                          long replicas, std::uint64_t seed, unsigned threads, const SimLimits& limits) {
  require_replicas(replicas);
  if (n < threshold) throw std::invalid_argument("rep12_estimate: n < D");
  const MeasureSampler sampler(measure);
  const auto vals = map_indexed<double>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Rng rng(StreamKey(seed, Stream::rep12, i));
    return rep12_replica(sampler, threshold, n, rng, limits.max_steps);
  });
  return to_estimate(vals, 1.0, expected_branch, seed);
}

PsiWalkResult psi_walk(const WalkConfig& config, long replicas, std::uint64_t seed, unsigned threads) {
  require_replicas(replicas);
  if (!(config.x >= 0.0)) throw std::invalid_argument("psi_walk: x < 0");
  const MeasureSampler sampler(config.measure);
  const double x = config.x;
  const auto vals = map_indexed<std::pair<double, double>>(
      static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
        Rng rng(StreamKey(seed, Stream::psi, i));
        double s = 0.0, psi = 0.0;
        for (long steps = 0; s <= x; ++steps) {
          if (steps >= config.max_steps) throw BudgetError("psi_walk: step guard exceeded");
          psi += std::exp(s - x);
          s += sampler.neg_log(rng);
        }
        return std::pair{psi, std::exp(s - x)};
      });
  std::vector<double> psi, over;
  for (const auto& [p, o] : vals) {
    psi.push_back(p);
    over.push_back(o);
  }
  return {to_estimate(psi, 0.0, 1.0, seed), to_estimate(over, 0.0, 1.0, seed)};
}

double overshoot_bound(const SplittingMeasure& measure) {
  double s = 0.0;
  for (const auto& a : measure.atoms()) {
    const double v = a.value.to_double();
    s += a.mass.to_double() * (1.0 - std::log(v)) / v;
  }
  return s - 1.0;
}

TreeStats qadic_tree(int q, int threshold, std::span<const double> points) {
  if (q < 2 || threshold < 2) throw std::invalid_argument("qadic_tree: need Q >= 2, D >= 2");
  TreeStats st;
  if (static_cast<long>(points.size()) < threshold) return st;
  // z holds each point's offset inside its current interval, scaled to [0, 1);
  // one more Q-adic digit is peeled off per level.
  std::vector<double> z(points.begin(), points.end());
  std::sort(z.begin(), z.end());
  std::vector<std::pair<std::size_t, std::size_t>> frontier{{0, z.size()}}, next;
  double intervals = 1.0;  // Q^p
  bool full = true;
  constexpr int kMaxLevels = 4096;
  while (!frontier.empty()) {
    if (st.max_depth >= kMaxLevels) throw BudgetError("qadic_tree: depth guard exceeded");
    ++st.max_depth;
    full = full && static_cast<double>(frontier.size()) == intervals;
    if (full) ++st.full_levels;
    next.clear();
    for (const auto& [lo, hi] : frontier) {
      std::size_t start = lo;
      int digit = 0;
      for (std::size_t i = lo; i <= hi; ++i) {
        int d = q;  // sentinel closes the final run
        if (i < hi) {
          d = std::min(q - 1, static_cast<int>(z[i] * q));
          z[i] = z[i] * q - d;
        }
        if (d != digit) {
          if (static_cast<long>(i - start) >= threshold) next.emplace_back(start, i);
          start = i;
          digit = d;
        }
      }
    }
    const long level = static_cast<long>(frontier.size()) * q;
    st.level_nodes.push_back(level);
    st.cost += level;
    intervals *= q;
    std::swap(frontier, next);
  }
  return st;
}

long qadic_sample_rn(int q, int threshold, long n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("qadic_sample_rn: n < 0");
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) p = rng.uniform();
  return qadic_tree(q, threshold, pts).cost;
}

std::vector<std::pair<double, double>> poisson_points(double x_max, Rng& rng) {
  std::vector<std::pair<double, double>> pts;
  for (double t = rng.exponential(); t <= x_max; t += rng.exponential()) pts.emplace_back(rng.uniform(), t);
  return pts;
}

long qadic_cost_at(int q, int threshold, const std::vector<std::pair<double, double>>& points, double x) {
  std::vector<double> pos;
  for (const auto& [u, t] : points) {
    if (t <= x) pos.push_back(u);
  }
  return qadic_tree(q, threshold, pos).cost;
}

long poisson_qadic_sample(int q, int threshold, double x, Rng& rng) {
  if (!(x > 0.0)) throw std::invalid_argument("poisson_qadic_sample: x must be > 0");
  return qadic_cost_at(q, threshold, poisson_points(x, rng), x);
}

McEstimate qadic_estimate(int q, int threshold, long n, long replicas, std::uint64_t seed, unsigned threads) {
  require_replicas(replicas);
  const auto vals = map_indexed<double>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Rng rng(StreamKey(seed, Stream::qadic, i));
    return static_cast<double>(qadic_sample_rn(q, threshold, n, rng));
  });
  return to_estimate(vals, 0.0, 1.0, seed);
}

McEstimate poisson_qadic_estimate(int q, int threshold, double x, long replicas, std::uint64_t seed,
                                  unsigned threads) {
  require_replicas(replicas);
  const auto vals = map_indexed<double>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Rng rng(StreamKey(seed, Stream::poisson_qadic, i));
    return static_cast<double>(poisson_qadic_sample(q, threshold, x, rng));
  });
  return to_estimate(vals, 0.0, 1.0, seed);
}

namespace {

// Replica streams for the j-th x of a study.
std::uint64_t study_replica(std::size_t j, std::size_t i) { return (static_cast<std::uint64_t>(j) << 40) | i; }

}  // namespace

std::vector<LlnRow> lln_study(int q, int threshold, const std::vector<double>& x_list, long replicas, double eps,
                              std::uint64_t seed, unsigned threads) {
  if (!(eps > 0.0)) throw std::invalid_argument("lln_study: eps must be > 0");
  require_replicas(replicas);
  std::vector<LlnRow> rows;
  const double lq = std::log(static_cast<double>(q));
  for (std::size_t j = 0; j < x_list.size(); ++j) {
    const double x = x_list[j];
    LlnRow row;
    row.x = x;
    row.replicas = replicas;
    row.f1 = f1_quadrature(q, threshold, frac(std::log(x) / lq));
    const auto hits = map_indexed<int>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
      Rng rng(StreamKey(seed, Stream::lln, study_replica(j, i)));
      const double r = static_cast<double>(poisson_qadic_sample(q, threshold, x, rng));
      return std::abs(r / (x * row.f1) - 1.0) >= eps ? 1 : 0;
    });
    long count = 0;
    for (int h : hits) count += h;
    row.frequency = static_cast<double>(count) / replicas;
    row.std_err = std::sqrt(row.frequency * (1.0 - row.frequency) / replicas);
    rows.push_back(row);
  }
  return rows;
}

CltResult clt_study(int q, int threshold, double y, int big_n, long replicas, std::uint64_t seed, unsigned threads) {
  if (!(y > 0.0 && y < q)) throw std::invalid_argument("clt_study: y outside (0, Q)");
  if (big_n < 8) throw std::invalid_argument("clt_study: N < 8");
  require_replicas(replicas);
  CltResult r;
  r.x = y * std::pow(static_cast<double>(q), big_n);
  r.replicas = replicas;
  r.samples = map_indexed<double>(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Rng rng(StreamKey(seed, Stream::clt, i));
    return static_cast<double>(poisson_qadic_sample(q, threshold, r.x, rng));
  });
  const auto s = summarize(r.samples);
  r.mean = s.mean;
  r.variance = s.variance;
  r.variance_per_x = s.variance / r.x;
  const double sd = std::sqrt(s.variance);
  std::vector<double> z1, z3, z4;
  for (double v : r.samples) {
    const double z = (v - s.mean) / sd;
    z1.push_back(z);
    z3.push_back(z * z * z);
    z4.push_back(z * z * z * z);
  }
  const double n = static_cast<double>(replicas);
  r.standardized_mean = pairwise_sum(z1) / n;
  r.skewness = pairwise_sum(z3) / n;
  r.excess_kurtosis = pairwise_sum(z4) / n - 3.0;
  const auto f2 = f2_quadrature(q, threshold, frac(std::log(r.x) / std::log(static_cast<double>(q))));
  r.f2 = f2.value;
  r.f2_error = f2.error;
  r.variance_ratio = r.variance_per_x / r.f2;
  return r;
}

std::string estimate_json(const std::string& op, const std::map<std::string, double>& params,
                          const McEstimate& est) {
  nlohmann::ordered_json j;
  j["op"] = op;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params) j["params"][k] = v;
  j["mean"] = est.mean;
  j["stderr"] = est.std_err;
  j["replicas"] = est.replicas;
  j["seed"] = est.seed;
  j["extras"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : est.extras) j["extras"][k] = v;
  return dump_json(j);
}

}  // namespace splitting
