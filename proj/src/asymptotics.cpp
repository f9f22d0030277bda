#include "splitting/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "splitting/errors.hpp"
#include "splitting/parallel.hpp"
#include "splitting/report.hpp"
#include "splitting/rng.hpp"
#include "splitting/special.hpp"

namespace splitting {

double limit_constant(const SplittingMeasure& measure, double expected_branch, int threshold) {
  if (threshold < 2) throw std::invalid_argument("limit_constant: D < 2");
  return expected_branch / ((threshold - 1) * measure.neg_log_moment());
}

double frac(double z) { return z - std::floor(z); }

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::F: return "F";
    case ProfileKind::F1: return "F1";
    case ProfileKind::F2: return "F2";
  }
  return "?";
}

std::string to_string(ProfileMethod method) {
  switch (method) {
    case ProfileMethod::kink_quadrature: return "kink-quadrature";
    case ProfileMethod::series: return "series";
    case ProfileMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

std::vector<double> unit_grid(int size) {
  if (size < 1) throw std::invalid_argument("grid size < 1");
  std::vector<double> g(size);
  for (int i = 0; i < size; ++i) g[i] = static_cast<double>(i) / size;
  return g;
}

namespace {

// sum_m e^{lambda (m - x)} P(e^{lambda (x-m-1)} < t_D <= e^{lambda (x-m)}):
// between consecutive kinks the fractional part is affine in log y, so each
// piece integrates y^{D-1} e^{-y} / (D-1)! exactly.
double kink_sum(double lambda, int threshold, double x, double tol) {
  const double shrink = std::exp(-lambda * (threshold - 1));
  double sum = 0.0;
  for (long m = 0;; ++m) {
    const double scale = std::exp(lambda * (m - x));
    const double hi = std::exp(lambda * (x - m));
    sum += scale * gamma_increment(threshold, hi * std::exp(-lambda), hi);
    // Remaining terms are below scale * hi^D / D! times a geometric factor.
    const double rest = std::exp(-lambda * (m - x) * (threshold - 1) - log_factorial(threshold)) *
                        shrink / (1.0 - shrink);
    if (m > 0 && rest < 0.01 * tol) break;
  }
  for (long m = -1;; --m) {
    const double scale = std::exp(lambda * (m - x));
    const double hi = std::exp(lambda * (x - m));
    const double lo = hi * std::exp(-lambda);
    sum += scale * gamma_increment(threshold, lo, hi);
    if (lo > threshold + 1.0 && scale * gamma_q(threshold, lo) < 0.01 * tol) break;
  }
  return sum;
}

}  // namespace

double periodic_F(const SplittingMeasure& measure, double expected_branch, int threshold,
                  double lambda, double x, double tol) {
  if (!(lambda > 0.0)) throw std::invalid_argument("periodic_F: lambda must be > 0");
  const double c = expected_branch / measure.neg_log_moment() * lambda / -std::expm1(-lambda);
  return c * kink_sum(lambda, threshold, x, tol / c);
}

PeriodicProfile periodic_profile_F(const SplittingMeasure& measure, double expected_branch,
                                   int threshold, const SpanResult& span, int grid_size, double tol) {
  if (!span.arithmetic() || !span.lambda) {
    throw std::invalid_argument("periodic_profile_F: span is not arithmetic");
  }
  PeriodicProfile p;
  p.kind = ProfileKind::F;
  p.lambda = *span.lambda;
  p.grid = unit_grid(grid_size);
  p.method = ProfileMethod::kink_quadrature;
  p.tol = tol;
  for (double x : p.grid) p.values.push_back(periodic_F(measure, expected_branch, threshold, p.lambda, x, tol));
  return p;
}

double f1_quadrature(int q, int threshold, double x, double tol) {
  if (q < 2 || threshold < 2) throw std::invalid_argument("f1_quadrature: need Q >= 2, D >= 2");
  const double qd = q;
  const double pre = qd * qd / (qd - 1.0);
  // Pieces u in (Q^{x-m-1}, Q^{x-m}] where {x - log_Q u} = x - log_Q u - m.
  double sum = 0.0;
  for (int m = 0;; ++m) {
    const double hi = std::pow(qd, x - m);
    const double piece = gamma_increment(threshold, hi / qd, hi) / hi;
    sum += piece;
    if (m > 0 && pre * std::pow(hi, threshold - 1) / (qd - 1.0) < 0.01 * tol) break;
  }
  for (int m = -1;; --m) {
    const double hi = std::pow(qd, x - m);
    const double lo = hi / qd;
    sum += gamma_increment(threshold, lo, hi) / hi;
    if (lo > threshold + 1.0 && pre * gamma_q(threshold, lo) / hi < 0.01 * tol) break;
  }
  return pre * sum;
}

double f1_series(int q, int threshold, double y, double tol) {
  if (q < 2 || threshold < 2) throw std::invalid_argument("f1_series: need Q >= 2, D >= 2");
  if (!(y > 0.0 && y <= q)) throw std::invalid_argument("f1_series: y outside (0, Q]");
  const double qd = q;
  double up = 0.0;
  for (int n = 0;; ++n) {
    const double s = y * std::pow(qd, n);
    up += gamma_p(threshold, s) / s;
    if (qd / (s * qd - s) * qd < 0.01 * tol) break;  // Q * sum_{k>n} 1/(y Q^k)
  }
  double down = 0.0;
  for (int n = -1;; --n) {
    const double s = y * std::pow(qd, n);
    down += gamma_p(threshold, s) / s;
    const double bound = qd * std::pow(s, threshold - 1) * std::exp(-log_factorial(threshold));
    if (bound < 0.01 * tol) break;
  }
  return qd * (up + down);
}

PeriodicProfile f1_profile(int q, int threshold, int grid_size, double tol) {
  PeriodicProfile p;
  p.kind = ProfileKind::F1;
  p.lambda = std::log(static_cast<double>(q));
  p.grid = unit_grid(grid_size);
  p.method = ProfileMethod::kink_quadrature;
  p.tol = tol;
  for (double x : p.grid) p.values.push_back(f1_quadrature(q, threshold, x, tol));
  return p;
}

namespace {

// The integrand in terms of log_Q u, a and A = Q^{-a} / u (likewise for v).
double f2_core(double qd, double tu, double a, double big_a, double tv, double b, double big_b) {
  const double lead = qd / (qd - 1.0);
  const double gap = (tv - tu) - a + b;
  double s = 0.0;
  if (gap > 0.0) s += lead * (big_a - big_b);
  if (gap > 1.0) s += 2.0 * lead * (gap - 1.0) * big_a;
  const double e = big_a - qd * big_b;
  if (e > 0.0) s -= 2.0 * lead / (qd - 1.0) * e;
  return qd * qd * s;
}

}  // namespace

double f2_integrand(int q, double a, double b, double u, double v) {
  const double qd = q;
  const double lq = std::log(qd);
  return f2_core(qd, std::log(u) / lq, a, std::pow(qd, -a) / u, std::log(v) / lq, b,
                 std::pow(qd, -b) / v);
}

namespace {

constexpr std::array<double, 8> kGaussNodes = {
    -0.96028985649753623168, -0.79666647741362673959, -0.52553240991632898582, -0.18343464249564980494,
    0.18343464249564980494,  0.52553240991632898582,  0.79666647741362673959,  0.96028985649753623168};
constexpr std::array<double, 8> kGaussWeights = {
    0.10122853629037625915, 0.22238103445337447054, 0.31370664587788728734, 0.36268378325365312342,
    0.36268378325365312342, 0.31370664587788728734, 0.22238103445337447054, 0.10122853629037625915};

struct Node {
  double t;       // log_Q u
  double a;       // {x - t}
  double big_a;   // Q^{-a} / u
  double weight;  // quadrature weight times the Gamma(D) density in t
};

// Gamma(D, 1) density with respect to t = log_Q u.
double density_in_log(int threshold, double lq, double t) {
  const double u = std::exp(t * lq);
  return std::exp(threshold * std::log(u) - u - log_factorial(threshold - 1)) * lq;
}

double gauss8(int threshold, double lq, double lo, double hi) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double s = 0.0;
  for (int k = 0; k < 8; ++k) s += kGaussWeights[k] * density_in_log(threshold, lq, mid + half * kGaussNodes[k]);
  return half * s;
}

// Splits [lo, hi] until Gauss-8 of the density stops changing under bisection.
void refine_piece(int threshold, double lq, double lo, double hi, int depth, std::vector<double>& cuts) {
  const double mid = 0.5 * (lo + hi);
  const double whole = gauss8(threshold, lq, lo, hi);
  const double parts = gauss8(threshold, lq, lo, mid) + gauss8(threshold, lq, mid, hi);
  if (depth < 16 && std::abs(whole - parts) > 1e-17) {
    refine_piece(threshold, lq, lo, mid, depth + 1, cuts);
    refine_piece(threshold, lq, mid, hi, depth + 1, cuts);
    return;
  }
  cuts.push_back(hi);
}

std::vector<Node> nodes_for(const std::vector<double>& cuts, int threshold, double qd, double x, int halvings) {
  const double lq = std::log(qd);
  std::vector<Node> out;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const int parts = 1 << halvings;
    const double width = (cuts[c + 1] - cuts[c]) / parts;
    for (int p = 0; p < parts; ++p) {
      const double lo = cuts[c] + p * width;
      const double mid = lo + 0.5 * width;
      for (int k = 0; k < 8; ++k) {
        const double t = mid + 0.5 * width * kGaussNodes[k];
        const double a = frac(x - t);
        out.push_back({t, a, std::exp(-(a + t) * lq), 0.5 * width * kGaussWeights[k] * density_in_log(threshold, lq, t)});
      }
    }
  }
  return out;
}

double tensor_sum(double qd, const std::vector<Node>& nodes) {
  // Row sums are kept separate and then added pairwise so the result does
  // not depend on accumulation drift across a long loop.
  std::vector<double> rows(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    double s = 0.0;
    for (const auto& m : nodes) s += m.weight * f2_core(qd, n.t, n.a, n.big_a, m.t, m.a, m.big_a);
    rows[i] = n.weight * s;
  }
  return pairwise_sum(rows);
}

}  // namespace

F2Value f2_quadrature(int q, int threshold, double x, double tol) {
  if (q < 2 || threshold < 2) throw std::invalid_argument("f2_quadrature: need Q >= 2, D >= 2");
  const double qd = q;
  const double lq = std::log(qd);
  // Cells in t = log_Q u run between kinks x - m. Below t_min the mass times
  // Q^{-t} is negligible; above t_max the Gamma tail is.
  const double t_min = -(16.0 / (threshold - 1)) * std::log(10.0) / lq;
  const double t_max = std::log(threshold + 48.0) / lq;
  const double first = std::floor(t_min - x) + x;
  std::vector<double> cuts{first};
  for (double c = first; c < t_max;) {
    const double next = c + 1.0;
    refine_piece(threshold, lq, c, next, 0, cuts);
    c = next;
  }
  const double coarse = tensor_sum(qd, nodes_for(cuts, threshold, qd, x, 0));
  const double fine = tensor_sum(qd, nodes_for(cuts, threshold, qd, x, 1));
  const F2Value out{fine, std::abs(fine - coarse)};
  if (!(out.error <= tol)) {
    throw ResourceError("f2_quadrature: refinement error " + fmt17(out.error) + " above tolerance " + fmt17(tol));
  }
  return out;
}

F2Value f2_monte_carlo(int q, int threshold, double x, std::uint64_t pairs, std::uint64_t seed, unsigned threads) {
  if (q < 2 || threshold < 2) throw std::invalid_argument("f2_monte_carlo: need Q >= 2, D >= 2");
  if (pairs < 2) throw std::invalid_argument("f2_monte_carlo: need at least two pairs");
  constexpr std::uint64_t kChunk = 1 << 16;
  const std::uint64_t chunks = (pairs + kChunk - 1) / kChunk;
  const double qd = q;
  const double lq = std::log(qd);
  // Distinct grid points get distinct streams through the bits of x.
  const auto x_tag = std::bit_cast<std::uint64_t>(x);

  struct Moments {
    double n = 0, mean = 0, m2 = 0;
  };
  const auto parts = map_indexed<Moments>(chunks, threads, [&](std::size_t c) {
    Rng rng(StreamKey(seed ^ splitmix64(x_tag), Stream::f2, c));
    const std::uint64_t count = std::min(kChunk, pairs - c * kChunk);
    Moments m;
    for (std::uint64_t k = 0; k < count; ++k) {
      const double u = rng.gamma_int(threshold), v = rng.gamma_int(threshold);
      const double tu = std::log(u) / lq, tv = std::log(v) / lq;
      const double a = frac(x - tu), b = frac(x - tv);
      const double big_a = std::exp(-(a + tu) * lq), big_b = std::exp(-(b + tv) * lq);
      const double val = 0.5 * (f2_core(qd, tu, a, big_a, tv, b, big_b) + f2_core(qd, tv, b, big_b, tu, a, big_a));
      m.n += 1.0;
      const double d = val - m.mean;
      m.mean += d / m.n;
      m.m2 += d * (val - m.mean);
    }
    return m;
  });
  Moments tot;
  for (const auto& m : parts) {
    const double n = tot.n + m.n;
    const double d = m.mean - tot.mean;
    tot.mean += d * m.n / n;
    tot.m2 += m.m2 + d * d * tot.n * m.n / n;
    tot.n = n;
  }
  return {tot.mean, std::sqrt(tot.m2 / (tot.n - 1.0) / tot.n)};
}

PeriodicProfile f2_profile(int q, int threshold, int grid_size, ProfileMethod method, std::uint64_t seed,
                           std::uint64_t pairs, unsigned threads) {
  PeriodicProfile p;
  p.kind = ProfileKind::F2;
  p.lambda = std::log(static_cast<double>(q));
  p.grid = unit_grid(grid_size);
  p.method = method;
  for (double x : p.grid) {
    F2Value v;
    if (method == ProfileMethod::kink_quadrature) {
      v = f2_quadrature(q, threshold, x);
    } else if (method == ProfileMethod::monte_carlo) {
      v = f2_monte_carlo(q, threshold, x, pairs, seed, threads);
    } else {
      throw std::invalid_argument("f2_profile: no series method");
    }
    p.values.push_back(v.value);
    p.errors.push_back(v.error);
  }
  p.tol = p.errors.empty() ? 0.0 : *std::max_element(p.errors.begin(), p.errors.end());
  return p;
}

std::string profile_csv(const PeriodicProfile& profile) {
  std::string out = "x,value,method,tol\n";
  const auto method = to_string(profile.method);
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const double tol = profile.errors.empty() ? profile.tol : profile.errors[i];
    out += fmt17(profile.grid[i]) + "," + fmt17(profile.values[i]) + "," + method + "," + fmt17(tol) + "\n";
  }
  return out;
}

std::function<double(long)> predicted_ratio(const SplittingMeasure& measure, double expected_branch,
                                            int threshold, const SpanResult& span) {
  if (span.arithmetic() && span.lambda) {
    const double lambda = *span.lambda;
    return [=](long n) {
      return periodic_F(measure, expected_branch, threshold, lambda, frac(std::log(static_cast<double>(n)) / lambda));
    };
  }
  const double c = limit_constant(measure, expected_branch, threshold);
  return [c](long) { return c; };
}

std::vector<ConvergenceRow> convergence_report(const SplittingMeasure& measure, double expected_branch,
                                               int threshold, const SpanResult& span,
                                               const std::vector<long>& n_list,
                                               const std::function<double(long)>& expected_cost) {
  if (!std::is_sorted(n_list.begin(), n_list.end())) {
    throw std::invalid_argument("convergence_report: n_list must be ascending");
  }
  const auto predict = predicted_ratio(measure, expected_branch, threshold, span);
  std::vector<ConvergenceRow> rows;
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("convergence_report: n must be >= 1");
    ConvergenceRow r;
    r.n = n;
    r.ratio = expected_cost(n) / static_cast<double>(n);
    r.predicted = predict(n);
    r.rel_error = std::abs(r.ratio - r.predicted) / r.predicted;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ConvergenceRow> convergence_report(const SplittingMeasure& measure, double expected_branch,
                                               int threshold, const SpanResult& span,
                                               const std::vector<long>& n_list, const CostTable& table) {
  return convergence_report(measure, expected_branch, threshold, span, n_list, [&](long n) {
    if (n < 0 || static_cast<std::size_t>(n) > table.n_max()) {
      throw std::out_of_range("convergence_report: n beyond the cost table");
    }
    return table.values[static_cast<std::size_t>(n)];
  });
}

std::vector<long> geometric_n_grid(double base, int k_min, int k_max, int y_points) {
  if (!(base > 1.0) || k_min > k_max || y_points < 1) throw std::invalid_argument("geometric_n_grid: bad range");
  std::vector<long> out;
  for (int k = k_min; k < k_max; ++k) {
    for (int j = 0; j < y_points; ++j) {
      out.push_back(static_cast<long>(std::floor(std::pow(base, k + static_cast<double>(j) / y_points) + 1e-9)));
    }
  }
  out.push_back(static_cast<long>(std::floor(std::pow(base, k_max) + 1e-9)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::erase_if(out, [](long n) { return n < 1; });
  return out;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "n,ratio,predicted,rel_error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + fmt17(r.ratio) + "," + fmt17(r.predicted) + "," + fmt17(r.rel_error) + "\n";
  }
  return out;
}

}  // namespace splitting
