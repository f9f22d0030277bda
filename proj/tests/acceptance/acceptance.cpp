// Acceptance run: one PASS/FAIL line per criterion, followed by the checks
// behind it. A criterion passes only when all of its checks pass.
//
// Checks marked `known` are reported red by design: their failure is
// understood and recorded, and they do not change the exit status. Every
// other failing check makes the process exit nonzero.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "splitting/asymptotics.hpp"
#include "splitting/exact.hpp"
#include "splitting/model.hpp"
#include "splitting/montecarlo.hpp"
#include "splitting/report.hpp"
#include "splitting/spec_io.hpp"

namespace fs = std::filesystem;
using namespace splitting;

namespace {

const fs::path kData = SPLITTING_TEST_DATA;
const std::string kTool = SPLITTING_TOOL;
const unsigned kThreads = std::max(1u, std::thread::hardware_concurrency());

struct Check {
  std::string what;
  bool pass = false;
  bool known = false;
};

struct Criterion {
  Criterion() = default;
  Criterion(int id_, std::string title_) : id(id_), title(std::move(title_)) {}

  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;

  void add(std::string what, bool pass, bool known = false) { checks.push_back({std::move(what), pass, known}); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) { return fmt17(v); }

std::string within(double got, double want, double se, double k) {
  std::ostringstream s;
  s << num(got) << " vs " << num(want) << ", z=" << (se > 0 ? (got - want) / se : 0.0) << " (limit " << k << ")";
  return s.str();
}

Criterion exact_small_cases() {
  Criterion c{1, "exact small-case oracle"};
  const auto t0 = Clock::now();
  const auto t = expected_cost_table(SplittingSpec::knuth(), 3, CostMode::exact);
  const double secs = seconds_since(t0);
  const std::vector<Rational> want{Rational(1), Rational(1), Rational(5), Rational(23, 3)};
  for (std::size_t n = 0; n < 4; ++n) {
    c.add("E(R_" + std::to_string(n) + ") = " + t.exact_values[n].str() + ", expected " + want[n].str(),
          t.exact_values[n] == want[n]);
  }
  c.add("runtime " + num(secs) + " s < 1 s", secs < 1.0);
  return c;
}

Criterion dual_exact_oracles() {
  Criterion c{2, "closed form vs DP, n <= 64"};
  const auto t0 = Clock::now();
  for (int q : {2, 3}) {
    for (int d : {2, 3}) {
      const auto t = expected_cost_table(SplittingSpec::symmetric_qary(q, d), 64, CostMode::exact);
      double worst = 0.0;
      for (long n = 0; n <= 64; ++n) worst = std::max(worst, std::abs(closed_form_qary(q, d, n) - t.values[n]));
      c.add("Q=" + std::to_string(q) + " D=" + std::to_string(d) + " max delta " + num(worst) + " <= 1e-10",
            worst <= 1e-10);
    }
  }
  const double secs = seconds_since(t0);
  c.add("runtime " + num(secs) + " s < 10 s", secs < 10.0);
  return c;
}

Criterion representation_consistency() {
  Criterion c{3, "representation consistency at 1e6 replicas"};
  constexpr long kReplicas = 1'000'000;
  constexpr double kZ = 4.0;
  const auto spec = SplittingSpec::knuth();
  const auto measure = build_measure(spec);
  const double eg = measure.expected_branch();
  const auto table = expected_cost_table(spec, 400, CostMode::float64);
  const auto exact = expected_cost_table(spec, 32, CostMode::exact);
  auto add = [&](const std::string& name, const McEstimate& e, double want) {
    c.add(name + ": " + within(e.mean, want, e.std_err, kZ), std::abs(e.mean - want) <= kZ * e.std_err);
  };
  for (double x : {1.0, 4.0, 16.0}) {
    const double pt = poisson_transform_expect(table, x).value;
    add("rep8 x=" + num(x), rep8_estimate(measure, eg, 2, x, kReplicas, 0, kThreads), pt);
    add("poisson_qadic x=" + num(x), poisson_qadic_estimate(2, 2, x, kReplicas, 0, kThreads), pt);
  }
  for (long n : {2L, 3L, 8L, 32L}) {
    const double want = exact.exact_values[n].to_double();
    add("rep12 n=" + std::to_string(n), rep12_estimate(measure, eg, 2, n, kReplicas, 0, kThreads), want);
    add("tree n=" + std::to_string(n), estimate_cost(spec, n, kReplicas, 0, kThreads), want);
    add("qadic n=" + std::to_string(n), qadic_estimate(2, 2, n, kReplicas, 0, kThreads), want);
  }
  return c;
}

Criterion span_detection() {
  Criterion c{4, "exact span detection"};
  const auto half = detect_span(SplittingMeasure::from_atoms({{Rational(1, 2), Rational(1)}}));
  c.add("{1/2}: arithmetic with base 1/2 and lambda = log 2",
        half.arithmetic() && *half.base == Rational(1, 2) && *half.lambda == std::log(2.0));
  const auto mixed = detect_span(
      SplittingMeasure::from_atoms({{Rational(1, 3), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}}));
  c.add("{1/3, 1/2}: non-arithmetic", mixed.kind == SpanKind::non_arithmetic);
  const auto quarter = detect_span(
      SplittingMeasure::from_atoms({{Rational(1, 4), Rational(1, 2)}, {Rational(1, 16), Rational(1, 2)}}));
  c.add("{1/4, 1/16}: arithmetic with base 1/4, lambda = log 4, multipliers {2, 1}",
        quarter.arithmetic() && *quarter.base == Rational(1, 4) && *quarter.lambda == std::log(4.0) &&
            *quarter.multipliers == std::vector<std::int64_t>{2, 1});
  return c;
}

Criterion period_mean() {
  Criterion c{5, "period mean of F equals the limit constant"};
  for (const auto& [name, spec] :
       {std::pair{"Knuth", SplittingSpec::knuth()}, std::pair{"Q=3 D=3", SplittingSpec::symmetric_qary(3, 3)}}) {
    const auto m = build_measure(spec);
    const auto span = detect_span(m);
    const auto prof = periodic_profile_F(m, m.expected_branch(), spec.threshold, span, 256);
    double mean = 0.0;
    for (double v : prof.values) mean += v;
    mean /= static_cast<double>(prof.values.size());
    const double limit = limit_constant(m, m.expected_branch(), spec.threshold);
    c.add(std::string(name) + ": mean " + num(mean) + " vs " + num(limit), std::abs(mean - limit) <= 1e-6);
  }
  return c;
}

Criterion series_vs_quadrature() {
  Criterion c{6, "F1 series vs kink quadrature on 32 points"};
  for (int q : {2, 3}) {
    for (int d : {2, 3}) {
      double worst = 0.0;
      for (double x : unit_grid(32)) {
        worst = std::max(worst, std::abs(f1_series(q, d, std::pow(static_cast<double>(q), x)) - f1_quadrature(q, d, x)));
      }
      c.add("Q=" + std::to_string(q) + " D=" + std::to_string(d) + " max diff " + num(worst) + " <= 1e-8",
            worst <= 1e-8);
    }
  }
  return c;
}

Criterion convergence() {
  Criterion c{7, "convergence of E(R_n)/n"};
  {
    const auto spec = SplittingSpec::knuth();
    const auto m = build_measure(spec);
    const auto span = detect_span(m);
    const auto table = expected_cost_table(spec, 1 << 14, CostMode::float64);
    const auto rows = convergence_report(m, m.expected_branch(), 2, span, geometric_n_grid(2.0, 4, 14, 8), table);
    c.add("Knuth rel_error at 2^14 = " + num(rows.back().rel_error) + " <= 0.01", rows.back().rel_error <= 0.01);
    std::vector<double> worst(15, 0.0);
    for (const auto& r : rows) {
      const int k = static_cast<int>(std::floor(std::log2(static_cast<double>(r.n))));
      worst[k] = std::max(worst[k], r.rel_error);
    }
    bool mono = true;
    for (int k = 5; k <= 14; ++k) mono = mono && worst[k] <= 1.1 * worst[k - 1];
    c.add("Knuth worst rel_error per period nonincreasing in k (10% slack): " + num(worst[4]) + " -> " +
              num(worst[14]),
          mono);
  }
  {
    const auto spec = SplittingSpec::qary({Rational(1, 3), Rational(2, 3)}, 2);
    const auto table = expected_cost_table(spec, 1 << 14, CostMode::float64);
    const double ratio = table.values.back() / static_cast<double>(1 << 14);
    const double rel = std::abs(ratio / 3.142116 - 1.0);
    c.add("(1/3, 2/3) ratio at 2^14 = " + num(ratio) + ", rel diff to 3.142116 = " + num(rel) + " <= 0.01",
          rel <= 0.01);
  }
  return c;
}

Criterion renewal() {
  Criterion c{8, "renewal limit and overshoot bound"};
  const auto m = build_measure(load_spec(kData / "mixed_degree.json"));
  const double limit = 1.0 / m.neg_log_moment();
  const double bound = overshoot_bound(m);
  bool bound_ok = true;
  PsiWalkResult last;
  for (double x : {1.0, 2.0, 5.0, 10.0, 30.0}) {
    last = psi_walk({m, x}, 1'000'000, 0, kThreads);
    bound_ok = bound_ok && last.overshoot.mean <= bound + 3.0 * last.overshoot.std_err;
  }
  // At x = 30 the walk has not reached its renewal limit: the exact value of
  // the finite-x expectation sits about 2% below it, far outside 4 stderr.
  c.add("psi_scaled at x=30: " + within(last.psi_scaled.mean, limit, last.psi_scaled.std_err, 4.0),
        std::abs(last.psi_scaled.mean - limit) <= 4.0 * last.psi_scaled.std_err, true);
  c.add("overshoot moment <= " + num(bound) + " at every x", bound_ok);
  return c;
}

Criterion lln() {
  Criterion c{9, "law of large numbers"};
  const auto rows = lln_study(2, 2, {64.0, 256.0, 1024.0, 4096.0}, 200, 0.05, 0, kThreads);
  const auto& first = rows.front();
  const auto& last = rows.back();
  c.add("frequency " + num(first.frequency) + " at 2^6 -> " + num(last.frequency) + " at 2^12, within 2 stderr",
        last.frequency <= first.frequency + 2.0 * std::hypot(first.std_err, last.std_err));
  c.add("frequency at 2^12 = " + num(last.frequency) + " <= 0.1", last.frequency <= 0.1);
  return c;
}

Criterion clt_and_variance() {
  Criterion c{10, "central limit and variance profile"};
  const auto r = clt_study(2, 2, 1.0, 12, 2000, 0, kThreads);
  c.add("skewness " + num(r.skewness) + ", |.| <= 0.15", std::abs(r.skewness) <= 0.15);
  c.add("excess kurtosis " + num(r.excess_kurtosis) + ", |.| <= 0.3", std::abs(r.excess_kurtosis) <= 0.3);
  c.add("variance / (x F2) = " + num(r.variance_ratio) + " in [0.9, 1.1]",
        r.variance_ratio >= 0.9 && r.variance_ratio <= 1.1);
  const auto quad = f2_profile(2, 2, 4, ProfileMethod::kink_quadrature);
  const auto mc = f2_profile(2, 2, 4, ProfileMethod::monte_carlo, 0, 10'000'000, kThreads);
  double worst = 0.0;
  for (std::size_t i = 0; i < quad.grid.size(); ++i) {
    worst = std::max(worst, std::abs(quad.values[i] - mc.values[i]) / std::hypot(quad.errors[i], mc.errors[i]));
  }
  // For D = 2 the integrand grows like log(1/u)/u near u = 0, so the Monte
  // Carlo average has infinite variance and its standard error understates
  // the spread; an occasional large z follows.
  c.add("F2 Monte Carlo vs quadrature, worst z = " + num(worst) + " <= 3", worst <= 3.0, true);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quoted(const std::string& s) { return "'" + s + "'"; }

Criterion determinism() {
  Criterion c{11, "outputs independent of --threads"};
  const auto root = fs::temp_directory_path() / "splitting_acceptance";
  fs::remove_all(root);
  const std::string knuth = (kData / "knuth.json").string();
  const std::string mixed = (kData / "mixed_degree.json").string();
  const std::vector<std::pair<std::string, std::string>> commands{
      {"analyze", "analyze --spec " + quoted(knuth)},
      {"exact", "exact --spec " + quoted(knuth) + " --n-max 300 --mode float64"},
      {"simulate", "simulate --spec " + quoted(mixed) + " --n 64 --replicas 20000 --seed 5"},
      {"converge", "converge --spec " + quoted(mixed) + " --source tree --replicas 200 --k-max 8"},
      {"lln", "study --study lln --spec " + quoted(knuth) + " --replicas 100 --x 64,1024"},
      {"clt", "study --study clt --spec " + quoted(knuth) + " --replicas 300 --N 9"},
      {"psi", "study --study psi --spec " + quoted(mixed) + " --replicas 50000 --x 2,10"},
      {"variance", "study --study variance --spec " + quoted(knuth) + " --grid 2 --pairs 200000"},
  };
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> dirs;
    bool ran = true;
    for (unsigned threads : {1u, 3u, 8u}) {
      const auto dir = root / (name + "_" + std::to_string(threads));
      const std::string cmd = quoted(kTool) + " " + args + " --out " + quoted(dir.string()) + " --threads " +
                              std::to_string(threads) + " >/dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      ran = ran && rc != -1 && fs::exists(dir / "manifest.json");
      dirs.push_back(dir);
    }
    bool same = ran;
    std::size_t files = 0;
    if (ran) {
      for (const auto& entry : fs::directory_iterator(dirs[0])) {
        const auto file = entry.path().filename();
        ++files;
        for (std::size_t k = 1; k < dirs.size(); ++k) {
          auto a = slurp(dirs[0] / file), b = slurp(dirs[k] / file);
          if (file == "manifest.json") {
            auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
            ja.erase("timestamp");
            jb.erase("timestamp");
            same = same && ja == jb;
          } else {
            same = same && a == b;
          }
        }
      }
    }
    c.add(name + ": " + std::to_string(files) + " files identical across threads 1, 3, 8",
          same && files > 1);
  }
  fs::remove_all(root);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::function<Criterion()>> runs{
      exact_small_cases, dual_exact_oracles, representation_consistency, span_detection,
      period_mean,       series_vs_quadrature, convergence,              renewal,
      lln,               clt_and_variance,   determinism,
  };
  std::vector<Criterion> results;
  int unexpected = 0;
  for (const auto& fn : runs) {
    const auto t0 = Clock::now();
    Criterion c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.title = "aborted";
      c.add(std::string("threw: ") + e.what(), false);
    }
    c.seconds = seconds_since(t0);
    results.push_back(c);
  }
  int passed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& c = results[i];
    if (c.id == 0) c.id = static_cast<int>(i + 1);
    const bool pass = std::all_of(c.checks.begin(), c.checks.end(), [](const Check& k) { return k.pass; });
    passed += pass;
    std::printf("%s criterion %2d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds);
  }
  std::printf("\n%d/%zu criteria passed\n\nDetails:\n", passed, results.size());
  for (const auto& c : results) {
    for (const auto& k : c.checks) {
      const char* tag = k.pass ? "ok  " : (k.known ? "red*" : "red ");
      if (!k.pass && !k.known) ++unexpected;
      std::printf("  [%2d] %s %s\n", c.id, tag, k.what.c_str());
    }
  }
  std::printf("\nred* = understood failure, does not affect the exit status\n");
  return unexpected == 0 ? 0 : 1;
}
