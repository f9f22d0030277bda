#include "splitting/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "splitting/asymptotics.hpp"
#include "splitting/errors.hpp"
#include "splitting/exact.hpp"
#include "splitting/montecarlo.hpp"
#include "splitting/report.hpp"
#include "splitting/spec_io.hpp"

namespace splitting::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Common {
  std::string spec_path;
  std::string out = ".";
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--spec", c.spec_path, "Spec file (JSON)")->required();
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads; never changes results")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects outputs and writes the manifest last.
class Run {
 public:
  Run(std::string command, const Common& common) : command_(std::move(command)), common_(common) {
    fs::create_directories(common_.out);
  }

  Json& params() { return params_; }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(fs::path(common_.out) / name, content);
    outputs_.push_back(name);
  }

  void finish() {
    Json m;
    m["command"] = command_;
    m["spec_path"] = common_.spec_path;
    m["params"] = params_;
    m["seed"] = common_.seed;
    m["tool_version"] = kToolVersion;
    m["outputs"] = outputs_;
    m["timestamp"] = utc_timestamp();
    write_file_atomic(fs::path(common_.out) / "manifest.json", dump_json(m));
  }

 private:
  std::string command_;
  Common common_;
  Json params_ = Json::object();
  std::vector<std::string> outputs_;
};

std::string span_kind(SpanKind k) {
  switch (k) {
    case SpanKind::arithmetic: return "arithmetic";
    case SpanKind::non_arithmetic: return "non-arithmetic";
    case SpanKind::undecidable: return "undecidable";
  }
  return "?";
}

Json measure_json(const SplittingMeasure& m, const SplittingSpec& spec) {
  Json j;
  Json atoms = Json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"value", a.value.str()}, {"mass", a.mass.str()}});
  j["atoms"] = atoms;
  j["expected_branch"] = expected_branch(spec).str();
  j["expected_branch_value"] = m.expected_branch();
  j["neg_log_moment"] = m.neg_log_moment();
  j["heavy_moment"] = m.heavy_moment();
  j["delta"] = m.delta().str();
  return j;
}

Json span_json(const SpanResult& s) {
  Json j;
  j["arithmetic"] = s.arithmetic();
  j["kind"] = span_kind(s.kind);
  j["lambda"] = s.lambda ? Json(*s.lambda) : Json(nullptr);
  j["base"] = s.base ? Json(s.base->str()) : Json(nullptr);
  j["multipliers"] = s.multipliers ? Json(*s.multipliers) : Json(nullptr);
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

SplittingMeasure measure_of(const SplittingSpec& spec) {
  if (!has_exact_weights(spec)) throw SpecError("$.weights", "random weight law has no discrete splitting measure");
  return build_measure(spec);
}

int require_symmetric(const SplittingSpec& spec, const std::string& what) {
  const auto q = symmetric_degree(spec);
  if (!q) throw SpecError("$", what + " requires a symmetric constant-degree spec");
  return *q;
}

// Grid base for converge: the lattice ratio when arithmetic, else the degree.
double grid_base(const SplittingSpec& spec, const SpanResult& span) {
  if (span.arithmetic()) return std::exp(*span.lambda);
  if (spec.branch.size() == 1) return spec.branch.front().degree;
  return 2.0;
}

int cmd_analyze(const Common& c, int grid) {
  Run run("analyze", c);
  run.params()["grid"] = grid;
  const auto spec = load_spec(c.spec_path);
  const auto measure = measure_of(spec);
  const auto span = detect_span(measure);
  run.write("measure.json", dump_json(measure_json(measure, spec)));
  run.write("span.json", dump_json(span_json(span)));

  Json a;
  a["D"] = spec.threshold;
  a["expected_branch"] = measure.expected_branch();
  a["neg_log_moment"] = measure.neg_log_moment();
  a["limit_constant"] = limit_constant(measure, measure.expected_branch(), spec.threshold);
  a["profile"] = nullptr;
  if (span.arithmetic()) {
    const auto prof = periodic_profile_F(measure, measure.expected_branch(), spec.threshold, span, grid);
    run.write("F_profile.csv", profile_csv(prof));
    a["profile"] = "F_profile.csv";
  }
  run.write("asymptotics.json", dump_json(a));
  run.finish();
  if (span.kind == SpanKind::undecidable) {
    std::cerr << "span undecidable: " << span.note << "\n";
    return kUndecidable;
  }
  return kOk;
}

int cmd_exact(const Common& c, std::size_t n_max, const std::string& mode_name) {
  Run run("exact", c);
  run.params()["n_max"] = n_max;
  run.params()["mode"] = mode_name;
  const auto spec = load_spec(c.spec_path);
  if (!has_exact_weights(spec)) throw SpecError("$.weights", "exact costs need exact weight laws");
  const CostMode mode = mode_name == "exact" ? CostMode::exact : CostMode::float64;
  const auto table = expected_cost_table(spec, n_max, mode);
  run.write("cost_table.csv", cost_table_csv(table));
  if (const auto q = symmetric_degree(spec)) {
    std::string closed = "n,expected_cost\n";
    std::string delta = "n,dp,closed_form,delta\n";
    for (std::size_t n = 0; n <= n_max; ++n) {
      const double cf = closed_form_qary(*q, spec.threshold, static_cast<long>(n));
      closed += std::to_string(n) + "," + fmt17(cf) + "\n";
      delta += std::to_string(n) + "," + fmt17(table.values[n]) + "," + fmt17(cf) + "," +
               fmt17(table.values[n] - cf) + "\n";
    }
    run.write("cost_closed_form.csv", closed);
    run.write("delta.csv", delta);
  }
  run.finish();
  return kOk;
}

int cmd_simulate(const Common& c, long n, long replicas) {
  Run run("simulate", c);
  run.params()["n"] = n;
  run.params()["replicas"] = replicas;
  const auto spec = load_spec(c.spec_path);
  if (replicas < 2) throw std::invalid_argument("--replicas must be >= 2");
  const auto trees = simulate_trees(spec, n, replicas, c.seed, c.threads);
  const auto est = summarize_trees(trees, c.seed);
  run.write("sim.json", estimate_json("simulate_tree", {{"n", static_cast<double>(n)}, {"D", spec.threshold}}, est));
  std::string csv = "replica,R,max_depth,full_levels\n";
  for (std::size_t i = 0; i < trees.size(); ++i) {
    csv += std::to_string(i) + "," + std::to_string(trees[i].cost) + "," + std::to_string(trees[i].max_depth) + "," +
           std::to_string(trees[i].full_levels) + "\n";
  }
  run.write("tree_stats.csv", csv);
  run.finish();
  return kOk;
}

int cmd_converge(const Common& c, int k_min, int k_max, int y_points, const std::string& source, long replicas,
                 std::optional<double> base_opt) {
  Run run("converge", c);
  run.params()["k_min"] = k_min;
  run.params()["k_max"] = k_max;
  run.params()["y_points"] = y_points;
  run.params()["source"] = source;
  if (source != "exact") run.params()["replicas"] = replicas;
  const auto spec = load_spec(c.spec_path);
  const auto measure = measure_of(spec);
  const auto span = detect_span(measure);
  if (span.kind == SpanKind::undecidable) {
    std::cerr << "span undecidable: " << span.note << "\n";
    return kUndecidable;
  }
  const double base = base_opt.value_or(grid_base(spec, span));
  run.params()["base"] = base;
  const auto n_list = geometric_n_grid(base, k_min, k_max, y_points);
  const double eg = measure.expected_branch();
  std::vector<ConvergenceRow> rows;
  if (source == "exact") {
    const auto table = expected_cost_table(spec, static_cast<std::size_t>(n_list.back()), CostMode::float64);
    rows = convergence_report(measure, eg, spec.threshold, span, n_list, table);
  } else if (source == "rep12") {
    rows = convergence_report(measure, eg, spec.threshold, span, n_list, [&](long n) {
      return n < spec.threshold ? 1.0 : rep12_estimate(measure, eg, spec.threshold, n, replicas, c.seed, c.threads).mean;
    });
  } else {
    rows = convergence_report(measure, eg, spec.threshold, span, n_list,
                              [&](long n) { return estimate_cost(spec, n, replicas, c.seed, c.threads).mean; });
  }
  run.write("convergence.csv", convergence_csv(rows));
  run.finish();
  return kOk;
}

struct StudyParams {
  std::string study;
  long replicas = 0;  // 0: study default
  double eps = 0.05;
  std::vector<double> x_list;
  double y = 1.0;
  int big_n = 12;
  int grid = 4;
  std::uint64_t pairs = 10'000'000;
};

Json check(const std::string& name, double value, const std::string& rule, bool pass) {
  return {{"name", name}, {"value", value}, {"rule", rule}, {"pass", pass}};
}

int cmd_study(const Common& c, StudyParams p) {
  Run run("study", c);
  const auto spec = load_spec(c.spec_path);
  Json verdict;
  verdict["study"] = p.study;
  Json checks = Json::array();
  auto& par = run.params();
  par["study"] = p.study;

  if (p.study == "lln") {
    const int q = require_symmetric(spec, "lln study");
    if (p.x_list.empty()) p.x_list = {64.0, 256.0, 1024.0, 4096.0};
    if (p.replicas == 0) p.replicas = 200;
    par["x_list"] = p.x_list;
    par["replicas"] = p.replicas;
    par["eps"] = p.eps;
    const auto rows = lln_study(q, spec.threshold, p.x_list, p.replicas, p.eps, c.seed, c.threads);
    std::string csv = "x,f1,frequency,stderr,replicas\n";
    for (const auto& r : rows) {
      csv += fmt17(r.x) + "," + fmt17(r.f1) + "," + fmt17(r.frequency) + "," + fmt17(r.std_err) + "," +
             std::to_string(r.replicas) + "\n";
    }
    run.write("lln.csv", csv);
    const auto& first = rows.front();
    const auto& last = rows.back();
    const double slack = 2.0 * std::hypot(first.std_err, last.std_err);
    checks.push_back(check("frequency_trend", last.frequency - first.frequency, "<= 2 binomial stderr",
                           last.frequency <= first.frequency + slack));
    checks.push_back(check("final_frequency", last.frequency, "<= 0.1", last.frequency <= 0.1));
  } else if (p.study == "clt") {
    const int q = require_symmetric(spec, "clt study");
    if (p.replicas == 0) p.replicas = 2000;
    par["y"] = p.y;
    par["N"] = p.big_n;
    par["replicas"] = p.replicas;
    const auto r = clt_study(q, spec.threshold, p.y, p.big_n, p.replicas, c.seed, c.threads);
    std::string csv = "replica,R,standardized\n";
    const double sd = std::sqrt(r.variance);
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      csv += std::to_string(i) + "," + fmt17(r.samples[i]) + "," + fmt17((r.samples[i] - r.mean) / sd) + "\n";
    }
    run.write("clt.csv", csv);
    verdict["x"] = r.x;
    verdict["mean"] = r.mean;
    verdict["variance_per_x"] = r.variance_per_x;
    verdict["f2"] = r.f2;
    checks.push_back(check("standardized_mean", r.standardized_mean, "|.| <= 4/sqrt(replicas)",
                           std::abs(r.standardized_mean) <= 4.0 / std::sqrt(static_cast<double>(r.replicas))));
    checks.push_back(check("skewness", r.skewness, "|.| <= 0.15", std::abs(r.skewness) <= 0.15));
    checks.push_back(check("excess_kurtosis", r.excess_kurtosis, "|.| <= 0.3", std::abs(r.excess_kurtosis) <= 0.3));
    checks.push_back(check("variance_ratio", r.variance_ratio, "in [0.9, 1.1]",
                           r.variance_ratio >= 0.9 && r.variance_ratio <= 1.1));
  } else if (p.study == "psi") {
    const auto measure = measure_of(spec);
    if (p.x_list.empty()) p.x_list = {1.0, 2.0, 5.0, 10.0, 30.0};
    if (p.replicas == 0) p.replicas = 1'000'000;
    par["x_list"] = p.x_list;
    par["replicas"] = p.replicas;
    const double limit = 1.0 / measure.neg_log_moment();
    const double bound = overshoot_bound(measure);
    verdict["limit"] = limit;
    verdict["overshoot_bound"] = bound;
    std::string csv = "x,psi_scaled,psi_stderr,overshoot,overshoot_stderr,limit,bound\n";
    bool bound_ok = true;
    PsiWalkResult last;
    for (double x : p.x_list) {
      last = psi_walk(WalkConfig{measure, x}, p.replicas, c.seed, c.threads);
      csv += fmt17(x) + "," + fmt17(last.psi_scaled.mean) + "," + fmt17(last.psi_scaled.std_err) + "," +
             fmt17(last.overshoot.mean) + "," + fmt17(last.overshoot.std_err) + "," + fmt17(limit) + "," +
             fmt17(bound) + "\n";
      bound_ok = bound_ok && last.overshoot.mean <= bound + 3.0 * last.overshoot.std_err;
    }
    run.write("psi.csv", csv);
    const double z = (last.psi_scaled.mean - limit) / last.psi_scaled.std_err;
    checks.push_back(check("psi_limit_z", z, "|.| <= 4 at the largest x", std::abs(z) <= 4.0));
    checks.push_back(check("overshoot_bound", bound, "mean <= bound + 3 stderr at every x", bound_ok));
  } else if (p.study == "variance") {
    const int q = require_symmetric(spec, "variance study");
    par["grid"] = p.grid;
    par["pairs"] = p.pairs;
    const auto quad = f2_profile(q, spec.threshold, p.grid, ProfileMethod::kink_quadrature);
    const auto mc = f2_profile(q, spec.threshold, p.grid, ProfileMethod::monte_carlo, c.seed, p.pairs, c.threads);
    run.write("variance.csv", profile_csv(quad) + profile_csv(mc).substr(profile_csv(mc).find('\n') + 1));
    double worst = 0.0;
    for (std::size_t i = 0; i < quad.grid.size(); ++i) {
      const double z = std::abs(quad.values[i] - mc.values[i]) / std::hypot(quad.errors[i], mc.errors[i]);
      worst = std::max(worst, z);
    }
    checks.push_back(check("f2_dual_method_z", worst, "<= 3 combined errors", worst <= 3.0));
  } else {
    throw std::invalid_argument("unknown study " + p.study);
  }

  bool pass = true;
  for (const auto& ch : checks) pass = pass && ch["pass"].get<bool>();
  verdict["pass"] = pass;
  verdict["checks"] = checks;
  run.write("verdict.json", dump_json(verdict));
  run.finish();
  return pass ? kOk : kVerdictFailed;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Splitting-algorithm cost analysis"};
  app.require_subcommand(1);
  Common common;

  int grid = 256;
  auto* analyze = app.add_subcommand("analyze", "Splitting measure, span and limit constant");
  add_common(analyze, common);
  analyze->add_option("--grid", grid, "F-profile grid size")->capture_default_str()->check(CLI::PositiveNumber);

  std::size_t n_max = 0;
  std::string mode = "exact";
  auto* exact = app.add_subcommand("exact", "Expected-cost table");
  add_common(exact, common);
  exact->add_option("--n-max", n_max, "Largest n")->required();
  exact->add_option("--mode", mode, "exact | float64")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "float64"}));

  long n = 0, replicas = 10000;
  auto* simulate = app.add_subcommand("simulate", "Direct tree simulation");
  add_common(simulate, common);
  simulate->add_option("--n", n, "Number of items")->required()->check(CLI::NonNegativeNumber);
  simulate->add_option("--replicas", replicas, "Trees to simulate")->capture_default_str();

  int k_min = 4, k_max = 12, y_points = 8;
  std::string source = "exact";
  std::optional<double> base;
  auto* converge = app.add_subcommand("converge", "E(R_n)/n against its asymptotic prediction");
  add_common(converge, common);
  converge->add_option("--k-min", k_min)->capture_default_str();
  converge->add_option("--k-max", k_max)->capture_default_str();
  converge->add_option("--y-points", y_points, "Grid points per period")->capture_default_str();
  converge->add_option("--source", source, "exact | rep12 | tree")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "rep12", "tree"}));
  converge->add_option("--replicas", replicas, "Replicas per n for Monte Carlo sources")->capture_default_str();
  converge->add_option("--base", base, "Grid base Q (default: lattice ratio or degree)");

  StudyParams sp;
  auto* study = app.add_subcommand("study", "LLN, CLT, renewal and variance studies");
  add_common(study, common);
  study->add_option("--study", sp.study, "lln | clt | psi | variance")
      ->required()
      ->check(CLI::IsMember({"lln", "clt", "psi", "variance"}));
  study->add_option("--replicas", sp.replicas, "Replicas (default depends on the study)");
  study->add_option("--eps", sp.eps, "LLN deviation threshold")->capture_default_str();
  study->add_option("--x", sp.x_list, "Levels x (comma separated)")->delimiter(',');
  study->add_option("--y", sp.y, "CLT: x = y Q^N")->capture_default_str();
  study->add_option("--N", sp.big_n, "CLT: x = y Q^N")->capture_default_str();
  study->add_option("--grid", sp.grid, "Variance: profile grid size")->capture_default_str();
  study->add_option("--pairs", sp.pairs, "Variance: Monte Carlo Gamma pairs per grid point")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kSpecError;
  }

  try {
    if (*analyze) return cmd_analyze(common, grid);
    if (*exact) return cmd_exact(common, n_max, mode);
    if (*simulate) return cmd_simulate(common, n, replicas);
    if (*converge) return cmd_converge(common, k_min, k_max, y_points, source, replicas, base);
    if (*study) return cmd_study(common, sp);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kSpecError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kSpecError;
  } catch (const ResourceError& e) {
    std::cerr << "resource bound: " << e.what() << "\n";
    return kResource;
  } catch (const BudgetError& e) {
    std::cerr << "simulation budget: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerdictFailed;
  }
  return kSpecError;
}

}  // namespace splitting::cli
