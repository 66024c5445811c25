#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tssp/tssp.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct CliError {
  int code;
  std::string message;
};

int exit_code_for(tssp_status s) {
  switch (s) {
    case TSSP_ERR_CONVERGENCE:
    case TSSP_ERR_ZERO_SEPARATION:
    case TSSP_ERR_NULL_EVENT:
    case TSSP_ERR_INFEASIBLE_SPEC:
    case TSSP_ERR_DEGENERATE_ESTIMATE:
    case TSSP_ERR_TOO_MANY_FAILURES:
    case TSSP_ERR_INTERNAL:
      return kExitSolver;
    default:
      return kExitInput;
  }
}

void check(tssp_status s, const std::string& what) {
  if (s != TSSP_OK) {
    throw CliError{exit_code_for(s),
                   what + ": " + tssp_status_name(s) + ": " + tssp_last_error()};
  }
}

[[noreturn]] void input_error(const std::string& message) { throw CliError{kExitInput, message}; }

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

// JSON carries numbers as shortest-safe decimal strings so they round-trip exactly.
std::string full(double x) { return fmt(x, 17); }

struct SampleDeleter {
  void operator()(tssp_sample* s) const { tssp_sample_destroy(s); }
};
struct EstimatorDeleter {
  void operator()(tssp_estimator* e) const { tssp_estimator_destroy(e); }
};
using SamplePtr = std::unique_ptr<tssp_sample, SampleDeleter>;
using EstimatorPtr = std::unique_ptr<tssp_estimator, EstimatorDeleter>;

// ---- option groups -------------------------------------------------------

struct QualityOptions {
  double aql = 0.02, rql = 0.05;
  double alpha = 0.1, alpha1 = 0.03;
  std::optional<double> beta;
  bool equal_split = false;

  void add(CLI::App* app, bool require_limits) {
    auto* a = app->add_option("--aql", aql, "acceptable quality limit");
    auto* r = app->add_option("--rql", rql, "rejectable quality limit");
    if (require_limits) {
      a->required();
      r->required();
    }
    app->add_option("--alpha", alpha, "global producer risk")->capture_default_str();
    app->add_option("--alpha1", alpha1, "stage-1 producer risk")->capture_default_str();
    app->add_option("--beta", beta,
                    "global consumer risk; split as beta_i = sqrt(beta) (default: beta_i = alpha_i)");
    app->add_flag("--equal-split", equal_split,
                  "alpha_i = 1 - sqrt(1 - alpha), beta_i = sqrt(beta)");
  }

  std::pair<tssp_risks, tssp_quality_spec> resolve() const {
    tssp_risks risks{};
    if (equal_split) {
      check(tssp_equal_split_risks(alpha, beta.value_or(alpha), &risks), "risk allocation");
    } else {
      check(tssp_allocate_risks(alpha, beta.value_or(alpha), alpha1, beta ? 0 : 1, &risks),
            "risk allocation");
    }
    tssp_quality_spec spec{};
    check(tssp_quality_spec_from_risks(aql, rql, &risks, &spec), "quality specification");
    return {risks, spec};
  }
};

struct EstimatorOptions {
  std::string data;
  std::string method = "kde-sj";
  std::optional<double> bandwidth;
  std::optional<int> bd_degree;
  std::optional<double> support_lo, support_hi;
  int mode_budget = 3;

  void add(CLI::App* app, bool allow_normal) {
    app->add_option("--data", data, "time-t0 sample, one value per line");
    std::string help = "empirical | kde-bcv | kde-sj | bd";
    if (allow_normal) help += " | normal (exact standard normal quantile)";
    app->add_option("--method", method, help)->capture_default_str();
    app->add_option("--bandwidth", bandwidth, "fixed KDE bandwidth");
    app->add_option("--bd-degree", bd_degree, "fixed Bernstein-Durrmeyer degree");
    app->add_option("--support-lo", support_lo, "lower support bound for bd");
    app->add_option("--support-hi", support_hi, "upper support bound for bd");
    app->add_option("--mode-budget", mode_budget, "maximum density modes for bd degree selection")
        ->capture_default_str();
  }

  tssp_estimator_options c_options() const {
    tssp_estimator_options o;
    tssp_estimator_options_default(&o);
    o.bandwidth = bandwidth.value_or(0.0);
    o.bd_degree = bd_degree.value_or(0);
    if (support_lo || support_hi) {
      if (!support_lo || !support_hi) input_error("--support-lo and --support-hi go together");
      o.bd_has_support = 1;
      o.bd_support_lo = *support_lo;
      o.bd_support_hi = *support_hi;
    }
    o.bd_mode_budget = mode_budget;
    return o;
  }

  EstimatorPtr build() const {
    tssp_estimator* raw = nullptr;
    if (method == "normal") {
      check(tssp_estimator_normal_reference(&raw), "estimator");
      return EstimatorPtr(raw);
    }
    tssp_method m{};
    check(tssp_method_parse(method.c_str(), &m), "--method");
    if (data.empty()) input_error("--data is required for --method " + method);
    tssp_sample* s = nullptr;
    check(tssp_sample_load_csv(data.c_str(), &s), "reading " + data);
    SamplePtr sample(s);
    const tssp_estimator_options o = c_options();
    check(tssp_estimator_create(sample.get(), m, &o, &raw), "estimator");
    return EstimatorPtr(raw);
  }
};

struct DependenceOptions {
  std::optional<std::string> dep;
  std::optional<double> rho;
  std::string pairs;
  double lambda = 1.0;
  std::size_t batch_b = 1;
  double sigma_b2 = 0.0, sigma_eps2 = 1.0;
  double rho_cap = 0.99;

  void add(CLI::App* app) {
    app->add_option("--dep", dep, "independent | panel | batch (default: panel when --rho or --pairs is given)")
        ->check(CLI::IsMember({"independent", "panel", "batch"}));
    app->add_option("--rho", rho, "panel correlation coefficient");
    app->add_option("--pairs", pairs, "two-column file of remeasured items (panel)");
    app->add_option("--lambda", lambda, "n1 / n2 ratio for the panel estimate")
        ->capture_default_str();
    app->add_option("--batch-b", batch_b, "spatial batch size");
    app->add_option("--sigma-b2", sigma_b2, "batch-effect variance");
    app->add_option("--sigma-eps2", sigma_eps2, "item variance");
    app->add_option("--rho-cap", rho_cap, "largest admissible |rho|")->capture_default_str();
  }

  tssp_dependence resolve() const {
    tssp_dependence d;
    tssp_dependence_default(&d);
    d.rho_cap = rho_cap;
    const std::string kind = dep.value_or(rho || !pairs.empty() ? "panel" : "independent");
    if (kind == "panel") {
      d.kind = TSSP_DEP_PANEL;
      d.lambda = lambda;
      if (rho && !pairs.empty()) input_error("give either --rho or --pairs, not both");
      if (rho) {
        d.rho_hat = *rho;
      } else if (!pairs.empty()) {
        check(tssp_estimate_rho_csv(pairs.c_str(), lambda, rho_cap, &d.rho_hat),
              "estimating rho from " + pairs);
      } else {
        input_error("--dep panel needs --rho or --pairs");
      }
    } else if (kind == "batch") {
      d.kind = TSSP_DEP_SPATIAL_BATCH;
      d.batch_size = batch_b;
      d.sigma_b2 = sigma_b2;
      d.sigma_eps2 = sigma_eps2;
    } else if (rho || !pairs.empty()) {
      input_error("--rho/--pairs require --dep panel");
    }
    return d;
  }
};

// Batch counts follow the plans: r_i = n_i / b.
tssp_dependence with_counts(tssp_dependence d, const tssp_plan& p1, const tssp_plan& p2) {
  if (d.kind == TSSP_DEP_SPATIAL_BATCH) {
    d.r1 = p1.n / static_cast<double>(d.batch_size);
    d.r2 = p2.n / static_cast<double>(d.batch_size);
  }
  return d;
}

struct SolverOptions {
  tssp_solver_config solver{};
  tssp_quadrature_config quad{};
  bool enforce_lambda = false;

  SolverOptions() {
    tssp_solver_config_default(&solver);
    tssp_quadrature_config_default(&quad);
    if (const char* env = std::getenv("TSSP_QUAD_RELTOL"); env && *env) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end == env || *end != '\0') {
        input_error(std::string("TSSP_QUAD_RELTOL is not a number: ") + env);
      }
      quad.rel_tol = v;
    }
  }

  void add(CLI::App* app) {
    app->add_option("--epsilon", solver.epsilon, "stage-2 squared-deviation tolerance")
        ->capture_default_str();
    app->add_option("--grid-n-max", solver.grid_n_max)->capture_default_str();
    app->add_option("--grid-c-max", solver.grid_c_max)->capture_default_str();
    app->add_option("--refine-max-iter", solver.refine_max_iter)->capture_default_str();
    app->add_flag("--enforce-lambda", enforce_lambda, "panel: n2 = ceil(n1 / lambda)");
    app->add_option("--rel-tol", quad.rel_tol, "quadrature relative tolerance");
    app->add_option("--abs-tol", quad.abs_tol)->capture_default_str();
    app->add_option("--truncation-radius", quad.truncation_radius)->capture_default_str();
    app->add_option("--max-subdivisions", quad.max_subdivisions)->capture_default_str();
  }

  const tssp_solver_config* solver_config() {
    solver.enforce_lambda = enforce_lambda ? 1 : 0;
    return &solver;
  }
};

struct FormatOption {
  std::string format = "text";
  void add(CLI::App* app) {
    app->add_option("--format", format, "text | json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
  }
  bool json() const { return format == "json"; }
};

// Every option that was set, from the command line or a config file.
json collect_inputs(const CLI::App* app) {
  json inputs = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->count() == 0 || name == "help" || name == "config" || name == "format") continue;
    inputs[name] = opt->get_type_size() == 0 ? std::string("true") : opt->as<std::string>();
  }
  return inputs;
}

// ---- config files --------------------------------------------------------

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) input_error("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::map<std::string, std::string> out;

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      input_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
    const json& inputs = doc.contains("inputs") ? doc["inputs"] : doc;
    if (!inputs.is_object()) input_error("config file '" + path + "' must hold a JSON object");
    for (const auto& [key, value] : inputs.items()) {
      if (value.is_string()) {
        out[key] = value.get<std::string>();
      } else if (value.is_number() || value.is_boolean()) {
        out[key] = value.dump();
      } else {
        input_error("config key '" + key + "' must be a scalar");
      }
    }
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(lines, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      input_error(path + ":" + std::to_string(number) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Config entries become --key=value arguments placed ahead of the real ones;
// options keep their last value, so the command line wins.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (!sub) return args;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (!path) return args;
  std::vector<std::string> out{args.front()};
  for (const auto& [raw_key, value] : read_config(*path)) {
    std::string key = raw_key;
    for (char& ch : key) {
      if (ch == '_') ch = '-';
    }
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (key == "config" || key == "help" || !opt) {
      input_error("unknown configuration key '" + raw_key + "' in " + *path);
    }
    out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

// ---- commands ------------------------------------------------------------

struct PlanContext {
  QualityOptions quality;
  EstimatorOptions estimator;
  DependenceOptions dependence;
  SolverOptions solver;
  FormatOption format;
  double d = 1.0;
  std::string config;

  void add(CLI::App* app, bool allow_normal = true) {
    quality.add(app, true);
    estimator.add(app, allow_normal);
    dependence.add(app);
    solver.add(app);
    format.add(app);
    app->add_option("--d", d, "degradation factor (plans do not depend on it)")
        ->capture_default_str();
    app->add_option("--config", config, "key = value or JSON configuration file");
  }
};

struct SolvedPlans {
  tssp_risks risks{};
  tssp_quality_spec spec{};
  tssp_plan plan1{}, plan2{};
  tssp_stage2_result stage2{};
  tssp_dependence dep{};
  EstimatorPtr estimator;
};

SolvedPlans solve(PlanContext& ctx) {
  if (!(ctx.d > 0.0 && ctx.d <= 1.0)) input_error("--d must lie in (0, 1]");
  SolvedPlans s;
  std::tie(s.risks, s.spec) = ctx.quality.resolve();
  s.dep = ctx.dependence.resolve();
  s.estimator = ctx.estimator.build();
  check(tssp_stage1_plan(&s.spec, s.estimator.get(), &s.plan1), "stage-1 plan");
  check(tssp_stage2_plan(&s.spec, &s.plan1, s.estimator.get(), &s.dep,
                         ctx.solver.solver_config(), &ctx.solver.quad, &s.stage2),
        "stage-2 plan");
  s.plan2 = s.stage2.plan;
  s.dep = with_counts(s.dep, s.plan1, s.plan2);
  return s;
}

json estimator_json(const tssp_estimator* e, const std::string& method) {
  tssp_estimator_info info{};
  check(tssp_estimator_info_get(e, &info), "estimator");
  json j;
  j["method"] = method;
  j["mean"] = full(info.mean);
  j["stddev"] = full(info.stddev);
  if (info.has_bandwidth) j["bandwidth"] = full(info.bandwidth);
  if (info.has_degree) j["degree"] = info.degree;
  if (info.certified >= 0) j["certified"] = info.certified == 1;
  return j;
}

int cmd_plan(CLI::App* app, PlanContext& ctx) {
  SolvedPlans s = solve(ctx);
  tssp_validity v1{}, v2{}, vo{};
  check(tssp_validate_plan(&s.spec, TSSP_STAGE_1, &s.plan1, &s.plan2, s.estimator.get(), &s.dep,
                           &ctx.solver.quad, 0.0, &v1),
        "stage-1 OC");
  check(tssp_validate_plan(&s.spec, TSSP_STAGE_2, &s.plan1, &s.plan2, s.estimator.get(), &s.dep,
                           &ctx.solver.quad, 0.0, &v2),
        "stage-2 OC");
  check(tssp_validate_plan(&s.spec, TSSP_STAGE_OVERALL, &s.plan1, &s.plan2, s.estimator.get(),
                           &s.dep, &ctx.solver.quad, 0.0, &vo),
        "overall OC");

  if (ctx.format.json()) {
    json out;
    out["inputs"] = collect_inputs(app);
    out["risks"] = {{"alpha", full(s.risks.alpha)}, {"beta", full(s.risks.beta)},
                    {"alpha1", full(s.risks.alpha1)}, {"beta1", full(s.risks.beta1)},
                    {"alpha2", full(s.risks.alpha2)}, {"beta2", full(s.risks.beta2)}};
    out["estimator"] = estimator_json(s.estimator.get(), ctx.estimator.method);
    out["stage1"] = {{"n", full(s.plan1.n)}, {"c", full(s.plan1.c)}};
    out["stage2"] = {{"n", full(s.plan2.n)},
                     {"c", full(s.plan2.c)},
                     {"within_tolerance", s.stage2.within_tolerance != 0},
                     {"deviation", full(s.stage2.final_deviation)},
                     {"continuous_n", full(s.stage2.continuous_n)},
                     {"continuous_c", full(s.stage2.continuous_c)},
                     {"continuous_deviation", full(s.stage2.refined_deviation)},
                     {"rho", full(s.stage2.rho)}};
    auto oc = [](const tssp_validity& v) {
      return json{{"at_aql", full(v.oc_at_aql)},
                  {"at_rql", full(v.oc_at_rql)},
                  {"producer_target", full(v.producer_target)},
                  {"consumer_target", full(v.consumer_target)},
                  {"valid", v.producer_ok && v.consumer_ok}};
    };
    out["oc"] = {{"stage1", oc(v1)}, {"stage2", oc(v2)}, {"overall", oc(vo)}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  std::printf("risks\n  %-8s  %-10s  %-10s\n", "stage", "alpha", "beta");
  std::printf("  %-8s  %-10s  %-10s\n", "1", fmt(s.risks.alpha1).c_str(), fmt(s.risks.beta1).c_str());
  std::printf("  %-8s  %-10s  %-10s\n", "2", fmt(s.risks.alpha2).c_str(), fmt(s.risks.beta2).c_str());
  std::printf("  %-8s  %-10s  %-10s\n", "overall", fmt(s.risks.alpha).c_str(),
              fmt(s.risks.beta).c_str());
  std::fflush(stdout);
  std::cout << "stage-1 plan: n1 = " << fmt(s.plan1.n) << ", c1 = " << fmt(s.plan1.c) << '\n';
  std::cout << "stage-2 plan: n2 = " << fmt(s.plan2.n) << ", c2 = " << fmt(s.plan2.c);
  if (!s.stage2.within_tolerance) {
    std::cout << "  (best effort, squared deviation " << fmt(s.stage2.final_deviation) << ")";
  }
  std::cout << '\n';
  if (s.dep.kind != TSSP_DEP_INDEPENDENT) std::cout << "rho: " << fmt(s.stage2.rho) << '\n';
  std::printf("%-12s  %-10s  %-11s  %-10s  %s\n", "achieved OC", "at AQL", "target", "at RQL",
              "target");
  auto row = [](const char* name, const tssp_validity& v) {
    std::printf("  %-10s  %-10s  >= %-8s  %-10s  <= %s\n", name, fmt(v.oc_at_aql).c_str(),
                fmt(v.producer_target, 4).c_str(), fmt(v.oc_at_rql).c_str(),
                fmt(v.consumer_target, 4).c_str());
  };
  std::fflush(stdout);
  row("stage 1", v1);
  row("stage 2", v2);
  row("overall", vo);
  return 0;
}

struct OcContext : PlanContext {
  std::optional<double> n1, c1, n2, c2;
  int grid = 50;
  std::optional<double> p_lo, p_hi;
};

int cmd_oc(CLI::App* app, OcContext& ctx) {
  const int given = !!ctx.n1 + !!ctx.c1 + !!ctx.n2 + !!ctx.c2;
  if (given != 0 && given != 4) input_error("give all of --n1 --c1 --n2 --c2 or none");
  if (ctx.grid < 2) input_error("--grid needs at least 2 points");

  tssp_plan p1{}, p2{};
  tssp_dependence dep{};
  EstimatorPtr est;
  tssp_quality_spec spec{};
  if (given == 4) {
    std::tie(std::ignore, spec) = ctx.quality.resolve();
    est = ctx.estimator.build();
    p1 = {*ctx.n1, *ctx.c1};
    p2 = {*ctx.n2, *ctx.c2};
    dep = with_counts(ctx.dependence.resolve(), p1, p2);
  } else {
    SolvedPlans s = solve(ctx);
    spec = s.spec;
    p1 = s.plan1;
    p2 = s.plan2;
    dep = s.dep;
    est = std::move(s.estimator);
  }

  const double lo = ctx.p_lo.value_or(spec.aql / 4.0);
  const double hi = ctx.p_hi.value_or(std::min(2.0 * spec.rql, 0.999));
  if (!(lo > 0.0 && hi < 1.0 && lo < hi)) input_error("p grid must satisfy 0 < p-lo < p-hi < 1");

  json rows = json::array();
  if (!ctx.format.json()) std::cout << "p,oc1,oc2,overall\n";
  for (int i = 0; i < ctx.grid; ++i) {
    const double p = lo + (hi - lo) * i / (ctx.grid - 1);
    double o1 = 0.0, o2 = std::nan(""), all = 0.0;
    check(tssp_oc1(p, &p1, est.get(), &o1), "oc1");
    const tssp_status s2 = tssp_oc2(p, &p1, &p2, est.get(), &dep, &ctx.solver.quad, &o2);
    if (s2 == TSSP_ERR_NULL_EVENT) {
      o2 = std::nan("");  // stage 1 never accepts here
    } else {
      check(s2, "oc2");
    }
    check(tssp_overall_oc(p, &p1, &p2, est.get(), &dep, &ctx.solver.quad, &all), "overall OC");
    if (ctx.format.json()) {
      rows.push_back({{"p", full(p)}, {"oc1", full(o1)}, {"oc2", full(o2)}, {"overall", full(all)}});
    } else {
      std::cout << fmt(p) << ',' << fmt(o1) << ',' << fmt(o2) << ',' << fmt(all) << '\n';
    }
  }
  if (ctx.format.json()) {
    json out;
    out["inputs"] = collect_inputs(app);
    out["stage1"] = {{"n", full(p1.n)}, {"c", full(p1.c)}};
    out["stage2"] = {{"n", full(p2.n)}, {"c", full(p2.c)}};
    out["rows"] = rows;
    std::cout << out.dump(2) << '\n';
  }
  return 0;
}

struct SimContext {
  QualityOptions quality;
  EstimatorOptions estimator;
  DependenceOptions dependence;
  SolverOptions solver;
  FormatOption format;
  int model = 1;
  std::size_t m = 250;
  std::size_t reps = 1000;
  std::optional<std::uint64_t> seed;
  std::uint64_t stream = 0;
  std::string scale_interp = "variance";
  double d = 1.0;
  unsigned threads = 0;
  std::string config;
};

int cmd_simulate(CLI::App* app, SimContext& ctx) {
  const char* require = std::getenv("TSSP_REQUIRE_SEED");
  if (require && std::string(require) == "1" && !ctx.seed) {
    input_error("--seed is required when TSSP_REQUIRE_SEED=1");
  }
  auto [risks, spec] = ctx.quality.resolve();
  tssp_dependence dep = ctx.dependence.resolve();

  tssp_sim_config cfg;
  tssp_sim_config_default(&cfg);
  cfg.model = ctx.model;
  cfg.scale_interp = ctx.scale_interp == "stddev" ? TSSP_SCALE_STDDEV : TSSP_SCALE_VARIANCE;
  cfg.d = ctx.d;
  cfg.m = ctx.m;
  cfg.reps = ctx.reps;
  cfg.seed = ctx.seed.value_or(0);
  cfg.stream_id = ctx.stream;
  cfg.threads = ctx.threads;
  std::string type = ctx.estimator.method;
  if (type == "exact" || type == "normal") {
    cfg.exact_quantile = 1;
    type = "exact";
  } else {
    check(tssp_method_parse(type.c_str(), &cfg.method), "--method");
    type = tssp_method_name(cfg.method);
  }
  const tssp_estimator_options opts = ctx.estimator.c_options();
  tssp_sim_result r{};
  check(tssp_simulate_plan_distribution(&cfg, &spec, &opts, &dep, ctx.solver.solver_config(),
                                        &ctx.solver.quad, &r),
        "simulation");
  if (r.failures > 0) {
    std::cerr << "# " << r.failures << " of " << r.reps << " repetitions failed\n";
  }

  if (ctx.format.json()) {
    json out;
    out["inputs"] = collect_inputs(app);
    out["result"] = {{"alpha1", full(risks.alpha1)}, {"alpha2", full(risks.alpha2)},
                     {"m", ctx.m},                   {"type", type},
                     {"E_n1", full(r.e_n1)},         {"sd_n1", full(r.sd_n1)},
                     {"c1", full(r.e_c1)},           {"sd_c1", full(r.sd_c1)},
                     {"E_n2", full(r.e_n2)},         {"sd_n2", full(r.sd_n2)},
                     {"c2", full(r.e_c2)},           {"sd_c2", full(r.sd_c2)},
                     {"reps", r.reps},               {"failures", r.failures}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::cout << "alpha1,alpha2,m,type,E_n1,sd_n1,c1,sd_c1,E_n2,sd_n2,c2,sd_c2\n"
            << fmt(risks.alpha1) << ',' << fmt(risks.alpha2) << ',' << ctx.m << ',' << type << ','
            << fmt(r.e_n1) << ',' << fmt(r.sd_n1) << ',' << fmt(r.e_c1) << ',' << fmt(r.sd_c1)
            << ',' << fmt(r.e_n2) << ',' << fmt(r.sd_n2) << ',' << fmt(r.e_c2) << ','
            << fmt(r.sd_c2) << '\n';
  return 0;
}

struct EstimateContext {
  EstimatorOptions estimator;
  FormatOption format;
  std::vector<double> probs{0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.98, 0.99};
  std::string config;
};

int cmd_estimate(CLI::App* app, EstimateContext& ctx) {
  if (ctx.estimator.data.empty()) input_error("--data is required");
  EstimatorPtr est = ctx.estimator.build();
  tssp_estimator_info info{};
  check(tssp_estimator_info_get(est.get(), &info), "estimator");

  std::vector<std::pair<double, double>> values;
  for (double p : ctx.probs) {
    double raw = 0.0, std_q = 0.0;
    check(tssp_estimator_raw_quantile(est.get(), p, &raw), "quantile at p = " + fmt(p));
    check(tssp_estimator_evaluate(est.get(), p, &std_q), "quantile at p = " + fmt(p));
    values.emplace_back(raw, std_q);
  }

  if (ctx.format.json()) {
    json out;
    out["inputs"] = collect_inputs(app);
    out["estimator"] = estimator_json(est.get(), ctx.estimator.method);
    json rows = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
      rows.push_back({{"p", full(ctx.probs[i])},
                      {"raw_quantile", full(values[i].first)},
                      {"standardized_quantile", full(values[i].second)}});
    }
    out["rows"] = rows;
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::cout << "# mean=" << fmt(info.mean) << '\n' << "# sd=" << fmt(info.stddev) << '\n';
  if (info.has_bandwidth) std::cout << "# bandwidth=" << fmt(info.bandwidth) << '\n';
  if (info.has_degree) {
    std::cout << "# degree=" << info.degree;
    if (info.certified >= 0) std::cout << " certified=" << (info.certified ? "yes" : "no");
    std::cout << '\n';
  }
  std::cout << "p,raw_quantile,standardized_quantile\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::cout << fmt(ctx.probs[i]) << ',' << fmt(values[i].first) << ','
              << fmt(values[i].second) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage acceptance sampling plans for variables"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tssp_version()));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    PlanContext plan_ctx;
    OcContext oc_ctx;
    SimContext sim_ctx;
    EstimateContext est_ctx;

    CLI::App* plan = app.add_subcommand("plan", "solve stage-1 and stage-2 plans");
    plan_ctx.add(plan);

    CLI::App* oc = app.add_subcommand("oc", "tabulate OC curves");
    oc_ctx.add(oc);
    oc->add_option("--n1", oc_ctx.n1);
    oc->add_option("--c1", oc_ctx.c1);
    oc->add_option("--n2", oc_ctx.n2);
    oc->add_option("--c2", oc_ctx.c2);
    oc->add_option("--grid", oc_ctx.grid, "number of p values")->capture_default_str();
    oc->add_option("--p-lo", oc_ctx.p_lo, "first p (default AQL/4)");
    oc->add_option("--p-hi", oc_ctx.p_hi, "last p (default 2 RQL)");

    CLI::App* sim = app.add_subcommand("simulate", "plan distribution under a simulated model");
    sim_ctx.quality.add(sim, false);
    sim_ctx.estimator.add(sim, true);
    sim_ctx.dependence.add(sim);
    sim_ctx.solver.add(sim);
    sim_ctx.format.add(sim);
    sim->add_option("--model", sim_ctx.model, "model id 1-4")->capture_default_str();
    sim->add_option("--m", sim_ctx.m, "time-t0 sample size")->capture_default_str();
    sim->add_option("--reps", sim_ctx.reps, "repetitions")->capture_default_str();
    sim->add_option("--seed", sim_ctx.seed, "64-bit seed");
    sim->add_option("--stream", sim_ctx.stream, "stream id")->capture_default_str();
    sim->add_option("--scale-interp", sim_ctx.scale_interp, "variance | stddev")
        ->check(CLI::IsMember({"variance", "stddev"}))
        ->capture_default_str();
    sim->add_option("--d", sim_ctx.d, "degradation factor")->capture_default_str();
    sim->add_option("--threads", sim_ctx.threads, "worker threads, 0 = all cores");
    sim->add_option("--config", sim_ctx.config, "key = value or JSON configuration file");

    CLI::App* estimate = app.add_subcommand("estimate", "standardized quantile estimates");
    est_ctx.estimator.add(estimate, false);
    est_ctx.format.add(estimate);
    estimate->add_option("--probs", est_ctx.probs, "comma-separated probabilities")
        ->delimiter(',');
    estimate->add_option("--config", est_ctx.config, "key = value or JSON configuration file");

    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kExitInput;
    }

    if (plan->parsed()) return cmd_plan(plan, plan_ctx);
    if (oc->parsed()) return cmd_oc(oc, oc_ctx);
    if (sim->parsed()) return cmd_simulate(sim, sim_ctx);
    if (estimate->parsed()) return cmd_estimate(estimate, est_ctx);
  } catch (const CliError& e) {
    std::cerr << "tssp-cli: error: " << e.message << '\n';
    return e.code;
  }
  return kExitInput;
}
