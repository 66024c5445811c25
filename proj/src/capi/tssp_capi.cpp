#include "tssp/tssp.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>
#include <utility>

#include "tssp/dependence.hpp"
#include "tssp/error.hpp"
#include "tssp/oc.hpp"
#include "tssp/plans.hpp"
#include "tssp/quantile.hpp"
#include "tssp/sample.hpp"
#include "tssp/sim.hpp"

struct tssp_sample {
  tssp::Sample sample;
};

struct tssp_estimator {
  tssp::StandardizedQuantileEstimator estimator;
};

namespace {

thread_local std::string last_error;

tssp_status to_status(tssp::Errc code) {
  using tssp::Errc;
  switch (code) {
    case Errc::domain: return TSSP_ERR_DOMAIN;
    case Errc::input: return TSSP_ERR_INPUT;
    case Errc::convergence: return TSSP_ERR_CONVERGENCE;
    case Errc::degenerate_sample: return TSSP_ERR_DEGENERATE_SAMPLE;
    case Errc::infeasible_allocation: return TSSP_ERR_INFEASIBLE_ALLOCATION;
    case Errc::zero_separation: return TSSP_ERR_ZERO_SEPARATION;
    case Errc::null_event: return TSSP_ERR_NULL_EVENT;
    case Errc::dependence_out_of_range: return TSSP_ERR_DEPENDENCE_OUT_OF_RANGE;
    case Errc::degenerate_pairs: return TSSP_ERR_DEGENERATE_PAIRS;
    case Errc::infeasible_spec: return TSSP_ERR_INFEASIBLE_SPEC;
    case Errc::degenerate_estimate: return TSSP_ERR_DEGENERATE_ESTIMATE;
    case Errc::too_many_failures: return TSSP_ERR_TOO_MANY_FAILURES;
  }
  return TSSP_ERR_INTERNAL;
}

// Runs fn and turns any exception into a status plus a thread-local message.
template <class Fn>
tssp_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return TSSP_OK;
  } catch (const tssp::ConvergenceError& e) {
    last_error = std::string(e.what()) + " (estimate " + std::to_string(e.estimate()) +
                 ", error bound " + std::to_string(e.error_bound()) + ")";
    return TSSP_ERR_CONVERGENCE;
  } catch (const tssp::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return TSSP_ERR_INTERNAL;
}

tssp_status null_argument(const char* name) {
  last_error = std::string("required argument '") + name + "' is NULL";
  return TSSP_ERR_NULL_ARGUMENT;
}

#define TSSP_REQUIRE(ptr) \
  do {                    \
    if (!(ptr)) return null_argument(#ptr); \
  } while (0)

tssp::Method to_method(tssp_method m) {
  switch (m) {
    case TSSP_METHOD_EMPIRICAL: return tssp::Method::empirical;
    case TSSP_METHOD_KDE_BCV: return tssp::Method::kde_bcv;
    case TSSP_METHOD_KDE_SJ: return tssp::Method::kde_sj;
    case TSSP_METHOD_BD: return tssp::Method::bd_poly;
  }
  tssp::fail(tssp::Errc::domain, "unknown estimation method " + std::to_string(static_cast<int>(m)));
}

tssp::EstimatorOptions to_options(const tssp_estimator_options* o) {
  tssp::EstimatorOptions out;
  if (!o) return out;
  if (o->bandwidth > 0.0) out.bandwidth = o->bandwidth;
  if (o->bd_degree > 0) out.bd.degree = o->bd_degree;
  if (o->bd_has_support) {
    out.bd.support_lo = o->bd_support_lo;
    out.bd.support_hi = o->bd_support_hi;
  }
  out.bd.mode_budget = o->bd_mode_budget;
  return out;
}

tssp::QualitySpec to_spec(const tssp_quality_spec& s) {
  tssp::QualitySpec q{s.aql, s.rql, s.alpha, s.beta, s.alpha1, s.beta1, s.alpha2, s.beta2};
  q.validate();
  return q;
}

tssp::SamplingPlan to_plan(const tssp_plan& p) {
  tssp::SamplingPlan plan{p.n, p.c};
  plan.validate();
  return plan;
}

tssp::QuadratureConfig to_quad(const tssp_quadrature_config* q) {
  tssp::QuadratureConfig cfg;
  if (q) cfg = {q->rel_tol, q->abs_tol, q->truncation_radius, q->max_subdivisions};
  cfg.validate();
  return cfg;
}

tssp::SolverConfig to_solver(const tssp_solver_config* s) {
  tssp::SolverConfig cfg;
  if (s) {
    cfg = {s->epsilon, s->grid_n_max, s->grid_c_max, s->refine_max_iter, s->enforce_lambda != 0};
  }
  cfg.validate();
  return cfg;
}

tssp::DependenceSpec to_dep(const tssp_dependence* d) {
  using Kind = tssp::DependenceSpec::Kind;
  tssp::DependenceSpec dep;
  if (!d) return dep;
  switch (d->kind) {
    case TSSP_DEP_INDEPENDENT: dep.kind = Kind::independent; break;
    case TSSP_DEP_PANEL: dep.kind = Kind::panel; break;
    case TSSP_DEP_SPATIAL_BATCH: dep.kind = Kind::spatial_batch; break;
    default: tssp::fail(tssp::Errc::domain, "unknown dependence kind");
  }
  dep.rho_hat = d->rho_hat;
  dep.lambda = d->lambda;
  dep.batch_size = d->batch_size;
  dep.r1 = d->r1;
  dep.r2 = d->r2;
  dep.sigma_b2 = d->sigma_b2;
  dep.sigma_eps2 = d->sigma_eps2;
  dep.rho_cap = d->rho_cap;
  dep.validate();
  return dep;
}

tssp_risks from_risks(const tssp::Risks& r) {
  return {r.alpha1, r.beta1, r.alpha2, r.beta2, r.alpha, r.beta};
}

tssp::SimModel to_model(const tssp_sim_config& c) {
  tssp::SimModel model = tssp::SimModel::standard(
      c.model, c.scale_interp == TSSP_SCALE_STDDEV ? tssp::ScaleInterp::stddev
                                                    : tssp::ScaleInterp::variance);
  model.d = c.d;
  model.validate();
  return model;
}

}  // namespace

extern "C" {

const char* tssp_version(void) { return "0.1.0"; }

const char* tssp_status_name(tssp_status status) {
  switch (status) {
    case TSSP_OK: return "ok";
    case TSSP_ERR_DOMAIN: return "domain";
    case TSSP_ERR_INPUT: return "input";
    case TSSP_ERR_CONVERGENCE: return "convergence";
    case TSSP_ERR_DEGENERATE_SAMPLE: return "degenerate-sample";
    case TSSP_ERR_INFEASIBLE_ALLOCATION: return "infeasible-allocation";
    case TSSP_ERR_ZERO_SEPARATION: return "zero-separation";
    case TSSP_ERR_NULL_EVENT: return "null-event";
    case TSSP_ERR_DEPENDENCE_OUT_OF_RANGE: return "dependence-out-of-range";
    case TSSP_ERR_DEGENERATE_PAIRS: return "degenerate-pairs";
    case TSSP_ERR_INFEASIBLE_SPEC: return "infeasible-spec";
    case TSSP_ERR_DEGENERATE_ESTIMATE: return "degenerate-estimate";
    case TSSP_ERR_TOO_MANY_FAILURES: return "too-many-failures";
    case TSSP_ERR_NULL_ARGUMENT: return "null-argument";
    case TSSP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* tssp_last_error(void) { return last_error.c_str(); }

tssp_status tssp_sample_create(const double* values, size_t n, tssp_sample** out) {
  TSSP_REQUIRE(out);
  TSSP_REQUIRE(values || n == 0);
  *out = nullptr;
  return guarded([&] {
    *out = new tssp_sample{tssp::Sample(std::vector<double>(values, values + n))};
  });
}

tssp_status tssp_sample_load_csv(const char* path, tssp_sample** out) {
  TSSP_REQUIRE(path);
  TSSP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new tssp_sample{tssp::Sample(tssp::load_values_csv(path))}; });
}

void tssp_sample_destroy(tssp_sample* sample) { delete sample; }

size_t tssp_sample_size(const tssp_sample* sample) { return sample ? sample->sample.size() : 0; }

tssp_status tssp_sample_moments(const tssp_sample* sample, double* mean, double* stddev) {
  TSSP_REQUIRE(sample);
  TSSP_REQUIRE(mean);
  TSSP_REQUIRE(stddev);
  return guarded([&] {
    const auto mom = tssp::SampleMoments::of(sample->sample.values());
    *mean = mom.mean;
    *stddev = mom.stddev;
  });
}

tssp_status tssp_method_parse(const char* text, tssp_method* out) {
  TSSP_REQUIRE(text);
  TSSP_REQUIRE(out);
  const auto m = tssp::parse_method(text);
  if (!m) {
    last_error = std::string("unknown estimation method '") + text + "'";
    return TSSP_ERR_INPUT;
  }
  switch (*m) {
    case tssp::Method::empirical: *out = TSSP_METHOD_EMPIRICAL; break;
    case tssp::Method::kde_bcv: *out = TSSP_METHOD_KDE_BCV; break;
    case tssp::Method::kde_sj: *out = TSSP_METHOD_KDE_SJ; break;
    case tssp::Method::bd_poly: *out = TSSP_METHOD_BD; break;
  }
  last_error.clear();
  return TSSP_OK;
}

const char* tssp_method_name(tssp_method method) {
  switch (method) {
    case TSSP_METHOD_EMPIRICAL: return "empirical";
    case TSSP_METHOD_KDE_BCV: return "kde-bcv";
    case TSSP_METHOD_KDE_SJ: return "kde-sj";
    case TSSP_METHOD_BD: return "bd";
  }
  return "unknown";
}

void tssp_estimator_options_default(tssp_estimator_options* out) {
  if (!out) return;
  *out = {0.0, 0, 0, 0.0, 0.0, tssp::BDConfig{}.mode_budget};
}

tssp_status tssp_estimator_create(const tssp_sample* sample, tssp_method method,
                                  const tssp_estimator_options* options, tssp_estimator** out) {
  TSSP_REQUIRE(sample);
  TSSP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new tssp_estimator{
        tssp::build_estimator(sample->sample, to_method(method), to_options(options))};
  });
}

tssp_status tssp_estimator_normal_reference(tssp_estimator** out) {
  TSSP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new tssp_estimator{tssp::normal_reference_estimator()}; });
}

void tssp_estimator_destroy(tssp_estimator* estimator) { delete estimator; }

tssp_status tssp_estimator_evaluate(const tssp_estimator* estimator, double p, double* out) {
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] { *out = estimator->estimator.evaluate(p); });
}

tssp_status tssp_estimator_raw_quantile(const tssp_estimator* estimator, double p, double* out) {
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] { *out = estimator->estimator.raw_quantile(p); });
}

tssp_status tssp_estimator_info_get(const tssp_estimator* estimator, tssp_estimator_info* out) {
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  const auto& e = estimator->estimator;
  const auto& d = e.diagnostics();
  out->mean = e.moments().mean;
  out->stddev = e.moments().stddev;
  out->has_bandwidth = d.bandwidth.has_value();
  out->bandwidth = d.bandwidth.value_or(0.0);
  out->has_degree = d.degree.has_value();
  out->degree = d.degree.value_or(0);
  out->certified = d.certified ? (*d.certified ? 1 : 0) : -1;
  last_error.clear();
  return TSSP_OK;
}

tssp_status tssp_allocate_risks(double alpha, double beta, double alpha1, int symmetric,
                                tssp_risks* out) {
  TSSP_REQUIRE(out);
  return guarded([&] { *out = from_risks(tssp::allocate_risks(alpha, beta, alpha1, symmetric)); });
}

tssp_status tssp_equal_split_risks(double alpha, double beta, tssp_risks* out) {
  TSSP_REQUIRE(out);
  return guarded([&] { *out = from_risks(tssp::equal_split_risks(alpha, beta)); });
}

tssp_status tssp_quality_spec_from_risks(double aql, double rql, const tssp_risks* risks,
                                         tssp_quality_spec* out) {
  TSSP_REQUIRE(risks);
  TSSP_REQUIRE(out);
  return guarded([&] {
    const tssp::Risks r{risks->alpha1, risks->beta1, risks->alpha2,
                        risks->beta2,  risks->alpha, risks->beta};
    const auto s = tssp::QualitySpec::from_risks(aql, rql, r);
    *out = {s.aql, s.rql, s.alpha, s.beta, s.alpha1, s.beta1, s.alpha2, s.beta2};
  });
}

void tssp_quadrature_config_default(tssp_quadrature_config* out) {
  if (!out) return;
  const tssp::QuadratureConfig q;
  *out = {q.rel_tol, q.abs_tol, q.truncation_radius, q.max_subdivisions};
}

void tssp_solver_config_default(tssp_solver_config* out) {
  if (!out) return;
  const tssp::SolverConfig s;
  *out = {s.epsilon, s.grid_n_max, s.grid_c_max, s.refine_max_iter, s.enforce_lambda ? 1 : 0};
}

void tssp_dependence_default(tssp_dependence* out) {
  if (!out) return;
  const tssp::DependenceSpec d;
  *out = {TSSP_DEP_INDEPENDENT, d.rho_hat, d.lambda,    d.batch_size, d.r1,
          d.r2,                 d.sigma_b2, d.sigma_eps2, d.rho_cap};
}

tssp_status tssp_stage1_plan(const tssp_quality_spec* spec, const tssp_estimator* estimator,
                             tssp_plan* out) {
  TSSP_REQUIRE(spec);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] {
    const auto plan = tssp::stage1_plan(to_spec(*spec), estimator->estimator);
    *out = {plan.n, plan.c};
  });
}

tssp_status tssp_stage2_plan(const tssp_quality_spec* spec, const tssp_plan* plan1,
                             const tssp_estimator* estimator, const tssp_dependence* dep,
                             const tssp_solver_config* solver, const tssp_quadrature_config* quad,
                             tssp_stage2_result* out) {
  TSSP_REQUIRE(spec);
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] {
    const auto r = tssp::stage2_plan(to_spec(*spec), to_plan(*plan1), estimator->estimator,
                                     to_dep(dep), to_solver(solver), to_quad(quad));
    out->plan = {r.plan.n, r.plan.c};
    out->grid_minimizer = {r.grid_minimizer.n, r.grid_minimizer.c};
    out->continuous_n = r.continuous_n;
    out->continuous_c = r.continuous_c;
    out->grid_deviation = r.grid_deviation;
    out->refined_deviation = r.refined_deviation;
    out->final_deviation = r.final_deviation;
    out->within_tolerance = r.within_tolerance ? 1 : 0;
    out->oc_aql = r.oc_aql;
    out->oc_rql = r.oc_rql;
    out->rho = r.rho;
  });
}

tssp_status tssp_oc1(double p, const tssp_plan* plan1, const tssp_estimator* estimator,
                     double* out) {
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] { *out = tssp::oc1(p, to_plan(*plan1), estimator->estimator); });
}

tssp_status tssp_oc2_independent(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                                 const tssp_estimator* estimator,
                                 const tssp_quadrature_config* quad, double* out) {
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(plan2);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] {
    *out = tssp::oc2_independent(p, to_plan(*plan1), to_plan(*plan2), estimator->estimator,
                                 to_quad(quad));
  });
}

tssp_status tssp_oc2_dependent(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                               const tssp_estimator* estimator, double rho, double rho_cap,
                               const tssp_quadrature_config* quad, double* out) {
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(plan2);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] {
    *out = tssp::oc2_dependent(p, to_plan(*plan1), to_plan(*plan2), estimator->estimator, rho,
                               to_quad(quad), rho_cap);
  });
}

tssp_status tssp_oc2(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                     const tssp_estimator* estimator, const tssp_dependence* dep,
                     const tssp_quadrature_config* quad, double* out) {
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(plan2);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] {
    *out = tssp::oc2(p, to_plan(*plan1), to_plan(*plan2), estimator->estimator, to_dep(dep),
                     to_quad(quad));
  });
}

tssp_status tssp_overall_oc(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                            const tssp_estimator* estimator, const tssp_dependence* dep,
                            const tssp_quadrature_config* quad, double* out) {
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(plan2);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  return guarded([&] {
    *out = tssp::overall_oc(p, to_plan(*plan1), to_plan(*plan2), estimator->estimator,
                            to_dep(dep), to_quad(quad));
  });
}

tssp_status tssp_validate_plan(const tssp_quality_spec* spec, tssp_stage stage,
                               const tssp_plan* plan1, const tssp_plan* plan2,
                               const tssp_estimator* estimator, const tssp_dependence* dep,
                               const tssp_quadrature_config* quad, double slack,
                               tssp_validity* out) {
  TSSP_REQUIRE(spec);
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(estimator);
  TSSP_REQUIRE(out);
  if (stage != TSSP_STAGE_1) TSSP_REQUIRE(plan2);
  return guarded([&] {
    const auto s = to_spec(*spec);
    const auto p1 = to_plan(*plan1);
    const auto& g = estimator->estimator;
    tssp::ValidityReport r;
    if (stage == TSSP_STAGE_1) {
      r = tssp::validate_plan(s, [&](double p) { return tssp::oc1(p, p1, g); },
                              tssp::Stage::first, slack);
    } else {
      const auto p2 = to_plan(*plan2);
      const auto d = to_dep(dep);
      const auto q = to_quad(quad);
      if (stage == TSSP_STAGE_2) {
        r = tssp::validate_plan(s, [&](double p) { return tssp::oc2(p, p1, p2, g, d, q); },
                                tssp::Stage::second, slack);
      } else if (stage == TSSP_STAGE_OVERALL) {
        r = tssp::validate_plan(s, [&](double p) { return tssp::overall_oc(p, p1, p2, g, d, q); },
                                tssp::Stage::overall, slack);
      } else {
        tssp::fail(tssp::Errc::domain, "unknown stage");
      }
    }
    *out = {r.oc_at_aql,       r.oc_at_rql,       r.producer_target, r.consumer_target,
            r.producer_margin, r.consumer_margin, r.producer_ok,     r.consumer_ok};
  });
}

tssp_status tssp_estimate_rho(const double* x1, const double* x2, size_t pairs, size_t n1,
                              size_t n2, double rho_cap, double* out) {
  TSSP_REQUIRE(x1);
  TSSP_REQUIRE(x2);
  TSSP_REQUIRE(out);
  return guarded([&] {
    tssp::PairedSample ps{std::vector<double>(x1, x1 + pairs), std::vector<double>(x2, x2 + pairs),
                          n1, n2};
    *out = tssp::estimate_rho(ps, rho_cap);
  });
}

tssp_status tssp_estimate_rho_csv(const char* path, double lambda, double rho_cap, double* out) {
  TSSP_REQUIRE(path);
  TSSP_REQUIRE(out);
  return guarded([&] {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      tssp::fail(tssp::Errc::domain, "lambda must be positive");
    }
    const auto ps = tssp::load_pairs_csv(path);
    const double rho = std::sqrt(lambda) * tssp::estimate_rho_unchecked(ps);
    tssp::check_rho(rho, rho_cap);
    *out = rho;
  });
}

tssp_status tssp_spatial_batch_rho(size_t b, double r1, double r2, double sigma_b2,
                                   double sigma_eps2, double rho_cap, double* covariance,
                                   double* coefficient) {
  return guarded([&] {
    // Report the raw covariance even when the coefficient is out of range.
    const auto raw = tssp::spatial_batch_covariance(b, r1, r2, sigma_b2, sigma_eps2);
    if (covariance) *covariance = raw.covariance;
    if (coefficient) *coefficient = raw.coefficient;
    tssp::check_rho(raw.coefficient, rho_cap);
  });
}

tssp_status tssp_round_batch(size_t n, size_t b, size_t* out) {
  TSSP_REQUIRE(out);
  return guarded([&] { *out = tssp::round_batch(n, b); });
}

void tssp_sim_config_default(tssp_sim_config* out) {
  if (!out) return;
  *out = {1, TSSP_SCALE_VARIANCE, 1.0, 250, 1000, 0, 0, 0, TSSP_METHOD_KDE_SJ, 0};
}

tssp_status tssp_simulate_plan_distribution(const tssp_sim_config* config,
                                            const tssp_quality_spec* spec,
                                            const tssp_estimator_options* options,
                                            const tssp_dependence* dep,
                                            const tssp_solver_config* solver,
                                            const tssp_quadrature_config* quad,
                                            tssp_sim_result* out) {
  TSSP_REQUIRE(config);
  TSSP_REQUIRE(spec);
  TSSP_REQUIRE(out);
  return guarded([&] {
    tssp::SimConfig cfg;
    cfg.solver = to_solver(solver);
    cfg.quad = to_quad(quad);
    cfg.estimator = to_options(options);
    cfg.threads = config->threads;
    std::optional<tssp::Method> method;
    if (!config->exact_quantile) method = to_method(config->method);
    const auto r = tssp::simulate_plan_distribution(
        to_model(*config), config->m, to_spec(*spec), method, to_dep(dep), config->reps,
        {config->seed, config->stream_id}, cfg);
    *out = {r.e_n1, r.sd_n1, r.e_c1, r.sd_c1, r.e_n2, r.sd_n2, r.e_c2, r.sd_c2, r.reps, r.failures};
  });
}

tssp_status tssp_simulate_acceptance(const tssp_sim_config* config, double p,
                                     const tssp_plan* plan1, const tssp_plan* plan2,
                                     const tssp_dependence* dep, tssp_acceptance* out) {
  TSSP_REQUIRE(config);
  TSSP_REQUIRE(plan1);
  TSSP_REQUIRE(plan2);
  TSSP_REQUIRE(out);
  return guarded([&] {
    const auto model = to_model(*config);
    const auto lot = model.with_fraction_defective(p);
    const auto r = tssp::simulate_acceptance(lot, to_plan(*plan1), to_plan(*plan2),
                                             std::sqrt(model.variance()), to_dep(dep),
                                             config->reps, {config->seed, config->stream_id},
                                             config->threads);
    *out = {r.rate, r.se, r.stage1_rate};
  });
}

tssp_status tssp_mc_oc_oracle(double a, double b, double rho, size_t draws, uint64_t seed,
                              uint64_t stream_id, double* value, double* se) {
  TSSP_REQUIRE(value);
  return guarded([&] {
    const auto r = tssp::mc_oc_oracle(a, b, rho, draws, {seed, stream_id});
    *value = r.value;
    if (se) *se = r.se;
  });
}

}  // extern "C"
