#include "tssp/oc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tssp/error.hpp"

namespace tssp {

namespace {

void require_risk(double value, const char* name) {
  if (!(value > 0.0 && value < 0.5)) {
    fail(Errc::domain, std::string(name) + " must lie in (0, 0.5), got " + std::to_string(value));
  }
}

void require_fraction(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(Errc::domain, "fraction defective must lie in (0, 1), got " + std::to_string(p));
  }
}

}  // namespace

Risks allocate_risks(double alpha, double beta, double alpha1, bool symmetric) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(alpha1 > 0.0)) {
    fail(Errc::domain, "risks must lie in (0, 1)");
  }
  if (!(alpha1 < alpha)) {
    fail(Errc::infeasible_allocation, "stage-1 producer risk alpha1 = " + std::to_string(alpha1) +
                                          " must be below the global alpha = " +
                                          std::to_string(alpha));
  }
  Risks r;
  r.alpha1 = alpha1;
  r.alpha2 = 1.0 - (1.0 - alpha) / (1.0 - alpha1);
  if (symmetric) {
    r.beta1 = r.alpha1;
    r.beta2 = r.alpha2;
  } else {
    if (!(beta > 0.0 && beta < 1.0)) fail(Errc::domain, "beta must lie in (0, 1)");
    r.beta1 = r.beta2 = std::sqrt(beta);
  }
  r.alpha = 1.0 - (1.0 - r.alpha1) * (1.0 - r.alpha2);
  r.beta = r.beta1 * r.beta2;
  return r;
}

Risks equal_split_risks(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    fail(Errc::domain, "risks must lie in (0, 1)");
  }
  Risks r;
  r.alpha1 = r.alpha2 = 1.0 - std::sqrt(1.0 - alpha);
  r.beta1 = r.beta2 = std::sqrt(beta);
  r.alpha = 1.0 - (1.0 - r.alpha1) * (1.0 - r.alpha2);
  r.beta = r.beta1 * r.beta2;
  return r;
}

QualitySpec QualitySpec::from_risks(double aql, double rql, const Risks& risks) {
  QualitySpec spec{aql,          rql,         risks.alpha,  risks.beta,
                   risks.alpha1, risks.beta1, risks.alpha2, risks.beta2};
  spec.validate();
  return spec;
}

void QualitySpec::validate() const {
  if (!(aql > 0.0 && aql < 1.0) || !(rql > 0.0 && rql < 1.0)) {
    fail(Errc::domain, "AQL and RQL must lie in (0, 1)");
  }
  if (!(aql < rql)) {
    fail(Errc::domain, "AQL (" + std::to_string(aql) + ") must be below RQL (" +
                           std::to_string(rql) + ")");
  }
  require_risk(alpha, "alpha");
  require_risk(beta, "beta");
  require_risk(alpha1, "alpha1");
  require_risk(beta1, "beta1");
  require_risk(alpha2, "alpha2");
  require_risk(beta2, "beta2");
}

void SamplingPlan::validate() const {
  if (!(n >= 1.0) || !std::isfinite(n)) fail(Errc::domain, "plan sample size must be >= 1");
  if (!std::isfinite(c)) fail(Errc::domain, "plan critical value must be finite");
}

double oc1_at(double g, const SamplingPlan& plan1) {
  return std_normal_sf(plan1.c + std::sqrt(plan1.n) * g);
}

namespace {

// P(Z1 > a, Z1 + Z2 > b) / P(Z1 > a), with the stage-2 tail given by `tail(z)`.
template <class Tail>
double conditional_stage2(double a, Tail tail, const QuadratureConfig& cfg) {
  const double denom = std_normal_sf(a);
  if (!(denom >= kMinConditioningProbability)) {
    fail(Errc::null_event, "stage-1 acceptance probability " + std::to_string(denom) +
                               " is too small to condition on");
  }
  auto integrand = [&](double z) { return tail(z) * std_normal_pdf(z) / denom; };
  const double radius = cfg.truncation_radius;
  const double lo = std::max(a, -radius);
  const double hi = std::max(radius, a + radius);
  const double value = integrate(integrand, lo, hi, cfg).value;
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

double oc2_independent_at(double g, const SamplingPlan& plan1, const SamplingPlan& plan2,
                          const QuadratureConfig& cfg) {
  const double a = plan1.c + std::sqrt(plan1.n) * g;
  const double b = plan2.c + (std::sqrt(plan1.n) + std::sqrt(plan2.n)) * g;
  return conditional_stage2(a, [b](double z) { return std_normal_sf(b - z); }, cfg);
}

double oc2_at(double g, const SamplingPlan& plan1, const SamplingPlan& plan2, double rho,
              const QuadratureConfig& cfg) {
  if (!(std::abs(rho) < 1.0)) fail(Errc::dependence_out_of_range, "|rho| must be below 1");
  const double a = plan1.c + std::sqrt(plan1.n) * g;
  const double b = plan2.c + (std::sqrt(plan1.n) + std::sqrt(plan2.n)) * g;
  const double scale = std::sqrt(1.0 - rho * rho);
  return conditional_stage2(
      a, [b, rho, scale](double z) { return std_normal_sf((b - z - rho * z) / scale); }, cfg);
}

double oc1(double p, const SamplingPlan& plan1, const StandardizedQuantileEstimator& g) {
  require_fraction(p);
  return oc1_at(g.evaluate(p), plan1);
}

double oc2_independent(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
                       const StandardizedQuantileEstimator& g, const QuadratureConfig& cfg) {
  require_fraction(p);
  return oc2_independent_at(g.evaluate(p), plan1, plan2, cfg);
}

double oc2_dependent(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
                     const StandardizedQuantileEstimator& g, double rho,
                     const QuadratureConfig& cfg, double rho_cap) {
  require_fraction(p);
  check_rho(rho, rho_cap);
  return oc2_at(g.evaluate(p), plan1, plan2, rho, cfg);
}

double oc2(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
           const StandardizedQuantileEstimator& g, const DependenceSpec& dep,
           const QuadratureConfig& cfg) {
  if (dep.kind == DependenceSpec::Kind::independent) {
    return oc2_independent(p, plan1, plan2, g, cfg);
  }
  return oc2_dependent(p, plan1, plan2, g, dep.correlation(), cfg, dep.rho_cap);
}

double overall_oc(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
                  const StandardizedQuantileEstimator& g, const DependenceSpec& dep,
                  const QuadratureConfig& cfg) {
  require_fraction(p);
  const double gp = g.evaluate(p);
  const double first = oc1_at(gp, plan1);
  if (first < kMinConditioningProbability) return 0.0;
  const double second = dep.kind == DependenceSpec::Kind::independent
                            ? oc2_independent_at(gp, plan1, plan2, cfg)
                            : oc2_at(gp, plan1, plan2, dep.correlation(), cfg);
  return first * second;
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::first: return "stage1";
    case Stage::second: return "stage2";
    case Stage::overall: return "overall";
  }
  return "unknown";
}

ValidityReport validate_plan(const QualitySpec& spec, const std::function<double(double)>& oc,
                             Stage stage, double slack) {
  ValidityReport r;
  r.stage = stage;
  switch (stage) {
    case Stage::first:
      r.producer_target = 1.0 - spec.alpha1;
      r.consumer_target = spec.beta1;
      break;
    case Stage::second:
      r.producer_target = 1.0 - spec.alpha2;
      r.consumer_target = spec.beta2;
      break;
    case Stage::overall:
      r.producer_target = 1.0 - spec.alpha;
      r.consumer_target = spec.beta;
      break;
  }
  r.oc_at_aql = oc(spec.aql);
  r.oc_at_rql = oc(spec.rql);
  r.producer_margin = r.oc_at_aql - r.producer_target;
  r.consumer_margin = r.consumer_target - r.oc_at_rql;
  r.producer_ok = r.producer_margin >= -slack;
  r.consumer_ok = r.consumer_margin >= -slack;
  return r;
}

}  // namespace tssp
