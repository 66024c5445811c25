#include "tssp/plans.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "tssp/error.hpp"

namespace tssp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;
constexpr double kRefineRadius = 3.0;

class Stage2Objective {
 public:
  Stage2Objective(const QualitySpec& spec, const SamplingPlan& plan1, double g_aql, double g_rql,
                  const DependenceSpec& dep, const QuadratureConfig& quad)
      : spec_(spec), plan1_(plan1), g_aql_(g_aql), g_rql_(g_rql), dep_(dep), quad_(quad) {}

  double rho(double n2) const {
    if (dep_.kind != DependenceSpec::Kind::spatial_batch) return dep_.correlation();
    const double b = static_cast<double>(dep_.batch_size);
    return dep_.correlation_for_counts(plan1_.n / b, n2 / b);
  }

  // Infeasible corners of the search region (null events, rho beyond the cap,
  // quadrature failures) simply score +inf.
  double operator()(double n2, double c2) const {
    try {
      return stage2_deviation(spec_, plan1_, {n2, c2}, g_aql_, g_rql_, rho(n2), quad_);
    } catch (const Error& e) {
      if (e.code() == Errc::dependence_out_of_range) rho_failure_ = e.what();
      return kInf;
    }
  }

  const std::string& rho_failure() const { return rho_failure_; }

 private:
  const QualitySpec& spec_;
  const SamplingPlan& plan1_;
  double g_aql_, g_rql_;
  const DependenceSpec& dep_;
  const QuadratureConfig& quad_;
  mutable std::string rho_failure_;
};

struct Minimum {
  double x;
  double value;
};

template <class F>
Minimum brent(F&& f, double lo, double hi, int max_iter) {
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, kBrentBits, iters);
  return {x, fx};
}

// Best c for a fixed n, searched around c0; never worse than c0 itself.
Minimum refine_c(const Stage2Objective& obj, double n, double c0, int max_iter) {
  Minimum best{c0, obj(n, c0)};
  const Minimum m = brent([&](double c) { return obj(n, c); }, c0 - kRefineRadius,
                          c0 + kRefineRadius, max_iter);
  if (m.value < best.value) best = m;
  return best;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) fail(Errc::domain, "solver epsilon must be positive");
  if (grid_n_max < 1) fail(Errc::domain, "grid_n_max must be at least 1");
  if (!(grid_c_max >= 1.0) || !std::isfinite(grid_c_max)) {
    fail(Errc::domain, "grid_c_max must be at least 1");
  }
  if (refine_max_iter < 1) fail(Errc::domain, "refine_max_iter must be at least 1");
}

SamplingPlan stage1_plan(const QualitySpec& spec, const StandardizedQuantileEstimator& g) {
  spec.validate();
  const double g_aql = g.evaluate(spec.aql);
  const double g_rql = g.evaluate(spec.rql);
  const double gap = g_aql - g_rql;
  if (!(gap < 0.0)) {
    fail(Errc::zero_separation,
         "estimated standardized quantiles at AQL (" + std::to_string(g_aql) + ") and RQL (" +
             std::to_string(g_rql) + ") do not separate the limits");
  }
  const double z = std_normal_quantile(spec.alpha1) - std_normal_quantile(1.0 - spec.beta1);
  const double n1 = std::max(1.0, std::ceil(z * z / (gap * gap)));
  return {n1, -0.5 * std::sqrt(n1) * (g_aql + g_rql)};
}

double stage2_deviation(const QualitySpec& spec, const SamplingPlan& plan1,
                        const SamplingPlan& plan2, double g_aql, double g_rql, double rho,
                        const QuadratureConfig& quad) {
  const double at_aql = oc2_at(g_aql, plan1, plan2, rho, quad) - (1.0 - spec.alpha2);
  const double at_rql = oc2_at(g_rql, plan1, plan2, rho, quad) - spec.beta2;
  return at_aql * at_aql + at_rql * at_rql;
}

Stage2Result stage2_plan(const QualitySpec& spec, const SamplingPlan& plan1,
                         const StandardizedQuantileEstimator& g, const DependenceSpec& dep,
                         const SolverConfig& solver, const QuadratureConfig& quad) {
  spec.validate();
  plan1.validate();
  solver.validate();
  quad.validate();
  dep.validate();

  const double g_aql = g.evaluate(spec.aql);
  const double g_rql = g.evaluate(spec.rql);
  const Stage2Objective obj(spec, plan1, g_aql, g_rql, dep, quad);
  const int c_max = static_cast<int>(std::floor(solver.grid_c_max));
  const bool fixed_n = solver.enforce_lambda && dep.kind == DependenceSpec::Kind::panel;

  Stage2Result r;

  // Integer grid, n ascending then c ascending; strict improvement keeps the
  // smallest (n, c) among ties, and the first point within epsilon ends the scan.
  const int n_lo = fixed_n ? static_cast<int>(std::ceil(plan1.n / dep.lambda - 1e-9)) : 1;
  const int n_hi = fixed_n ? n_lo : solver.grid_n_max;
  double best = kInf;
  for (int n = std::max(n_lo, 1); n <= n_hi && best > solver.epsilon; ++n) {
    for (int c = 1; c <= c_max; ++c) {
      const double f = obj(n, c);
      if (f < best) {
        best = f;
        r.grid_minimizer = {static_cast<double>(n), static_cast<double>(c)};
      }
      if (f <= solver.epsilon) break;
    }
  }
  if (!std::isfinite(best) && !obj.rho_failure().empty()) {
    fail(Errc::dependence_out_of_range, obj.rho_failure());
  }
  if (!std::isfinite(best)) {
    fail(Errc::infeasible_spec, "no stage-2 grid point yields a finite OC2 deviation");
  }
  r.grid_deviation = best;

  double n_star = r.grid_minimizer.n;
  double c_star = r.grid_minimizer.c;
  double refined = best;
  if (fixed_n) {
    const Minimum m = refine_c(obj, n_star, c_star, solver.refine_max_iter);
    c_star = m.x;
    refined = m.value;
  } else {
    const double lo = std::max(1.0, n_star - kRefineRadius);
    const double hi = std::min(static_cast<double>(solver.grid_n_max), n_star + kRefineRadius);
    const Minimum outer = brent(
        [&](double n) { return refine_c(obj, n, c_star, solver.refine_max_iter).value; }, lo, hi,
        solver.refine_max_iter);
    if (outer.value < refined) {
      const Minimum inner = refine_c(obj, outer.x, c_star, solver.refine_max_iter);
      n_star = outer.x;
      c_star = inner.x;
      refined = inner.value;
    }
  }
  r.continuous_n = n_star;
  r.continuous_c = c_star;
  r.refined_deviation = refined;

  double n2 = std::ceil(n_star - 1e-9);
  if (dep.kind == DependenceSpec::Kind::spatial_batch) {
    n2 = static_cast<double>(round_batch(static_cast<std::size_t>(n2), dep.batch_size));
  }
  if (n2 > solver.grid_n_max && !fixed_n) {
    fail(Errc::infeasible_spec, "stage-2 sample size exceeds grid_n_max = " +
                                    std::to_string(solver.grid_n_max));
  }
  const Minimum final_c = refine_c(obj, n2, c_star, solver.refine_max_iter);
  if (!std::isfinite(final_c.value)) {
    fail(Errc::infeasible_spec, "rounded stage-2 plan has no finite OC2 deviation");
  }

  r.plan = {n2, final_c.x};
  r.final_deviation = final_c.value;
  r.within_tolerance = final_c.value <= solver.epsilon;
  r.rho = obj.rho(n2);
  r.oc_aql = oc2_at(g_aql, plan1, r.plan, r.rho, quad);
  r.oc_rql = oc2_at(g_rql, plan1, r.plan, r.rho, quad);
  return r;
}

}  // namespace tssp
