#include <doctest.h>

#include <cmath>

#include "tssp/error.hpp"
#include "tssp/plans.hpp"

using namespace tssp;

namespace {

QualitySpec normal_spec(double alpha1 = 0.03) {
  return QualitySpec::from_risks(0.02, 0.05, allocate_risks(0.1, 0.0, alpha1, true));
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::domain;
}

}  // namespace

TEST_SUITE("plans") {

TEST_CASE("closed-form stage-1 plan") {
  const auto g = normal_reference_estimator();
  QualitySpec spec = normal_spec();
  SamplingPlan p = stage1_plan(spec, g);
  CHECK(p.n == 85.0);
  CHECK(p.c == doctest::Approx(17.0497152625527).epsilon(1e-12));

  spec.alpha1 = spec.beta1 = 0.07;
  p = stage1_plan(spec, g);
  CHECK(p.n == 53.0);
  CHECK(p.c == doctest::Approx(13.4631164551891).epsilon(1e-12));
}

TEST_CASE("stage-1 needs separated quantiles") {
  const StandardizedQuantileEstimator flat([](double) { return 1.0; }, SampleMoments{0.0, 1.0});
  CHECK(code_of([&] { stage1_plan(normal_spec(), flat); }) == Errc::zero_separation);
}

TEST_CASE("stage-2 plan for the normal specification") {
  const auto g = normal_reference_estimator();
  const QualitySpec spec = normal_spec();
  const SamplingPlan p1 = stage1_plan(spec, g);
  const Stage2Result r = stage2_plan(spec, p1, g, DependenceSpec::independent());

  CHECK(r.grid_minimizer == SamplingPlan{24.0, 27.0});
  CHECK(r.continuous_n == doctest::Approx(23.0327527328158).epsilon(1e-4));
  CHECK(r.continuous_c == doctest::Approx(26.8846217584529).epsilon(1e-4));
  CHECK(r.refined_deviation < 1e-12);

  CHECK(r.plan.n == 24.0);
  CHECK(r.plan.c == doctest::Approx(27.0655509900308).epsilon(1e-6));
  CHECK(r.oc_aql == doctest::Approx(0.930340358861256).epsilon(1e-7));
  CHECK(r.oc_rql == doctest::Approx(0.0700610054691308).epsilon(1e-6));
  CHECK(r.final_deviation ==
        doctest::Approx(stage2_deviation(spec, p1, r.plan, g.evaluate(0.02), g.evaluate(0.05), 0.0, {})));
  // Rounding n2 up costs accuracy; the plan is reported as best effort.
  CHECK_FALSE(r.within_tolerance);
  CHECK(r.final_deviation <= r.grid_deviation);
}

TEST_CASE("panel with a fixed sample-size ratio solves c2 only") {
  const auto g = normal_reference_estimator();
  const QualitySpec spec = normal_spec();
  const SamplingPlan p1 = stage1_plan(spec, g);
  SolverConfig solver;
  solver.enforce_lambda = true;
  const Stage2Result r = stage2_plan(spec, p1, g, DependenceSpec::panel(0.2, 3.0), solver);
  CHECK(r.plan.n == 29.0);
  CHECK(r.rho == doctest::Approx(0.2));
  CHECK(r.grid_minimizer.n == 29.0);
}

TEST_CASE("panel correlation shifts the solution") {
  const auto g = normal_reference_estimator();
  const QualitySpec spec = normal_spec();
  const SamplingPlan p1 = stage1_plan(spec, g);
  const Stage2Result ind = stage2_plan(spec, p1, g, DependenceSpec::independent());
  const Stage2Result dep = stage2_plan(spec, p1, g, DependenceSpec::panel(0.5, 1.0));
  CHECK(dep.rho == doctest::Approx(0.5));
  CHECK(dep.plan.n >= 1.0);
  CHECK_FALSE(dep.plan == ind.plan);
}

TEST_CASE("spatial batch plans") {
  const auto g = normal_reference_estimator();
  const QualitySpec spec = normal_spec();
  const SamplingPlan p1 = stage1_plan(spec, g);

  // sigma_B^2 = 0 leaves the count ratio: feasible only once n2 outgrows n1.
  const auto dep = DependenceSpec::spatial_batch(5, 17, 17, 0.0, 1.0);
  const Stage2Result r = stage2_plan(spec, p1, g, dep);
  CHECK(std::fmod(r.plan.n, 5.0) == 0.0);
  CHECK(std::abs(r.rho) < 0.99);
  CHECK(r.rho == doctest::Approx(std::sqrt(85.0 / r.plan.n)));

  // A strong batch effect pushes every coefficient beyond the cap.
  const auto strong = DependenceSpec::spatial_batch(4, 25, 25, 0.5, 1.0);
  CHECK(code_of([&] { stage2_plan(spec, p1, g, strong); }) == Errc::dependence_out_of_range);
}

TEST_CASE("stage-2 search with no finite deviation") {
  const auto g = normal_reference_estimator();
  const QualitySpec spec = normal_spec();
  CHECK(code_of([&] { stage2_plan(spec, {85.0, 60.0}, g, DependenceSpec::independent()); }) ==
        Errc::infeasible_spec);
}

TEST_CASE("solver configuration validation") {
  SolverConfig s;
  CHECK_NOTHROW(s.validate());
  s.epsilon = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.grid_n_max = 0;
  CHECK_THROWS_AS(s.validate(), Error);
}

}
