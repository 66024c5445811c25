#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "tssp/tssp.h"

namespace {

const std::string kData = TSSP_TEST_DATA;

struct Handles {
  tssp_sample* sample = nullptr;
  tssp_estimator* estimator = nullptr;
  ~Handles() {
    tssp_estimator_destroy(estimator);
    tssp_sample_destroy(sample);
  }
};

tssp_quality_spec normal_spec() {
  tssp_risks r;
  REQUIRE(tssp_allocate_risks(0.1, 0.0, 0.03, 1, &r) == TSSP_OK);
  tssp_quality_spec spec;
  REQUIRE(tssp_quality_spec_from_risks(0.02, 0.05, &r, &spec) == TSSP_OK);
  return spec;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status names and the last error message") {
  CHECK(std::string(tssp_status_name(TSSP_OK)) == "ok");
  CHECK(std::string(tssp_version()).size() > 0);
  tssp_risks r;
  CHECK(tssp_allocate_risks(0.1, 0.0, 0.2, 1, &r) == TSSP_ERR_INFEASIBLE_ALLOCATION);
  CHECK(std::strstr(tssp_last_error(), "alpha1") != nullptr);
  CHECK(tssp_allocate_risks(0.1, 0.0, 0.03, 1, &r) == TSSP_OK);
  CHECK(std::string(tssp_last_error()).empty());
  CHECK(tssp_allocate_risks(0.1, 0.0, 0.03, 1, nullptr) == TSSP_ERR_NULL_ARGUMENT);
}

TEST_CASE("samples and estimators through opaque handles") {
  Handles h;
  REQUIRE(tssp_sample_load_csv((kData + "/line.csv").c_str(), &h.sample) == TSSP_OK);
  CHECK(tssp_sample_size(h.sample) == 250);
  double mean = 0, sd = 0;
  REQUIRE(tssp_sample_moments(h.sample, &mean, &sd) == TSSP_OK);
  CHECK(mean == doctest::Approx(219.89054358).epsilon(1e-12));
  CHECK(sd == doctest::Approx(1.80484292423715).epsilon(1e-12));

  tssp_method method;
  REQUIRE(tssp_method_parse("kde-sj", &method) == TSSP_OK);
  CHECK(method == TSSP_METHOD_KDE_SJ);
  CHECK(tssp_method_parse("nope", &method) == TSSP_ERR_INPUT);

  REQUIRE(tssp_estimator_create(h.sample, method, nullptr, &h.estimator) == TSSP_OK);
  tssp_estimator_info info;
  REQUIRE(tssp_estimator_info_get(h.estimator, &info) == TSSP_OK);
  CHECK(info.has_bandwidth == 1);
  CHECK(info.bandwidth > 0.0);
  CHECK(info.certified == -1);

  double g = 0, raw = 0;
  REQUIRE(tssp_estimator_evaluate(h.estimator, 0.02, &g) == TSSP_OK);
  REQUIRE(tssp_estimator_raw_quantile(h.estimator, 0.02, &raw) == TSSP_OK);
  CHECK(g == doctest::Approx((raw - mean) / sd));
  CHECK(tssp_estimator_evaluate(h.estimator, 1.5, &g) == TSSP_ERR_DOMAIN);
}

TEST_CASE("missing files and degenerate samples") {
  tssp_sample* s = nullptr;
  CHECK(tssp_sample_load_csv("/nonexistent/values.csv", &s) == TSSP_ERR_INPUT);
  CHECK(s == nullptr);
  const double one[] = {1.0};
  CHECK(tssp_sample_create(one, 1, &s) == TSSP_ERR_DEGENERATE_SAMPLE);
  CHECK(tssp_sample_create(nullptr, 3, &s) == TSSP_ERR_NULL_ARGUMENT);
}

TEST_CASE("Bernstein-Durrmeyer options") {
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) y.push_back(0.1 + 0.8 * ((i * 7) % 20) / 19.0 + 0.01 * std::cos(i));
  Handles h;
  REQUIRE(tssp_sample_create(y.data(), y.size(), &h.sample) == TSSP_OK);
  tssp_estimator_options opt;
  tssp_estimator_options_default(&opt);
  opt.bd_degree = 5;
  opt.bd_has_support = 1;
  opt.bd_support_lo = 0.0;
  opt.bd_support_hi = 1.0;
  REQUIRE(tssp_estimator_create(h.sample, TSSP_METHOD_BD, &opt, &h.estimator) == TSSP_OK);
  double q = 0;
  REQUIRE(tssp_estimator_raw_quantile(h.estimator, 0.1, &q) == TSSP_OK);
  CHECK(q == doctest::Approx(0.261245153169813).epsilon(1e-12));

  opt.bd_support_lo = 0.5;
  tssp_estimator* bad = nullptr;
  CHECK(tssp_estimator_create(h.sample, TSSP_METHOD_BD, &opt, &bad) == TSSP_ERR_DOMAIN);
  CHECK(bad == nullptr);
}

TEST_CASE("plans and operating characteristics") {
  Handles h;
  REQUIRE(tssp_estimator_normal_reference(&h.estimator) == TSSP_OK);
  const tssp_quality_spec spec = normal_spec();
  CHECK(spec.alpha2 == doctest::Approx(0.0721649484536082).epsilon(1e-13));

  tssp_plan p1;
  REQUIRE(tssp_stage1_plan(&spec, h.estimator, &p1) == TSSP_OK);
  CHECK(p1.n == 85.0);
  CHECK(p1.c == doctest::Approx(17.0497152625527).epsilon(1e-12));

  tssp_dependence dep;
  tssp_dependence_default(&dep);
  tssp_stage2_result r;
  REQUIRE(tssp_stage2_plan(&spec, &p1, h.estimator, &dep, nullptr, nullptr, &r) == TSSP_OK);
  CHECK(r.plan.n == 24.0);
  CHECK(r.plan.c == doctest::Approx(27.0655509900308).epsilon(1e-6));
  CHECK(r.within_tolerance == 0);

  const tssp_plan fixed1{85.0, 17.05}, fixed2{30.0, 26.0};
  double v = 0;
  REQUIRE(tssp_oc2_dependent(0.02, &fixed1, &fixed2, h.estimator, 0.3, 0.99, nullptr, &v) == TSSP_OK);
  CHECK(v == doctest::Approx(0.998850919706083).epsilon(1e-9));
  REQUIRE(tssp_oc2_independent(0.02, &fixed1, &fixed2, h.estimator, nullptr, &v) == TSSP_OK);
  CHECK(v == doctest::Approx(0.999539435451859).epsilon(1e-9));
  CHECK(tssp_oc2_dependent(0.02, &fixed1, &fixed2, h.estimator, 0.995, 0.99, nullptr, &v) ==
        TSSP_ERR_DEPENDENCE_OUT_OF_RANGE);

  double o1 = 0, o2 = 0, all = 0;
  REQUIRE(tssp_oc2(0.02, &p1, &r.plan, h.estimator, &dep, nullptr, &o2) == TSSP_OK);
  REQUIRE(tssp_overall_oc(0.02, &p1, &r.plan, h.estimator, &dep, nullptr, &all) == TSSP_OK);
  REQUIRE(tssp_oc1(0.02, &p1, h.estimator, &o1) == TSSP_OK);
  CHECK(all == doctest::Approx(o1 * o2).epsilon(1e-14));

  tssp_validity val;
  REQUIRE(tssp_validate_plan(&spec, TSSP_STAGE_1, &p1, nullptr, h.estimator, nullptr, nullptr, 0.0,
                             &val) == TSSP_OK);
  CHECK(val.producer_ok == 1);
  CHECK(val.consumer_ok == 1);
}

TEST_CASE("dependence helpers") {
  double rho = 0;
  REQUIRE(tssp_estimate_rho_csv((kData + "/pairs.csv").c_str(), 1.0, 0.99, &rho) == TSSP_OK);
  CHECK(rho == doctest::Approx(0.416387687237266).epsilon(1e-10));
  CHECK(tssp_estimate_rho_csv((kData + "/pairs.csv").c_str(), 9.0, 0.99, &rho) ==
        TSSP_ERR_DEPENDENCE_OUT_OF_RANGE);

  const double x1[] = {1, 2, 3, 4}, x2[] = {2, 2, 2, 2};
  CHECK(tssp_estimate_rho(x1, x2, 4, 4, 4, 0.99, &rho) == TSSP_ERR_DEGENERATE_PAIRS);

  double cov = 0, coef = 0;
  CHECK(tssp_spatial_batch_rho(4, 25, 25, 0.1, 1.0, 0.99, &cov, &coef) ==
        TSSP_ERR_DEPENDENCE_OUT_OF_RANGE);
  CHECK(cov == doctest::Approx(1.4));
  CHECK(coef == doctest::Approx(1.4 / 1.1));

  size_t n = 0;
  REQUIRE(tssp_round_batch(23, 4, &n) == TSSP_OK);
  CHECK(n == 24);
}

TEST_CASE("simulation entry points") {
  tssp_sim_config cfg;
  tssp_sim_config_default(&cfg);
  cfg.exact_quantile = 1;
  cfg.reps = 3;
  const tssp_quality_spec spec = normal_spec();
  tssp_sim_result res;
  REQUIRE(tssp_simulate_plan_distribution(&cfg, &spec, nullptr, nullptr, nullptr, nullptr, &res) ==
          TSSP_OK);
  CHECK(res.e_n1 == 85.0);
  CHECK(res.e_n2 == 24.0);

  cfg.model = 9;
  CHECK(tssp_simulate_plan_distribution(&cfg, &spec, nullptr, nullptr, nullptr, nullptr, &res) ==
        TSSP_ERR_INPUT);

  tssp_sim_config_default(&cfg);
  cfg.reps = 20000;
  cfg.seed = 3;
  const tssp_plan p1{85.0, 17.0497152625527}, p2{24.0, 27.0655509900308};
  tssp_acceptance acc;
  REQUIRE(tssp_simulate_acceptance(&cfg, 0.02, &p1, &p2, nullptr, &acc) == TSSP_OK);
  CHECK(std::abs(acc.rate - 0.970279283489697 * 0.930340358861256) < 4.0 * acc.se);

  double v = 0, se = 0;
  REQUIRE(tssp_mc_oc_oracle(0.0, 0.0, 0.0, 100000, 1, 0, &v, &se) == TSSP_OK);
  CHECK(std::abs(v - 0.75) < 4.0 * se);
  CHECK(tssp_mc_oc_oracle(9.0, 0.0, 0.0, 10000, 1, 0, &v, &se) == TSSP_ERR_DEGENERATE_ESTIMATE);
}

}
