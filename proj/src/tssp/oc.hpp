#pragma once

#include <functional>
#include <string_view>

#include "tssp/dependence.hpp"
#include "tssp/numerics.hpp"
#include "tssp/quantile.hpp"

namespace tssp {

// Per-stage risks together with the global pair they imply.
struct Risks {
  double alpha1 = 0.0, beta1 = 0.0;
  double alpha2 = 0.0, beta2 = 0.0;
  double alpha = 0.0;  // 1 - (1 - alpha1)(1 - alpha2)
  double beta = 0.0;   // beta1 * beta2
};

// alpha2 = 1 - (1 - alpha)/(1 - alpha1). With symmetric risks beta_i = alpha_i;
// otherwise the consumer risk is split evenly, beta_i = sqrt(beta).
Risks allocate_risks(double alpha, double beta, double alpha1, bool symmetric);
// alpha_i = 1 - sqrt(1 - alpha), beta_i = sqrt(beta).
Risks equal_split_risks(double alpha, double beta);

struct QualitySpec {
  double aql = 0.0, rql = 0.0;
  double alpha = 0.0, beta = 0.0;
  double alpha1 = 0.0, beta1 = 0.0;
  double alpha2 = 0.0, beta2 = 0.0;

  static QualitySpec from_risks(double aql, double rql, const Risks& risks);
  void validate() const;
};

struct SamplingPlan {
  double n = 1.0;  // integral for returned plans, real while solving
  double c = 0.0;

  void validate() const;
  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

// Conditioning events below this probability make OC2 meaningless.
inline constexpr double kMinConditioningProbability = 1e-300;

// Stage OCs at a fixed standardized quantile value g = G^{-1}(p).
double oc1_at(double g, const SamplingPlan& plan1);
double oc2_at(double g, const SamplingPlan& plan1, const SamplingPlan& plan2, double rho,
              const QuadratureConfig& cfg);
double oc2_independent_at(double g, const SamplingPlan& plan1, const SamplingPlan& plan2,
                          const QuadratureConfig& cfg);

double oc1(double p, const SamplingPlan& plan1, const StandardizedQuantileEstimator& g);
double oc2_independent(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
                       const StandardizedQuantileEstimator& g, const QuadratureConfig& cfg = {});
double oc2_dependent(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
                     const StandardizedQuantileEstimator& g, double rho,
                     const QuadratureConfig& cfg = {}, double rho_cap = kDefaultRhoCap);
double oc2(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
           const StandardizedQuantileEstimator& g, const DependenceSpec& dep,
           const QuadratureConfig& cfg = {});
// OC1(p) * OC2(p); 0 when stage 1 never accepts.
double overall_oc(double p, const SamplingPlan& plan1, const SamplingPlan& plan2,
                  const StandardizedQuantileEstimator& g, const DependenceSpec& dep,
                  const QuadratureConfig& cfg = {});

enum class Stage { first, second, overall };
std::string_view to_string(Stage stage) noexcept;

struct ValidityReport {
  Stage stage = Stage::first;
  double oc_at_aql = 0.0;
  double oc_at_rql = 0.0;
  double producer_target = 0.0;  // OC(AQL) must reach this
  double consumer_target = 0.0;  // OC(RQL) must not exceed this
  double producer_margin = 0.0;  // OC(AQL) - producer_target
  double consumer_margin = 0.0;  // consumer_target - OC(RQL)
  bool producer_ok = false;
  bool consumer_ok = false;

  bool valid() const { return producer_ok && consumer_ok; }
};

ValidityReport validate_plan(const QualitySpec& spec, const std::function<double(double)>& oc,
                             Stage stage, double slack = 0.0);

}  // namespace tssp
