#pragma once

#include "tssp/dependence.hpp"
#include "tssp/numerics.hpp"
#include "tssp/oc.hpp"
#include "tssp/quantile.hpp"

namespace tssp {

struct SolverConfig {
  double epsilon = 1e-8;  // squared-deviation tolerance
  int grid_n_max = 200;
  double grid_c_max = 60.0;
  int refine_max_iter = 200;
  // PANEL only: take n2 = ceil(n1 / lambda) and solve for c2 alone.
  bool enforce_lambda = false;

  void validate() const;
};

// n1 = ceil((z_alpha1 - z_{1-beta1})^2 / (g_aql - g_rql)^2), c1 = -sqrt(n1)/2 (g_aql + g_rql).
SamplingPlan stage1_plan(const QualitySpec& spec, const StandardizedQuantileEstimator& g);

struct Stage2Result {
  SamplingPlan plan;
  SamplingPlan grid_minimizer;
  double continuous_n = 0.0;
  double continuous_c = 0.0;
  double grid_deviation = 0.0;
  double refined_deviation = 0.0;  // at the real-valued (n, c)
  double final_deviation = 0.0;    // at the returned plan
  bool within_tolerance = false;   // final_deviation <= epsilon; otherwise best effort
  double oc_aql = 0.0;
  double oc_rql = 0.0;
  double rho = 0.0;  // dependence coefficient used at the returned plan
};

// Squared deviation of OC2 from its targets, (OC2(AQL) - (1 - alpha2))^2 + (OC2(RQL) - beta2)^2.
double stage2_deviation(const QualitySpec& spec, const SamplingPlan& plan1,
                        const SamplingPlan& plan2, double g_aql, double g_rql, double rho,
                        const QuadratureConfig& quad);

Stage2Result stage2_plan(const QualitySpec& spec, const SamplingPlan& plan1,
                         const StandardizedQuantileEstimator& g, const DependenceSpec& dep,
                         const SolverConfig& solver = {}, const QuadratureConfig& quad = {});

}  // namespace tssp
