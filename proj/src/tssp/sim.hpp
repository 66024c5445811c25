#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tssp/dependence.hpp"
#include "tssp/numerics.hpp"
#include "tssp/oc.hpp"
#include "tssp/plans.hpp"
#include "tssp/quantile.hpp"

namespace tssp {

enum class ScaleInterp { variance, stddev };

struct MixtureComponent {
  double weight;
  double mean;
  double scale;  // variance or standard deviation, see ScaleInterp
};

struct SimModel {
  std::vector<MixtureComponent> components;
  ScaleInterp scale_interp = ScaleInterp::variance;
  double d = 1.0;              // degradation factor between delivery and inspection
  std::optional<double> tau;   // specification limit; unset means derive from p

  // Reference mixtures, ids 1..4.
  static SimModel standard(int id, ScaleInterp interp = ScaleInterp::variance);

  void validate() const;
  double component_sd(std::size_t k) const;
  double mean() const;
  double variance() const;
  double cdf(double x) const;
  double quantile(double p) const;
  // Copy with tau set to the true p-quantile.
  SimModel with_fraction_defective(double p) const;
};

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

using Engine = std::mt19937_64;

// Independent substream for (seed, stream_id, index).
Engine make_engine(const RngSpec& rng, std::uint64_t index = 0);

std::vector<double> draw_model(const SimModel& model, std::size_t n, Engine& engine);
std::vector<double> draw_model(const SimModel& model, std::size_t n, const RngSpec& rng);

// (F^{-1}(p) - mu) / sigma of the model itself.
StandardizedQuantileEstimator true_standardized_quantile(const SimModel& model);

struct DecisionRecord {
  double t1 = 0.0;
  double t2 = 0.0;  // NaN when stage 1 rejects
  bool accept_stage1 = false;
  bool accept = false;
  double xbar1 = 0.0;
  double xbar2 = 0.0;  // rescaled by D = 1/d
};

// One lot through both stages; s_m is the time-t0 standard deviation. PANEL
// remeasures the first min(n1, n2) items with item correlation rho_hat / sqrt(n1/n2)
// inside their mixture component; SPATIAL_BATCH revisits the stage-1 batch locations.
DecisionRecord two_stage_decision(const SimModel& lot, const SamplingPlan& plan1,
                                  const SamplingPlan& plan2, double s_m,
                                  const DependenceSpec& dep, Engine& engine);

struct SimConfig {
  SolverConfig solver;
  QuadratureConfig quad;
  EstimatorOptions estimator;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SimResult {
  double e_n1 = 0.0, sd_n1 = 0.0, e_c1 = 0.0, sd_c1 = 0.0;
  double e_n2 = 0.0, sd_n2 = 0.0, e_c2 = 0.0, sd_c2 = 0.0;
  std::size_t reps = 0;
  std::size_t failures = 0;
};

// method = nullopt replaces the estimator by the model's true standardized quantile.
SimResult simulate_plan_distribution(const SimModel& model, std::size_t m, const QualitySpec& spec,
                                     std::optional<Method> method, const DependenceSpec& dep,
                                     std::size_t reps, const RngSpec& rng,
                                     const SimConfig& cfg = {});

struct AcceptanceResult {
  double rate = 0.0;         // overall acceptance
  double se = 0.0;
  double stage1_rate = 0.0;
  std::size_t reps = 0;
};

AcceptanceResult simulate_acceptance(const SimModel& lot, const SamplingPlan& plan1,
                                     const SamplingPlan& plan2, double s_m,
                                     const DependenceSpec& dep, std::size_t reps,
                                     const RngSpec& rng, unsigned threads = 0);

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

// P(Z1 > a, Z1 + Z2 > b) / P(Z1 > a) for standard normals with Cor(Z1, Z2) = rho.
McEstimate mc_oc_oracle(double a, double b, double rho, std::size_t draws, const RngSpec& rng);
McEstimate mc_oc_oracle(const SamplingPlan& plan1, const SamplingPlan& plan2, double g_value,
                        double rho, std::size_t draws, const RngSpec& rng);

// Empirical Cor(Xbar1, Xbar2) of the PANEL scheme with item correlation r and n2 <= n1.
McEstimate simulate_panel_mean_correlation(const SimModel& model, std::size_t n1, std::size_t n2,
                                           double item_correlation, std::size_t reps,
                                           const RngSpec& rng);

// Empirical Cov(sqrt(n1) Xbar1, sqrt(n2) Xbar2) for X = mu + B_l + eps with batches of size b;
// stage 2 revisits the first r2 of the r1 stage-1 batches (fresh ones beyond r1).
McEstimate simulate_batch_covariance(std::size_t b, std::size_t r1, std::size_t r2,
                                     double sigma_b2, double sigma_eps2, std::size_t reps,
                                     const RngSpec& rng);

}  // namespace tssp
