#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tssp/sample.hpp"

namespace tssp {

enum class Method { empirical, kde_bcv, kde_sj, bd_poly };

std::string_view to_string(Method method) noexcept;
std::optional<Method> parse_method(std::string_view text) noexcept;

// X_(ceil(m p)), no interpolation.
double empirical_quantile(const Sample& sample, double p);

// Gaussian-kernel distribution function estimate, mean of Phi((x - X_i)/h).
double kde_cdf(std::span<const double> data, double h, double x);
double kde_density(std::span<const double> data, double h, double x);

// Solves kde_cdf(x) = p inside [min - 10h, max + 10h].
double kde_quantile(std::span<const double> data, double p, double h);

// Biased cross-validation and Sheather-Jones solve-the-equation bandwidths for
// the Gaussian kernel. Pairwise distances are binned on 1000 cells.
double bandwidth_bcv(const Sample& sample);
double bandwidth_sj(const Sample& sample);

// Binned pairwise-distance criteria, exposed for testing.
class PairBins {
 public:
  explicit PairBins(std::span<const double> data, std::size_t bins = 1000);
  double bcv(double h) const;
  double phi4(double h) const;
  double phi6(double h) const;
  std::size_t n() const { return n_; }

 private:
  std::size_t n_;
  double width_;
  std::vector<double> counts_;
};

struct BDConfig {
  std::optional<int> degree;  // nullopt selects the degree from the data
  std::optional<double> support_lo;
  std::optional<double> support_hi;
  int mode_budget = 3;
};

// Bernstein-Durrmeyer smoothing of the empirical quantile and distribution
// functions of a sample rescaled to [0, 1].
class BernsteinDurrmeyer {
 public:
  BernsteinDurrmeyer(const Sample& sample, int degree, double support_lo, double support_hi);

  int degree() const { return degree_; }
  double quantile(double p) const;        // original units
  double quantile_unit(double p) const;   // [0, 1] scale
  double cdf_unit(double x) const;
  double density_unit(double x) const;

  std::span<const double> quantile_coefficients() const { return quantile_coef_; }

 private:
  int degree_;
  double lo_;
  double hi_;
  std::vector<double> quantile_coef_;  // (N+1) a_i
  std::vector<double> cdf_coef_;       // (N+1) b_i
};

// Default support [min - 5% range, max + 5% range]; validates explicit bounds.
std::pair<double, double> bd_support(const Sample& sample, const BDConfig& cfg);

// 1/R_m with R_m = 2 sqrt(m) / sqrt(2 log log m); NaN when log log m <= 0.
double bd_tolerance(std::size_t m);

// Number of local maxima of a sampled curve, boundaries included.
int count_modes(std::span<const double> values);

struct DegreeSelection {
  int degree = 1;
  bool certified = false;
  double sup_distance = 0.0;
  double tolerance = 0.0;
  int modes = 0;
};

DegreeSelection bd_select_degree(const Sample& sample, const BDConfig& cfg);

double bd_quantile(const Sample& sample, double p, const BDConfig& cfg);

struct EstimatorDiagnostics {
  std::optional<double> bandwidth;
  std::optional<int> degree;
  std::optional<bool> certified;
};

// p -> (F_m^{-1}(p) - mean) / stddev. Immutable once built; copies share state.
class StandardizedQuantileEstimator {
 public:
  using RawQuantile = std::function<double(double)>;

  StandardizedQuantileEstimator(RawQuantile raw, SampleMoments moments,
                                std::optional<Method> method = std::nullopt,
                                EstimatorDiagnostics diagnostics = {});

  double evaluate(double p) const;
  double raw_quantile(double p) const;
  const SampleMoments& moments() const { return moments_; }
  std::optional<Method> method() const { return method_; }
  const EstimatorDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  RawQuantile raw_;
  SampleMoments moments_;
  std::optional<Method> method_;
  EstimatorDiagnostics diagnostics_;
};

StandardizedQuantileEstimator standardize(StandardizedQuantileEstimator::RawQuantile raw,
                                          SampleMoments moments);

struct EstimatorOptions {
  BDConfig bd;
  std::optional<double> bandwidth;  // overrides the selector for KDE methods
};

StandardizedQuantileEstimator build_estimator(const Sample& sample, Method method,
                                              const EstimatorOptions& options = {});

// Reference estimator returning the exact standard normal quantile.
StandardizedQuantileEstimator normal_reference_estimator();

}  // namespace tssp
