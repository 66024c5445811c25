#pragma once

#include <cstddef>

#include "tssp/sample.hpp"

namespace tssp {

inline constexpr double kDefaultRhoCap = 0.99;

// How the stage-2 sample relates to the stage-1 sample.
struct DependenceSpec {
  enum class Kind { independent, panel, spatial_batch };

  Kind kind = Kind::independent;
  // panel
  double rho_hat = 0.0;
  double lambda = 1.0;  // n1 / n2
  // spatial batch
  std::size_t batch_size = 1;
  double r1 = 1.0;
  double r2 = 1.0;
  double sigma_b2 = 0.0;
  double sigma_eps2 = 1.0;

  double rho_cap = kDefaultRhoCap;

  static DependenceSpec independent() { return {}; }
  static DependenceSpec panel(double rho_hat, double lambda, double cap = kDefaultRhoCap);
  static DependenceSpec spatial_batch(std::size_t b, double r1, double r2, double sigma_b2,
                                      double sigma_eps2, double cap = kDefaultRhoCap);

  void validate() const;
  // Correlation fed to the dependent OC2 approximation; 0 for independent sampling.
  double correlation() const;
  // Same with the batch counts replaced by the given ones (used while solving n2).
  double correlation_for_counts(double r1_count, double r2_count) const;
};

// sqrt(n1/n2) * gamma / (sigma1 sigma2) with n-denominator moments of the pairs.
// Errors when |rho| reaches rho_cap.
double estimate_rho(const PairedSample& pairs, double rho_cap = kDefaultRhoCap);
// Same estimate without the cap check.
double estimate_rho_unchecked(const PairedSample& pairs);

struct BatchCovariance {
  double covariance;   // Cov(sqrt(n1) Xbar1, sqrt(n2) Xbar2)
  double coefficient;  // covariance / (sigma_B^2 + sigma_eps^2)
};

BatchCovariance spatial_batch_covariance(std::size_t b, double r1, double r2, double sigma_b2,
                                         double sigma_eps2);
// As above, rejecting coefficients at or beyond the cap.
BatchCovariance spatial_batch_rho(std::size_t b, double r1, double r2, double sigma_b2,
                                  double sigma_eps2, double rho_cap = kDefaultRhoCap);

// Smallest multiple of b not below n.
std::size_t round_batch(std::size_t n, std::size_t b);

void check_rho(double rho, double rho_cap);

}  // namespace tssp
