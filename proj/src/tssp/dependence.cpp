#include "tssp/dependence.hpp"

#include <cmath>
#include <string>

#include "tssp/error.hpp"

namespace tssp {

void check_rho(double rho, double rho_cap) {
  if (!(rho_cap > 0.0 && rho_cap < 1.0)) fail(Errc::domain, "rho cap must lie in (0, 1)");
  if (!std::isfinite(rho) || std::abs(rho) >= rho_cap) {
    fail(Errc::dependence_out_of_range, "dependence coefficient " + std::to_string(rho) +
                                            " is outside (-" + std::to_string(rho_cap) + ", " +
                                            std::to_string(rho_cap) + ")");
  }
}

DependenceSpec DependenceSpec::panel(double rho_hat, double lambda, double cap) {
  DependenceSpec d;
  d.kind = Kind::panel;
  d.rho_hat = rho_hat;
  d.lambda = lambda;
  d.rho_cap = cap;
  return d;
}

DependenceSpec DependenceSpec::spatial_batch(std::size_t b, double r1, double r2,
                                             double sigma_b2, double sigma_eps2, double cap) {
  DependenceSpec d;
  d.kind = Kind::spatial_batch;
  d.batch_size = b;
  d.r1 = r1;
  d.r2 = r2;
  d.sigma_b2 = sigma_b2;
  d.sigma_eps2 = sigma_eps2;
  d.rho_cap = cap;
  return d;
}

void DependenceSpec::validate() const {
  if (!(rho_cap > 0.0 && rho_cap < 1.0)) fail(Errc::domain, "rho cap must lie in (0, 1)");
  switch (kind) {
    case Kind::independent: break;
    case Kind::panel:
      if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(Errc::domain, "lambda must be positive");
      check_rho(rho_hat, rho_cap);
      break;
    case Kind::spatial_batch:
      // The cap is checked where the batch counts are known.
      (void)spatial_batch_covariance(batch_size, r1, r2, sigma_b2, sigma_eps2);
      break;
  }
}

double DependenceSpec::correlation() const {
  switch (kind) {
    case Kind::independent: return 0.0;
    case Kind::panel: check_rho(rho_hat, rho_cap); return rho_hat;
    case Kind::spatial_batch:
      return spatial_batch_rho(batch_size, r1, r2, sigma_b2, sigma_eps2, rho_cap).coefficient;
  }
  return 0.0;
}

double DependenceSpec::correlation_for_counts(double r1_count, double r2_count) const {
  if (kind != Kind::spatial_batch) return correlation();
  return spatial_batch_rho(batch_size, r1_count, r2_count, sigma_b2, sigma_eps2, rho_cap)
      .coefficient;
}

double estimate_rho_unchecked(const PairedSample& pairs) {
  const std::size_t n = pairs.first.size();
  if (n < 2 || pairs.second.size() != n) {
    fail(Errc::degenerate_pairs, "paired sample needs at least 2 complete pairs");
  }
  if (pairs.n1 == 0 || pairs.n2 == 0) fail(Errc::domain, "plan sizes n1, n2 must be positive");
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m1 += pairs.first[i];
    m2 += pairs.second[i];
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d1 = pairs.first[i] - m1, d2 = pairs.second[i] - m2;
    s11 += d1 * d1;
    s22 += d2 * d2;
    s12 += d1 * d2;
  }
  if (!(s11 > 0.0) || !(s22 > 0.0)) {
    fail(Errc::degenerate_pairs, "paired sample has zero variance in a coordinate");
  }
  // The 1/n factors cancel in gamma / (sigma1 sigma2).
  const double ratio = static_cast<double>(pairs.n1) / static_cast<double>(pairs.n2);
  return std::sqrt(ratio) * s12 / std::sqrt(s11 * s22);
}

double estimate_rho(const PairedSample& pairs, double rho_cap) {
  const double rho = estimate_rho_unchecked(pairs);
  check_rho(rho, rho_cap);
  return rho;
}

BatchCovariance spatial_batch_covariance(std::size_t b, double r1, double r2, double sigma_b2,
                                         double sigma_eps2) {
  if (b < 1) fail(Errc::domain, "batch size must be at least 1");
  if (!(r1 >= 1.0) || !(r2 >= 1.0) || !std::isfinite(r1) || !std::isfinite(r2)) {
    fail(Errc::domain, "batch counts must be at least 1");
  }
  if (!(sigma_eps2 > 0.0)) fail(Errc::domain, "sigma_eps^2 must be positive");
  if (!(sigma_b2 >= 0.0)) fail(Errc::domain, "sigma_B^2 must be non-negative");
  const double ratio = std::sqrt(r1 / r2);
  const double cov = ratio * static_cast<double>(b) * sigma_b2 + ratio * sigma_eps2;
  return {cov, cov / (sigma_b2 + sigma_eps2)};
}

BatchCovariance spatial_batch_rho(std::size_t b, double r1, double r2, double sigma_b2,
                                  double sigma_eps2, double rho_cap) {
  const BatchCovariance result = spatial_batch_covariance(b, r1, r2, sigma_b2, sigma_eps2);
  check_rho(result.coefficient, rho_cap);
  return result;
}

std::size_t round_batch(std::size_t n, std::size_t b) {
  if (n < 1 || b < 1) fail(Errc::domain, "round_batch needs n >= 1 and b >= 1");
  return (n + b - 1) / b * b;
}

}  // namespace tssp
