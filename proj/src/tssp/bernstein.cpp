#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tssp/error.hpp"
#include "tssp/quantile.hpp"

namespace tssp {

namespace {

// Binomial(n, x) probabilities, computed from the mode outwards so that large
// n and extreme x do not underflow the whole vector.
void binomial_pmf(int n, double x, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(n) + 1, 0.0);
  if (x <= 0.0) {
    out.front() = 1.0;
    return;
  }
  if (x >= 1.0) {
    out.back() = 1.0;
    return;
  }
  const int mode = std::clamp(static_cast<int>(std::floor((n + 1) * x)), 0, n);
  const double log_mode = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) -
                          std::lgamma(n - mode + 1.0) + mode * std::log(x) +
                          (n - mode) * std::log1p(-x);
  const double odds = x / (1.0 - x);
  out[static_cast<std::size_t>(mode)] = std::exp(log_mode);
  for (int j = mode; j < n; ++j) {
    out[static_cast<std::size_t>(j) + 1] =
        out[static_cast<std::size_t>(j)] * (n - j) / (j + 1.0) * odds;
  }
  for (int j = mode; j > 0; --j) {
    out[static_cast<std::size_t>(j) - 1] =
        out[static_cast<std::size_t>(j)] * j / (n - j + 1.0) / odds;
  }
}

// upper[j] = P(Binomial(n, x) >= j), j = 0..n+1.
void binomial_upper_tails(int n, double x, std::vector<double>& pmf,
                          std::vector<double>& upper) {
  binomial_pmf(n, x, pmf);
  upper.assign(static_cast<std::size_t>(n) + 2, 0.0);
  for (int j = n; j >= 0; --j) {
    upper[static_cast<std::size_t>(j)] =
        upper[static_cast<std::size_t>(j) + 1] + pmf[static_cast<std::size_t>(j)];
  }
  upper[0] = 1.0;
  for (auto& u : upper) u = std::min(u, 1.0);
}

double bernstein_eval(std::span<const double> coef, double x) {
  thread_local std::vector<double> basis;
  binomial_pmf(static_cast<int>(coef.size()) - 1, x, basis);
  double sum = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) sum += coef[i] * basis[i];
  return sum;
}

}  // namespace

BernsteinDurrmeyer::BernsteinDurrmeyer(const Sample& sample, int degree, double support_lo,
                                       double support_hi)
    : degree_(degree), lo_(support_lo), hi_(support_hi) {
  if (degree < 0) fail(Errc::domain, "Bernstein-Durrmeyer degree must be non-negative");
  if (!(support_lo < support_hi)) fail(Errc::domain, "Bernstein-Durrmeyer support is empty");
  if (sample.min() < lo_ || sample.max() > hi_) {
    const double bad = sample.min() < lo_ ? sample.min() : sample.max();
    fail(Errc::domain, "sample value " + std::to_string(bad) + " lies outside the support [" +
                           std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
  }
  const std::size_t m = sample.size();
  const auto sorted = sample.sorted();
  std::vector<double> y(m);
  for (std::size_t k = 0; k < m; ++k) y[k] = (sorted[k] - lo_) / (hi_ - lo_);

  const int n_plus = degree_ + 1;
  const auto terms = static_cast<std::size_t>(n_plus);
  std::vector<double> pmf, upper;

  // (N+1) a_i = y_(m) - sum_{k<m} (y_(k+1) - y_(k)) P(Bin(N+1, k/m) >= i+1):
  // the empirical quantile function is a step function, so each coefficient is
  // a telescoped sum of incomplete beta integrals.
  quantile_coef_.assign(terms, y.back());
  for (std::size_t k = 1; k < m; ++k) {
    const double jump = y[k] - y[k - 1];
    if (jump == 0.0) continue;
    binomial_upper_tails(n_plus, static_cast<double>(k) / static_cast<double>(m), pmf, upper);
    for (std::size_t i = 0; i < terms; ++i) quantile_coef_[i] -= jump * upper[i + 1];
  }

  // (N+1) b_i = 1 - (1/m) sum_k P(Bin(N+1, y_(k)) >= i+1) for the empirical cdf.
  cdf_coef_.assign(terms, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    binomial_upper_tails(n_plus, y[k], pmf, upper);
    for (std::size_t i = 0; i < terms; ++i) cdf_coef_[i] += upper[i + 1];
  }
  for (auto& c : cdf_coef_) c = 1.0 - c / static_cast<double>(m);
}

double BernsteinDurrmeyer::quantile_unit(double p) const {
  if (!(p > 0.0 && p < 1.0)) fail(Errc::domain, "BD quantile: p must lie in (0, 1)");
  return bernstein_eval(quantile_coef_, p);
}

double BernsteinDurrmeyer::quantile(double p) const {
  return lo_ + (hi_ - lo_) * quantile_unit(p);
}

double BernsteinDurrmeyer::cdf_unit(double x) const {
  return bernstein_eval(cdf_coef_, std::clamp(x, 0.0, 1.0));
}

double BernsteinDurrmeyer::density_unit(double x) const {
  if (degree_ == 0) return 0.0;
  thread_local std::vector<double> diff;
  diff.resize(cdf_coef_.size() - 1);
  for (std::size_t i = 0; i + 1 < cdf_coef_.size(); ++i) {
    diff[i] = degree_ * (cdf_coef_[i + 1] - cdf_coef_[i]);
  }
  return bernstein_eval(diff, std::clamp(x, 0.0, 1.0));
}

std::pair<double, double> bd_support(const Sample& sample, const BDConfig& cfg) {
  const double range = sample.max() - sample.min();
  const double pad = range > 0.0 ? 0.05 * range : 0.05 * std::max(std::abs(sample.max()), 1.0);
  const double lo = cfg.support_lo.value_or(sample.min() - pad);
  const double hi = cfg.support_hi.value_or(sample.max() + pad);
  if (!(lo < hi)) fail(Errc::domain, "Bernstein-Durrmeyer support is empty");
  if (sample.min() < lo) {
    fail(Errc::domain, "sample value " + std::to_string(sample.min()) +
                           " lies below the support bound " + std::to_string(lo));
  }
  if (sample.max() > hi) {
    fail(Errc::domain, "sample value " + std::to_string(sample.max()) +
                           " lies above the support bound " + std::to_string(hi));
  }
  return {lo, hi};
}

double bd_tolerance(std::size_t m) {
  const double loglog = std::log(std::log(static_cast<double>(m)));
  if (!(loglog > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double r_m = 2.0 * std::sqrt(static_cast<double>(m)) / std::sqrt(2.0 * loglog);
  return 1.0 / r_m;
}

int count_modes(std::span<const double> values) {
  int modes = 0;
  int first = 0, last = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = values[i] - values[i - 1];
    const int dir = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (dir == 0) continue;
    if (first == 0) first = dir;
    if (last == 1 && dir == -1) ++modes;
    last = dir;
  }
  if (first == -1) ++modes;  // maximum at the left boundary
  if (last == 1) ++modes;    // maximum at the right boundary
  return modes;
}

DegreeSelection bd_select_degree(const Sample& sample, const BDConfig& cfg) {
  constexpr int kGrid = 512;
  const auto [lo, hi] = bd_support(sample, cfg);
  const double tol = bd_tolerance(sample.size());
  const int max_degree = static_cast<int>((sample.size() + 1) / 2);

  DegreeSelection best;
  best.sup_distance = std::numeric_limits<double>::infinity();
  best.tolerance = tol;
  std::vector<double> density(kGrid);
  for (int degree = 1; degree <= max_degree; ++degree) {
    const BernsteinDurrmeyer bd(sample, degree, lo, hi);
    double sup = 0.0;
    for (int j = 0; j < kGrid; ++j) {
      const double x = (j + 0.5) / kGrid;
      sup = std::max(sup, std::abs(bd.cdf_unit(bd.quantile_unit(x)) - x));
      density[static_cast<std::size_t>(j)] = bd.density_unit(x);
    }
    const int modes = count_modes(density);
    if (sup <= tol && modes <= cfg.mode_budget) {
      return {degree, true, sup, tol, modes};
    }
    if (sup < best.sup_distance) best = {degree, false, sup, tol, modes};
  }
  return best;
}

double bd_quantile(const Sample& sample, double p, const BDConfig& cfg) {
  if (!(p > 0.0 && p < 1.0)) fail(Errc::domain, "bd_quantile: p must lie in (0, 1)");
  const auto [lo, hi] = bd_support(sample, cfg);
  const int degree = cfg.degree ? *cfg.degree : bd_select_degree(sample, cfg).degree;
  return BernsteinDurrmeyer(sample, degree, lo, hi).quantile(p);
}

}  // namespace tssp
