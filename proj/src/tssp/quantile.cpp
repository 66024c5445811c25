#include "tssp/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "tssp/error.hpp"
#include "tssp/numerics.hpp"

namespace tssp {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::empirical: return "empirical";
    case Method::kde_bcv: return "kde-bcv";
    case Method::kde_sj: return "kde-sj";
    case Method::bd_poly: return "bd";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view text) noexcept {
  if (text == "empirical") return Method::empirical;
  if (text == "kde-bcv" || text == "bcv") return Method::kde_bcv;
  if (text == "kde-sj" || text == "sj") return Method::kde_sj;
  if (text == "bd" || text == "bdp") return Method::bd_poly;
  return std::nullopt;
}

namespace {

void require_probability(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(Errc::domain, std::string(who) + ": probability must lie in (0, 1), got " +
                           std::to_string(p));
  }
}

}  // namespace

double empirical_quantile(const Sample& sample, double p) {
  require_probability(p, "empirical_quantile");
  const auto m = static_cast<double>(sample.size());
  auto rank = static_cast<std::size_t>(std::ceil(m * p));
  rank = std::clamp<std::size_t>(rank, 1, sample.size());
  return sample.sorted()[rank - 1];
}

double kde_cdf(std::span<const double> data, double h, double x) {
  double sum = 0.0;
  for (double v : data) sum += std_normal_cdf((x - v) / h);
  return sum / static_cast<double>(data.size());
}

double kde_density(std::span<const double> data, double h, double x) {
  double sum = 0.0;
  for (double v : data) sum += std_normal_pdf((x - v) / h);
  return sum / (static_cast<double>(data.size()) * h);
}

double kde_quantile(std::span<const double> data, double p, double h) {
  require_probability(p, "kde_quantile");
  if (!(h > 0.0) || !std::isfinite(h)) fail(Errc::domain, "kde_quantile: bandwidth must be positive");
  if (data.empty()) fail(Errc::degenerate_sample, "kde_quantile: empty data");
  const auto [min_it, max_it] = std::minmax_element(data.begin(), data.end());
  double lo = *min_it - 10.0 * h, hi = *max_it + 10.0 * h;
  double f_lo = kde_cdf(data, h, lo) - p;
  double f_hi = kde_cdf(data, h, hi) - p;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw ConvergenceError("kde_quantile: root not bracketed", f_lo > 0.0 ? lo : hi, hi - lo);
  }
  // Bisection guarded false position; stops at machine resolution.
  int side = 0;
  for (int it = 0; it < 300; ++it) {
    double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi) || it % 4 == 3) x = 0.5 * (lo + hi);
    const double f = kde_cdf(data, h, x) - p;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
      f_lo = f;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      hi = x;
      f_hi = f;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
    const double scale = std::max({std::abs(lo), std::abs(hi), h});
    if (hi - lo <= 4e-16 * scale) return 0.5 * (lo + hi);
    if (std::abs(f) <= 1e-15) return x;
  }
  const double x = 0.5 * (lo + hi);
  if (std::abs(kde_cdf(data, h, x) - p) <= 1e-10) return x;
  throw ConvergenceError("kde_quantile: iteration limit", x, hi - lo);
}

StandardizedQuantileEstimator::StandardizedQuantileEstimator(RawQuantile raw,
                                                             SampleMoments moments,
                                                             std::optional<Method> method,
                                                             EstimatorDiagnostics diagnostics)
    : raw_(std::move(raw)),
      moments_(moments),
      method_(method),
      diagnostics_(diagnostics) {
  if (!raw_) fail(Errc::domain, "estimator needs a raw quantile function");
  moments_.validate();
}

double StandardizedQuantileEstimator::raw_quantile(double p) const {
  require_probability(p, "quantile estimator");
  return raw_(p);
}

double StandardizedQuantileEstimator::evaluate(double p) const {
  return (raw_quantile(p) - moments_.mean) / moments_.stddev;
}

StandardizedQuantileEstimator standardize(StandardizedQuantileEstimator::RawQuantile raw,
                                          SampleMoments moments) {
  return StandardizedQuantileEstimator(std::move(raw), moments);
}

StandardizedQuantileEstimator build_estimator(const Sample& sample, Method method,
                                              const EstimatorOptions& options) {
  const SampleMoments moments = SampleMoments::of(sample.values());
  auto data = std::make_shared<const Sample>(sample);
  EstimatorDiagnostics diag;
  switch (method) {
    case Method::empirical:
      return {[data](double p) { return empirical_quantile(*data, p); }, moments, method, diag};
    case Method::kde_bcv:
    case Method::kde_sj: {
      double h = 0.0;
      if (options.bandwidth) {
        h = *options.bandwidth;
        if (!(h > 0.0)) fail(Errc::domain, "bandwidth must be positive");
      } else {
        h = method == Method::kde_bcv ? bandwidth_bcv(sample) : bandwidth_sj(sample);
      }
      diag.bandwidth = h;
      return {[data, h](double p) { return kde_quantile(data->values(), p, h); }, moments,
              method, diag};
    }
    case Method::bd_poly: {
      const auto [lo, hi] = bd_support(sample, options.bd);
      int degree = 0;
      if (options.bd.degree) {
        degree = *options.bd.degree;
      } else {
        const DegreeSelection sel = bd_select_degree(sample, options.bd);
        degree = sel.degree;
        diag.certified = sel.certified;
      }
      diag.degree = degree;
      auto bd = std::make_shared<const BernsteinDurrmeyer>(sample, degree, lo, hi);
      return {[bd](double p) { return bd->quantile(p); }, moments, method, diag};
    }
  }
  fail(Errc::domain, "unknown quantile method");
}

StandardizedQuantileEstimator normal_reference_estimator() {
  return {[](double p) { return std_normal_quantile(p); }, SampleMoments{0.0, 1.0}};
}

}  // namespace tssp
