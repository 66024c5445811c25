#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tssp/error.hpp"
#include "tssp/quantile.hpp"

namespace tssp {

namespace {

constexpr double kDelMax = 1000.0;
constexpr std::size_t kMinBandwidthSample = 10;

double stddev_of(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double interpolated_quantile(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void require_bandwidth_sample(const Sample& s) {
  if (s.size() < kMinBandwidthSample) {
    fail(Errc::degenerate_sample, "bandwidth selection needs at least 10 values, got " +
                                      std::to_string(s.size()));
  }
  if (s.max() == s.min()) fail(Errc::degenerate_sample, "bandwidth selection: constant sample");
}

}  // namespace

PairBins::PairBins(std::span<const double> data, std::size_t bins)
    : n_(data.size()), counts_(bins, 0.0) {
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it;
  width_ = (*hi_it - lo) * 1.01 / static_cast<double>(bins);
  if (!(width_ > 0.0)) fail(Errc::degenerate_sample, "pair binning: constant data");
  std::vector<long> cell(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    cell[i] = static_cast<long>((data[i] - lo) / width_);
  }
  for (std::size_t i = 1; i < cell.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      counts_[static_cast<std::size_t>(std::abs(cell[i] - cell[j]))] += 1.0;
    }
  }
}

double PairBins::bcv(double h) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    double delta = static_cast<double>(i) * width_ / h;
    delta *= delta;
    if (delta >= kDelMax) break;
    sum += std::exp(-delta / 4.0) * (delta * delta - 12.0 * delta + 12.0) * counts_[i];
  }
  const double n = static_cast<double>(n_);
  return (1.0 + sum / (32.0 * n)) / (2.0 * n * h * std::sqrt(std::numbers::pi));
}

double PairBins::phi4(double h) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    double delta = static_cast<double>(i) * width_ / h;
    delta *= delta;
    if (delta >= kDelMax) break;
    sum += std::exp(-delta / 2.0) * (delta * delta - 6.0 * delta + 3.0) * counts_[i];
  }
  const double n = static_cast<double>(n_);
  sum = 2.0 * sum + n * 3.0;  // diagonal terms
  return sum / (n * (n - 1.0) * std::pow(h, 5.0) * std::sqrt(2.0 * std::numbers::pi));
}

double PairBins::phi6(double h) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    double delta = static_cast<double>(i) * width_ / h;
    delta *= delta;
    if (delta >= kDelMax) break;
    sum += std::exp(-delta / 2.0) *
           (delta * delta * delta - 15.0 * delta * delta + 45.0 * delta - 15.0) * counts_[i];
  }
  const double n = static_cast<double>(n_);
  sum = 2.0 * sum - 15.0 * n;
  return sum / (n * (n - 1.0) * std::pow(h, 7.0) * std::sqrt(2.0 * std::numbers::pi));
}

double bandwidth_bcv(const Sample& sample) {
  require_bandwidth_sample(sample);
  const PairBins bins(sample.values());
  const double m = static_cast<double>(sample.size());
  const double sd = stddev_of(sample.values());
  const double lower = sd / m;
  const double upper = 5.0 * sd * std::pow(m, -0.2);

  // Global minimum on a log grid, then golden-section inside the bracketing cells.
  constexpr int kGrid = 80;
  const double step = std::log(upper / lower) / (kGrid - 1);
  int best = 0;
  double best_score = bins.bcv(lower);
  for (int k = 1; k < kGrid; ++k) {
    const double score = bins.bcv(lower * std::exp(step * k));
    if (score < best_score) {
      best_score = score;
      best = k;
    }
  }
  double a = lower * std::exp(step * std::max(best - 1, 0));
  double b = lower * std::exp(step * std::min(best + 1, kGrid - 1));
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = bins.bcv(x1), f2 = bins.bcv(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * b; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = bins.bcv(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = bins.bcv(x2);
    }
  }
  const double h = 0.5 * (a + b);
  if (!(h > 0.0) || !std::isfinite(h)) fail(Errc::degenerate_sample, "BCV score is flat");
  return h;
}

double bandwidth_sj(const Sample& sample) {
  require_bandwidth_sample(sample);
  const PairBins bins(sample.values());
  const double n = static_cast<double>(sample.size());
  const double sd = stddev_of(sample.values());
  const double iqr = interpolated_quantile(sample.sorted(), 0.75) -
                     interpolated_quantile(sample.sorted(), 0.25);
  double scale = std::min(sd, iqr / 1.349);
  if (!(scale > 0.0)) scale = sd;
  if (!(scale > 0.0)) fail(Errc::degenerate_sample, "Sheather-Jones: zero scale estimate");

  const double a = 1.24 * scale * std::pow(n, -1.0 / 7.0);
  const double b = 1.23 * scale * std::pow(n, -1.0 / 9.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(std::numbers::pi) * n);
  const double td = -bins.phi6(b);
  if (!std::isfinite(td) || td <= 0.0) {
    fail(Errc::degenerate_sample, "Sheather-Jones: sample too sparse to estimate phi6");
  }
  const double alpha2 = 1.357 * std::pow(bins.phi4(a) / td, 1.0 / 7.0);
  if (!std::isfinite(alpha2)) {
    fail(Errc::degenerate_sample, "Sheather-Jones: sample too sparse to estimate phi4");
  }
  auto equation = [&](double h) {
    return std::pow(c1 / bins.phi4(alpha2 * std::pow(h, 5.0 / 7.0)), 0.2) - h;
  };

  const double hmax = 1.144 * scale * std::pow(n, -0.2);
  double lower = 0.1 * hmax, upper = hmax;
  double f_lo = equation(lower), f_hi = equation(upper);
  for (int attempt = 1; f_lo * f_hi > 0.0; ++attempt) {
    if (attempt > 99) {
      throw ConvergenceError("Sheather-Jones: no root in the bandwidth search range",
                             0.5 * (lower + upper), upper - lower);
    }
    if (attempt % 2) {
      upper *= 1.2;
      f_hi = equation(upper);
    } else {
      lower /= 1.2;
      f_lo = equation(lower);
    }
  }
  // Illinois false position.
  int side = 0;
  double root = lower;
  for (int it = 0; it < 100; ++it) {
    root = (lower * f_hi - upper * f_lo) / (f_hi - f_lo);
    const double f = equation(root);
    if (f == 0.0 || (upper - lower) < 1e-13 * upper) return root;
    if (f * f_hi > 0.0) {
      upper = root;
      f_hi = f;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    } else {
      lower = root;
      f_lo = f;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    }
    if (std::abs(f) < 1e-14 * root) return root;
  }
  throw ConvergenceError("Sheather-Jones: root iteration did not converge", root,
                         upper - lower);
}

}  // namespace tssp
