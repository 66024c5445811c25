#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "tssp/error.hpp"

namespace tssp {

struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  // Integrands handled here are dominated by the standard normal density, so
  // everything outside [-radius, radius] is dropped.
  double truncation_radius = 9.0;
  int max_subdivisions = 200;

  void validate() const;
};

double std_normal_pdf(double x);
double std_normal_cdf(double x);
// 1 - Phi(x) without cancellation in the upper tail.
double std_normal_sf(double x);
double std_normal_quantile(double p);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// Gauss-Kronrod 15/7 nodes and weights on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gk15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Adaptive Gauss-Kronrod (15-point) quadrature on a finite interval. Panels
// with the largest error estimate are bisected first.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureConfig& cfg) {
  if (!(hi > lo)) return {};
  std::priority_queue<detail::Panel> panels;
  panels.push(detail::gk15(f, lo, hi));
  double total = panels.top().value;
  double error = panels.top().error;
  int count = 1;
  while (error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (count >= cfg.max_subdivisions) {
      throw ConvergenceError("quadrature subdivision limit reached", total, error);
    }
    const detail::Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const detail::Panel left = detail::gk15(f, worst.lo, mid);
    const detail::Panel right = detail::gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  // Re-sum to shed the drift accumulated by the incremental updates.
  double value = 0.0, err = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    err += panels.top().error;
    panels.pop();
  }
  return {value, err, count};
}

// Integral of f over [a, inf) for integrands bounded by a multiple of the
// standard normal density.
template <class F>
QuadratureResult integrate_tail(F&& f, double a, const QuadratureConfig& cfg) {
  if (std::isnan(a)) fail(Errc::domain, "integrate_tail: lower limit is NaN");
  const double radius = cfg.truncation_radius;
  const double lo = std::max(a, -radius);
  if (lo >= radius) return {};
  return integrate(f, lo, radius, cfg);
}

}  // namespace tssp
