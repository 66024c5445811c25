#include "tssp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>

#include "tssp/error.hpp"

namespace tssp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, count) on a small pool; the first exception wins.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct Item {
  std::size_t component;
  double z;
};

class ItemSource {
 public:
  explicit ItemSource(const SimModel& model) : model_(model) {
    std::vector<double> w;
    for (const auto& c : model.components) w.push_back(c.weight);
    pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    for (std::size_t k = 0; k < model.components.size(); ++k) sd_.push_back(model.component_sd(k));
  }

  Item draw(Engine& eng) {
    const std::size_t k = pick_(eng);
    return {k, normal_(eng)};
  }
  double normal(Engine& eng) { return normal_(eng); }
  double value(const Item& it) const { return model_.components[it.component].mean + sd_[it.component] * it.z; }

 private:
  const SimModel& model_;
  std::discrete_distribution<std::size_t> pick_;
  std::normal_distribution<double> normal_;
  std::vector<double> sd_;
};

std::size_t plan_size(const SamplingPlan& plan) {
  plan.validate();
  return static_cast<std::size_t>(std::llround(plan.n));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample mean and (k - 1)-denominator standard deviation.
std::pair<double, double> moments_of(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double m = mean_of(v);
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

SimModel SimModel::standard(int id, ScaleInterp interp) {
  SimModel m;
  m.scale_interp = interp;
  switch (id) {
    case 1: m.components = {{1.0, 220.0, 4.0}}; break;
    case 2: m.components = {{0.9, 220.0, 4.0}, {0.1, 230.0, 8.0}}; break;
    case 3: m.components = {{0.2, 200.0, 4.0}, {0.6, 220.0, 4.0}, {0.2, 230.0, 8.0}}; break;
    case 4: m.components = {{0.2, 212.0, 4.0}, {0.6, 220.0, 8.0}, {0.2, 228.0, 6.0}}; break;
    default: fail(Errc::input, "unknown model id " + std::to_string(id) + " (expected 1-4)");
  }
  return m;
}

void SimModel::validate() const {
  if (components.empty()) fail(Errc::domain, "mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) fail(Errc::domain, "mixture weights must be positive");
    if (!(c.scale > 0.0) || !std::isfinite(c.scale)) fail(Errc::domain, "component scale must be positive");
    if (!std::isfinite(c.mean)) fail(Errc::domain, "component mean must be finite");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(Errc::domain, "mixture weights must sum to 1");
  if (!(d > 0.0) || !std::isfinite(d)) fail(Errc::domain, "degradation factor d must be positive");
  if (tau && !std::isfinite(*tau)) fail(Errc::domain, "tau must be finite");
}

double SimModel::component_sd(std::size_t k) const {
  const double s = components.at(k).scale;
  return scale_interp == ScaleInterp::variance ? std::sqrt(s) : s;
}

double SimModel::mean() const {
  double m = 0.0;
  for (const auto& c : components) m += c.weight * c.mean;
  return m;
}

double SimModel::variance() const {
  const double mu = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double sd = component_sd(k), dm = components[k].mean - mu;
    v += components[k].weight * (sd * sd + dm * dm);
  }
  return v;
}

double SimModel::cdf(double x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    f += components[k].weight * std_normal_cdf((x - components[k].mean) / component_sd(k));
  }
  return f;
}

double SimModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) fail(Errc::domain, "probability must lie in (0, 1)");
  if (components.size() == 1) return components[0].mean + component_sd(0) * std_normal_quantile(p);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < components.size(); ++k) {
    lo = std::min(lo, components[k].mean - 40.0 * component_sd(k));
    hi = std::max(hi, components[k].mean + 40.0 * component_sd(k));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SimModel SimModel::with_fraction_defective(double p) const {
  SimModel m = *this;
  m.tau = quantile(p);
  return m;
}

Engine make_engine(const RngSpec& rng, std::uint64_t index) {
  std::uint64_t key = splitmix64(rng.seed);
  key = splitmix64(key ^ rng.stream_id);
  key = splitmix64(key ^ index);
  return Engine(key);
}

std::vector<double> draw_model(const SimModel& model, std::size_t n, Engine& engine) {
  model.validate();
  if (n < 1) fail(Errc::domain, "draw count must be at least 1");
  ItemSource src(model);
  std::vector<double> out(n);
  for (auto& x : out) x = src.value(src.draw(engine));
  return out;
}

std::vector<double> draw_model(const SimModel& model, std::size_t n, const RngSpec& rng) {
  Engine eng = make_engine(rng);
  return draw_model(model, n, eng);
}

StandardizedQuantileEstimator true_standardized_quantile(const SimModel& model) {
  model.validate();
  auto shared = std::make_shared<SimModel>(model);
  const SampleMoments mom{model.mean(), std::sqrt(model.variance())};
  return StandardizedQuantileEstimator([shared](double p) { return shared->quantile(p); }, mom);
}

DecisionRecord two_stage_decision(const SimModel& lot, const SamplingPlan& plan1,
                                  const SamplingPlan& plan2, double s_m,
                                  const DependenceSpec& dep, Engine& engine) {
  if (!lot.tau) fail(Errc::domain, "lot model needs a specification limit tau");
  if (!(s_m > 0.0) || !std::isfinite(s_m)) fail(Errc::domain, "S_m must be positive");
  const std::size_t n1 = plan_size(plan1), n2 = plan_size(plan2);
  const double tau = *lot.tau;
  ItemSource src(lot);

  std::vector<Item> items1(n1);
  std::vector<double> x1(n1);
  std::vector<double> batch1;
  const bool batched = dep.kind == DependenceSpec::Kind::spatial_batch;
  const std::size_t b = batched ? std::max<std::size_t>(dep.batch_size, 1) : 1;
  const double sigma_b = batched ? std::sqrt(dep.sigma_b2) : 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    if (batched && i % b == 0) batch1.push_back(sigma_b * src.normal(engine));
    items1[i] = src.draw(engine);
    x1[i] = src.value(items1[i]) + (batched ? batch1[i / b] : 0.0);
  }

  DecisionRecord rec;
  rec.xbar1 = mean_of(x1);
  rec.t1 = std::sqrt(static_cast<double>(n1)) * (rec.xbar1 - tau) / s_m;
  rec.accept_stage1 = rec.t1 > plan1.c;
  rec.t2 = std::numeric_limits<double>::quiet_NaN();
  rec.xbar2 = std::numeric_limits<double>::quiet_NaN();
  if (!rec.accept_stage1) return rec;

  std::vector<double> x2(n2);
  const std::size_t shared = std::min(n1, n2);
  double r = 0.0;
  if (dep.kind == DependenceSpec::Kind::panel) {
    r = dep.rho_hat * std::sqrt(static_cast<double>(n2) / static_cast<double>(n1));
    if (!(std::abs(r) <= 1.0)) fail(Errc::dependence_out_of_range, "implied item correlation exceeds 1");
  }
  const double w = std::sqrt(1.0 - r * r);
  double fresh_batch = 0.0;
  for (std::size_t i = 0; i < n2; ++i) {
    double value;
    if (dep.kind == DependenceSpec::Kind::panel && i < shared) {
      Item it = items1[i];
      it.z = r * it.z + w * src.normal(engine);
      value = src.value(it);
    } else if (batched && i < shared) {
      value = x1[i];
    } else {
      if (batched && (i - shared) % b == 0) fresh_batch = sigma_b * src.normal(engine);
      value = src.value(src.draw(engine)) + (batched ? fresh_batch : 0.0);
    }
    x2[i] = lot.d * value;  // observed after degradation
  }
  rec.xbar2 = mean_of(x2) / lot.d;
  rec.t2 = std::sqrt(static_cast<double>(n2)) * (rec.xbar2 - tau) / s_m;
  rec.accept = rec.t1 + rec.t2 > plan2.c;
  return rec;
}

SimResult simulate_plan_distribution(const SimModel& model, std::size_t m, const QualitySpec& spec,
                                     std::optional<Method> method, const DependenceSpec& dep,
                                     std::size_t reps, const RngSpec& rng, const SimConfig& cfg) {
  model.validate();
  spec.validate();
  dep.validate();
  if (reps < 1) fail(Errc::domain, "reps must be at least 1");
  if (m < 10) fail(Errc::domain, "time-t0 sample size m must be at least 10");

  struct Row {
    bool ok = false;
    double n1 = 0, c1 = 0, n2 = 0, c2 = 0;
  };
  std::vector<Row> rows(reps);

  auto solve = [&](const StandardizedQuantileEstimator& g) {
    const SamplingPlan p1 = stage1_plan(spec, g);
    const Stage2Result p2 = stage2_plan(spec, p1, g, dep, cfg.solver, cfg.quad);
    return Row{true, p1.n, p1.c, p2.plan.n, p2.plan.c};
  };

  if (!method) {
    // Deterministic: every repetition sees the same true quantile function.
    Row row;
    try {
      row = solve(true_standardized_quantile(model));
    } catch (const Error&) {
      row.ok = false;
    }
    std::fill(rows.begin(), rows.end(), row);
  } else {
    parallel_for(reps, cfg.threads, [&](std::size_t i) {
      Engine eng = make_engine(rng, i);
      try {
        const Sample sample(draw_model(model, m, eng));
        rows[i] = solve(build_estimator(sample, *method, cfg.estimator));
      } catch (const Error&) {
        rows[i].ok = false;
      }
    });
  }

  std::vector<double> n1, c1, n2, c2;
  for (const Row& r : rows) {
    if (!r.ok) continue;
    n1.push_back(r.n1);
    c1.push_back(r.c1);
    n2.push_back(r.n2);
    c2.push_back(r.c2);
  }
  SimResult res;
  res.reps = reps;
  res.failures = reps - n1.size();
  if (2 * res.failures > reps) {
    fail(Errc::too_many_failures, std::to_string(res.failures) + " of " + std::to_string(reps) +
                                      " repetitions failed to produce a plan");
  }
  std::tie(res.e_n1, res.sd_n1) = moments_of(n1);
  std::tie(res.e_c1, res.sd_c1) = moments_of(c1);
  std::tie(res.e_n2, res.sd_n2) = moments_of(n2);
  std::tie(res.e_c2, res.sd_c2) = moments_of(c2);
  return res;
}

AcceptanceResult simulate_acceptance(const SimModel& lot, const SamplingPlan& plan1,
                                     const SamplingPlan& plan2, double s_m,
                                     const DependenceSpec& dep, std::size_t reps,
                                     const RngSpec& rng, unsigned threads) {
  lot.validate();
  if (reps < 1) fail(Errc::domain, "reps must be at least 1");
  std::vector<unsigned char> first(reps), both(reps);
  parallel_for(reps, threads, [&](std::size_t i) {
    Engine eng = make_engine(rng, i);
    const DecisionRecord rec = two_stage_decision(lot, plan1, plan2, s_m, dep, eng);
    first[i] = rec.accept_stage1;
    both[i] = rec.accept;
  });
  std::size_t a1 = 0, a = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    a1 += first[i];
    a += both[i];
  }
  AcceptanceResult res;
  res.reps = reps;
  res.rate = static_cast<double>(a) / static_cast<double>(reps);
  res.stage1_rate = static_cast<double>(a1) / static_cast<double>(reps);
  res.se = std::sqrt(res.rate * (1.0 - res.rate) / static_cast<double>(reps));
  return res;
}

McEstimate mc_oc_oracle(double a, double b, double rho, std::size_t draws, const RngSpec& rng) {
  if (!(std::abs(rho) < 1.0)) fail(Errc::dependence_out_of_range, "|rho| must be below 1");
  if (draws < 10000) fail(Errc::domain, "the oracle needs at least 10^4 draws");
  if (std::isnan(a) || std::isnan(b)) fail(Errc::domain, "oracle thresholds must not be NaN");
  Engine eng = make_engine(rng);
  std::normal_distribution<double> normal;
  const double w = std::sqrt(1.0 - rho * rho);
  std::size_t hits_a = 0, hits_both = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double z1 = normal(eng);
    const double z2 = rho * z1 + w * normal(eng);
    if (z1 > a) {
      ++hits_a;
      if (z1 + z2 > b) ++hits_both;
    }
  }
  if (hits_a == 0) fail(Errc::degenerate_estimate, "no draw satisfied the stage-1 condition");
  const double r = static_cast<double>(hits_both) / static_cast<double>(hits_a);
  return {r, std::sqrt(r * (1.0 - r) / static_cast<double>(hits_a))};
}

McEstimate mc_oc_oracle(const SamplingPlan& plan1, const SamplingPlan& plan2, double g_value,
                        double rho, std::size_t draws, const RngSpec& rng) {
  const double a = plan1.c + std::sqrt(plan1.n) * g_value;
  const double b = plan2.c + (std::sqrt(plan1.n) + std::sqrt(plan2.n)) * g_value;
  return mc_oc_oracle(a, b, rho, draws, rng);
}

McEstimate simulate_panel_mean_correlation(const SimModel& model, std::size_t n1, std::size_t n2,
                                           double item_correlation, std::size_t reps,
                                           const RngSpec& rng) {
  model.validate();
  if (n1 < 1 || n2 < 1 || n2 > n1) fail(Errc::domain, "panel simulation needs 1 <= n2 <= n1");
  if (!(std::abs(item_correlation) <= 1.0)) fail(Errc::domain, "item correlation must lie in [-1, 1]");
  if (reps < 3) fail(Errc::domain, "reps must be at least 3");
  std::vector<double> m1(reps), m2(reps);
  const double w = std::sqrt(1.0 - item_correlation * item_correlation);
  parallel_for(reps, 0, [&](std::size_t rep) {
    Engine eng = make_engine(rng, rep);
    ItemSource src(model);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n1; ++i) {
      Item it = src.draw(eng);
      s1 += src.value(it);
      if (i < n2) {
        it.z = item_correlation * it.z + w * src.normal(eng);
        s2 += src.value(it);
      }
    }
    m1[rep] = s1 / static_cast<double>(n1);
    m2[rep] = s2 / static_cast<double>(n2);
  });
  const auto [a, sa] = moments_of(m1);
  const auto [b, sb] = moments_of(m2);
  double sab = 0.0;
  for (std::size_t i = 0; i < reps; ++i) sab += (m1[i] - a) * (m2[i] - b);
  sab /= static_cast<double>(reps - 1);
  const double r = sab / (sa * sb);
  return {r, (1.0 - r * r) / std::sqrt(static_cast<double>(reps - 3))};
}

McEstimate simulate_batch_covariance(std::size_t b, std::size_t r1, std::size_t r2,
                                     double sigma_b2, double sigma_eps2, std::size_t reps,
                                     const RngSpec& rng) {
  (void)spatial_batch_covariance(b, static_cast<double>(r1), static_cast<double>(r2), sigma_b2,
                                 sigma_eps2);
  if (reps < 2) fail(Errc::domain, "reps must be at least 2");
  const double sb = std::sqrt(sigma_b2), se = std::sqrt(sigma_eps2);
  const std::size_t n1 = b * r1, n2 = b * r2;
  std::vector<double> prod(reps);
  parallel_for(reps, 0, [&](std::size_t rep) {
    Engine eng = make_engine(rng, rep);
    std::normal_distribution<double> normal;
    std::vector<double> items(b * std::max(r1, r2));
    for (std::size_t l = 0; l < std::max(r1, r2); ++l) {
      const double batch = sb * normal(eng);
      for (std::size_t j = 0; j < b; ++j) items[l * b + j] = batch + se * normal(eng);
    }
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n1; ++i) s1 += items[i];
    for (std::size_t i = 0; i < n2; ++i) s2 += items[i];
    // sqrt(n) Xbar = sum / sqrt(n); the true mean is zero.
    prod[rep] = (s1 / std::sqrt(static_cast<double>(n1))) * (s2 / std::sqrt(static_cast<double>(n2)));
  });
  const auto [mean, sd] = moments_of(prod);
  return {mean, sd / std::sqrt(static_cast<double>(reps))};
}

}  // namespace tssp
