#pragma once

// Event-driven simulation of a market maker's jump inventory under the
// scaled exponential-arrival quoting rules, and the check that its moments
// approach the Ornstein-Uhlenbeck scaling limit as the jump size h shrinks.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridexec/rng.hpp"

namespace hybridexec {

struct QuoteModelParams {
  double A = 1.0;        // base arrival intensity, > 0
  double kappa = 1.0;    // spread decay, > 0
  double nu_risk = 1.0;  // maker risk aversion, > 0
  double mu = 0.0;       // reference-price drift
  double sigma = 1.0;    // reference-price volatility, > 0
};

struct LimitParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double theta = 0.0;    // 4 c1 c2 kappa (from the generator limit)
  double qbar0 = 0.0;    // mu / (nu sigma^2)
  double sigma_q = 0.0;  // 2 sqrt(c1)
};

inline LimitParams limit_params(const QuoteModelParams& p) {
  if (p.A <= 0 || p.kappa <= 0 || p.nu_risk <= 0 || p.sigma <= 0)
    throw std::invalid_argument("quote model parameters must be positive");
  const double ratio = p.nu_risk / p.kappa;
  LimitParams l;
  l.c1 = 0.5 * p.A * std::pow(1.0 + ratio, -p.kappa / p.nu_risk);
  l.c2 = std::sqrt(p.sigma * p.sigma * p.nu_risk / (2.0 * p.kappa * p.A) *
                   std::pow(1.0 + ratio, 1.0 + p.kappa / p.nu_risk));
  // The generator of the jump chain converges to
  //   2 c1 u''(q) + 4 c1 c2 kappa (qbar0 - q) u'(q),
  // i.e. an OU process with rate 4 c1 c2 kappa and volatility 2 sqrt(c1).
  // (Quoting the rate as 2 c1 c2 kappa drops a factor 2 from the drift;
  // the simulated moments single out the value below.)
  l.theta = 4.0 * l.c1 * l.c2 * p.kappa;
  l.qbar0 = p.mu / (p.nu_risk * p.sigma * p.sigma);
  l.sigma_q = 2.0 * std::sqrt(l.c1);
  return l;
}

// Scaled optimal spreads at inventory q; the inventory-sensitive term is
// linear in h, so the sum delta_b + delta_a does not depend on q.
inline std::pair<double, double> quote_spreads(double q,
                                               const QuoteModelParams& p,
                                               double h) {
  if (h <= 0) throw std::invalid_argument("h must be > 0");
  const double base = std::log(1.0 + p.nu_risk / p.kappa) / p.nu_risk;
  const double c2h = h * std::sqrt(p.sigma * p.sigma * p.nu_risk /
                                   (2.0 * p.kappa * p.A) *
                                   std::pow(1.0 + p.nu_risk / p.kappa,
                                            1.0 + p.kappa / p.nu_risk));
  const double qb = p.mu / (p.nu_risk * p.sigma * p.sigma);
  const double delta_b = base + (q + 0.5 - qb) * c2h;
  const double delta_a = base + (-q + 0.5 + qb) * c2h;
  return {delta_b, delta_a};
}

struct JumpSimOptions {
  std::uint64_t max_events = 100'000'000;  // safety cap, counts scale as 1/h^2
};

// Exact simulation of q_t = h(N^b - N^a): between jumps both intensities are
// constant, so waiting times are exponential and the event type Bernoulli.
// Returns q sampled at the (sorted) sample_times; also reports the event
// count and whether a negative spread was ever quoted.
struct JumpSimResult {
  std::vector<double> samples;
  std::uint64_t events = 0;
  bool negative_spread = false;
};

inline JumpSimResult simulate_inventory_jump(
    const QuoteModelParams& p, double h, double T,
    const std::vector<double>& sample_times, SplitMix64& rng,
    const JumpSimOptions& opt = {}) {
  JumpSimResult out;
  out.samples.reserve(sample_times.size());
  double t = 0.0, q = 0.0;
  size_t next_sample = 0;
  const double scale = p.A / (h * h);

  while (true) {
    auto [db, da] = quote_spreads(q, p, h);
    if (db < 0.0 || da < 0.0) out.negative_spread = true;
    const double rate_b = scale * std::exp(-p.kappa * db);  // q jumps +h
    const double rate_a = scale * std::exp(-p.kappa * da);  // q jumps -h
    const double total = rate_b + rate_a;
    const double tau = -std::log(rng.uniform()) / total;
    const double t_next = t + tau;
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t_next) {
      out.samples.push_back(q);
      ++next_sample;
    }
    if (t_next >= T) break;
    t = t_next;
    q += (rng.uniform() * total <= rate_b) ? h : -h;
    if (++out.events > opt.max_events)
      throw std::runtime_error("simulate_inventory_jump: event cap exceeded");
  }
  while (next_sample < sample_times.size()) {
    out.samples.push_back(q);
    ++next_sample;
  }
  return out;
}

inline double ou_mean(const LimitParams& l, double t) {
  return l.qbar0 * (1.0 - std::exp(-l.theta * t));
}
inline double ou_variance(const LimitParams& l, double t) {
  return l.sigma_q * l.sigma_q / (2.0 * l.theta) *
         (1.0 - std::exp(-2.0 * l.theta * t));
}

struct HydroMomentEstimate {
  double t = 0.0;
  double mean = 0.0, mean_se = 0.0, mean_target = 0.0;
  double variance = 0.0, variance_se = 0.0, variance_target = 0.0;
  double mean_error() const { return std::abs(mean - mean_target); }
  double variance_error() const { return std::abs(variance - variance_target); }
};

struct HydroReport {
  std::vector<double> h_list;
  std::vector<std::vector<HydroMomentEstimate>> estimates;  // [h][time]
  bool mean_errors_decreasing = true;      // within 1 SE slack
  bool variance_errors_decreasing = true;
};

inline HydroReport convergence_check(const QuoteModelParams& p,
                                     const std::vector<double>& h_list,
                                     double T, int n_paths, std::uint64_t seed) {
  const LimitParams lim = limit_params(p);
  const std::vector<double> ts = {0.5 * T, T};

  HydroReport rep;
  rep.h_list = h_list;
  for (size_t hi = 0; hi < h_list.size(); ++hi) {
    const double h = h_list[hi];
    std::vector<std::vector<double>> samples(ts.size());
    for (int path = 0; path < n_paths; ++path) {
      SplitMix64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (hi + 1)) ^
                     (0xBF58476D1CE4E5B9ULL * static_cast<std::uint64_t>(path)));
      rng.next();
      auto out = simulate_inventory_jump(p, h, T, ts, rng);
      for (size_t j = 0; j < ts.size(); ++j) samples[j].push_back(out.samples[j]);
    }
    std::vector<HydroMomentEstimate> ests;
    for (size_t j = 0; j < ts.size(); ++j) {
      const auto& s = samples[j];
      const double n = static_cast<double>(s.size());
      double mean = 0.0;
      for (double x : s) mean += x;
      mean /= n;
      double m2 = 0.0, m4 = 0.0;
      for (double x : s) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
      }
      const double var = m2 / (n - 1.0);
      HydroMomentEstimate e;
      e.t = ts[j];
      e.mean = mean;
      e.mean_se = std::sqrt(var / n);
      e.mean_target = ou_mean(lim, ts[j]);
      e.variance = var;
      e.variance_se = std::sqrt((m4 / n - var * var * (n - 3.0) / (n - 1.0)) / n);
      e.variance_target = ou_variance(lim, ts[j]);
      ests.push_back(e);
    }
    rep.estimates.push_back(ests);
  }

  for (size_t hi = 0; hi + 1 < h_list.size(); ++hi)
    for (size_t j = 0; j < ts.size(); ++j) {
      const auto& a = rep.estimates[hi][j];
      const auto& b = rep.estimates[hi + 1][j];
      if (b.mean_error() > a.mean_error() + b.mean_se)
        rep.mean_errors_decreasing = false;
      if (b.variance_error() > a.variance_error() + b.variance_se)
        rep.variance_errors_decreasing = false;
    }
  return rep;
}

inline nlohmann::json hydro_report_json(const HydroReport& rep) {
  nlohmann::json j;
  j["h_list"] = rep.h_list;
  j["mean_errors_decreasing"] = rep.mean_errors_decreasing;
  j["variance_errors_decreasing"] = rep.variance_errors_decreasing;
  j["estimates"] = nlohmann::json::array();
  for (size_t hi = 0; hi < rep.estimates.size(); ++hi)
    for (const auto& e : rep.estimates[hi])
      j["estimates"].push_back({{"h", rep.h_list[hi]},
                                {"t", e.t},
                                {"mean", e.mean},
                                {"mean_se", e.mean_se},
                                {"mean_target", e.mean_target},
                                {"variance", e.variance},
                                {"variance_se", e.variance_se},
                                {"variance_target", e.variance_target}});
  return j;
}

}  // namespace hybridexec
