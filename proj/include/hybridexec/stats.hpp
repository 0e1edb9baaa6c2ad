#pragma once

// Summary statistics, histograms and Gaussian-kernel density estimates for
// the objective and terminal-position distributions.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hybridexec {

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;        // unbiased
  double skewness = 0.0;        // bias-adjusted sample skewness
  double excess_kurtosis = 0.0; // bias-adjusted
  double std_error = 0.0;       // of the mean
  std::vector<double> quantile_levels{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
  std::vector<double> quantiles;
};

// Linear-interpolation quantile on a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[lo + 1];
}

inline SummaryStats summarize(std::vector<double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("summarize: need at least 2 samples");
  SummaryStats s;
  s.n = n;
  const double dn = static_cast<double>(n);
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= dn;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  s.mean = mean;
  s.variance = m2 / (dn - 1.0);
  s.std_error = std::sqrt(s.variance / dn);
  if (m2 > 0.0) {
    const double g1 = (m3 / dn) / std::pow(m2 / dn, 1.5);
    s.skewness = g1 * std::sqrt(dn * (dn - 1.0)) / (dn - 2.0);
    const double g2 = dn * m4 / (m2 * m2) - 3.0;
    s.excess_kurtosis = (dn - 1.0) / ((dn - 2.0) * (dn - 3.0)) *
                        ((dn + 1.0) * g2 + 6.0);
  }
  std::sort(samples.begin(), samples.end());
  for (double p : s.quantile_levels)
    s.quantiles.push_back(quantile_sorted(samples, p));
  return s;
}

inline nlohmann::json stats_json(const SummaryStats& s) {
  nlohmann::json j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["skewness"] = s.skewness;
  j["excess_kurtosis"] = s.excess_kurtosis;
  j["std_error"] = s.std_error;
  for (std::size_t i = 0; i < s.quantile_levels.size(); ++i)
    j["quantiles"][std::to_string(static_cast<int>(
        std::round(100 * s.quantile_levels[i])))] = s.quantiles[i];
  return j;
}

struct Histogram {
  std::vector<double> edges;   // bins + 1
  std::vector<std::size_t> counts;
};

inline Histogram histogram(const std::vector<double>& samples, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  if (samples.empty()) throw std::invalid_argument("histogram: empty sample");
  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *mn_it, hi = *mx_it;
  if (lo == hi) {  // degenerate sample: a single bin around the point
    bins = 1;
    hi = lo + 1.0;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  h.counts.assign(bins, 0);
  for (double x : samples) {
    int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[b];
  }
  return h;
}

// Silverman's rule: 1.06 sigma_hat n^{-1/5}.
inline double silverman_bandwidth(const std::vector<double>& samples) {
  const SummaryStats s = summarize(samples);
  return 1.06 * std::sqrt(s.variance) *
         std::pow(static_cast<double>(samples.size()), -0.2);
}

inline std::vector<double> kde(const std::vector<double>& samples,
                               const std::vector<double>& grid,
                               double bandwidth = 0.0) {
  if (bandwidth == 0.0) bandwidth = silverman_bandwidth(samples);
  if (bandwidth <= 0.0)
    throw std::invalid_argument("kde: bandwidth must be positive");
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * bandwidth *
             std::sqrt(2.0 * 3.14159265358979323846));
  std::vector<double> dens(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (double x : samples) {
      const double z = (grid[i] - x) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    dens[i] = norm * acc;
  }
  return dens;
}

inline void write_histogram_csv(const Histogram& h, std::ostream& out) {
  out << "bin_left,bin_right,count\n";
  out.precision(17);
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << h.edges[i] << "," << h.edges[i + 1] << "," << h.counts[i] << "\n";
}

inline void write_kde_csv(const std::vector<double>& grid,
                          const std::vector<double>& dens, std::ostream& out) {
  out << "x,density\n";
  out.precision(17);
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << grid[i] << "," << dens[i] << "\n";
}

}  // namespace hybridexec
