#pragma once

// Order statistics shared by the rApp reward and the O1 quantile reports.
// Quantiles use linear interpolation between order statistics (R type 7):
// h = (n - 1) p, q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace cfsim::stats {

/// Median of an already sorted, nonempty range; the mean of the two middle
/// values for even sizes.
inline double median_sorted(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

inline double median(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return median_sorted(v);
}

/// Type-7 quantile of a sorted, nonempty range. p = 0.5 is routed through
/// median_sorted so both agree bit for bit.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (p == 0.5) return median_sorted(sorted);
  const double h = static_cast<double>(n - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> values, double p) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, p);
}

inline double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

}  // namespace cfsim::stats
