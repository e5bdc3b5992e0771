#pragma once

// Comparison measures between channels of time series on a common grid.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qcme/propagators.hpp"

namespace qcme {

namespace detail {
inline void require_same_length(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw Error("channels must be non-empty and sampled on the same grid");
}
}  // namespace detail

inline double mean_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require_same_length(a, b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s / static_cast<double>(a.size());
}

inline double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require_same_length(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double peak_to_peak(const std::vector<double>& a) {
  if (a.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  return *hi - *lo;
}

inline double max_drift(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v - a.front()));
  return m;
}

/// Largest |a - b| over every channel the two series share by name.
inline double max_series_difference(const TimeSeries& a, const TimeSeries& b,
                                    const std::string& prefix = "") {
  double m = 0.0;
  for (const auto& name : a.names) {
    if (name.rfind(prefix, 0) != 0 || !b.has(name)) continue;
    m = std::max(m, max_abs_difference(a.channel(name), b.channel(name)));
  }
  return m;
}

}  // namespace qcme
