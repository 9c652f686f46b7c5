#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace deepadmr::monitor {

/// Smoothed upper-tail probability over nominal statistics: p(d) = (1 + #{s >= d}) / (M + 1).
class TailEcdf {
 public:
  TailEcdf() = default;
  explicit TailEcdf(std::span<const double> stats) : sorted_(stats.begin(), stats.end()) {
    if (sorted_.empty()) throw std::invalid_argument("TailEcdf: empty calibration");
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

  std::size_t count_at_least(double d) const {
    return static_cast<std::size_t>(sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), d));
  }

  double tail_probability(double d) const {
    return (1.0 + static_cast<double>(count_at_least(d))) / (static_cast<double>(sorted_.size()) + 1.0);
  }

 private:
  std::vector<double> sorted_;
};

}  // namespace deepadmr::monitor
