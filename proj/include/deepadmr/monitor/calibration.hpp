#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepadmr/common/format.hpp"
#include "deepadmr/monitor/ecdf.hpp"
#include "deepadmr/monitor/knn.hpp"

namespace deepadmr::monitor {

/// Nominal TD-error reference: the points (single deltas, or windows of `window` consecutive
/// deltas), their leave-one-out kNN statistics and the tail eCDF over those statistics.
/// Points are kept in lexicographic order, so the input order never affects any output.
class CalibrationSet {
 public:
  CalibrationSet() = default;

  /// `points` holds count*window values, one point per `window` consecutive entries.
  CalibrationSet(std::span<const double> points, std::size_t window, std::size_t k) : window_(window), k_(k) {
    if (window == 0) throw std::invalid_argument("calibration: window must be >= 1");
    if (points.empty() || points.size() % window != 0)
      throw std::invalid_argument("calibration: point data must be a non-empty multiple of the window");
    const std::size_t m = points.size() / window;
    if (k == 0 || k >= m) throw std::invalid_argument("calibration: k must satisfy 1 <= k < number of points");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(points.begin() + a * window, points.begin() + (a + 1) * window,
                                          points.begin() + b * window, points.begin() + (b + 1) * window);
    });
    points_.reserve(points.size());
    for (std::size_t i : order) points_.insert(points_.end(), points.begin() + i * window, points.begin() + (i + 1) * window);
    if (window_ == 1) {
      stats_ = loo_knn_sorted(points_, k_);
    } else {
      stats_.resize(m);
      for (std::size_t i = 0; i < m; ++i) stats_[i] = kth_nearest_brute(points_, window_, point(i), k_, i);
    }
    ecdf_ = TailEcdf(stats_);
  }

  std::size_t size() const { return stats_.size(); }
  std::size_t window() const { return window_; }
  std::size_t k() const { return k_; }
  std::span<const double> points() const { return points_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * window_, window_}; }
  const std::vector<double>& knn_stats() const { return stats_; }
  const TailEcdf& ecdf() const { return ecdf_; }

  /// Online kNN statistic of a new point; calibration points are all eligible neighbours.
  double statistic(std::span<const double> x) const {
    if (x.size() != window_) throw std::invalid_argument("calibration: query has the wrong window length");
    return window_ == 1 ? kth_nearest_sorted(points_, x[0], k_) : kth_nearest_brute(points_, window_, x, k_);
  }

  double p_value(double stat) const { return ecdf_.tail_probability(stat); }

  void write(std::ostream& os) const {
    os << "deepadmr-calibration 1\n";
    os << "count " << size() << "\nk " << k_ << "\nwindow " << window_ << "\npoints\n";
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t c = 0; c < window_; ++c) os << (c ? "\t" : "") << format_double(points_[i * window_ + c]);
      os << '\n';
    }
    os << "knn_stats\n";
    for (double s : stats_) os << format_double(s) << '\n';
  }

  static CalibrationSet read(std::istream& is) {
    auto fail = [](const std::string& what) { return std::runtime_error("calibration file: " + what); };
    std::string line;
    if (!std::getline(is, line) || line != "deepadmr-calibration 1") throw fail("unsupported header");
    auto field = [&](const char* name) {
      if (!std::getline(is, line)) throw fail(std::string("missing ") + name);
      std::istringstream ss(line);
      std::string key;
      std::size_t v = 0;
      if (!(ss >> key >> v) || key != name) throw fail(std::string("expected '") + name + "'");
      return v;
    };
    CalibrationSet c;
    const std::size_t m = field("count");
    c.k_ = field("k");
    c.window_ = field("window");
    if (m == 0 || c.window_ == 0 || c.k_ == 0 || c.k_ >= m) throw fail("inconsistent count/k/window");
    if (!std::getline(is, line) || line != "points") throw fail("expected 'points'");
    c.points_.reserve(m * c.window_);
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::getline(is, line)) throw fail("truncated points");
      std::size_t start = 0;
      for (std::size_t col = 0; col < c.window_; ++col) {
        const std::size_t tab = line.find('\t', start);
        if ((tab == std::string::npos) != (col + 1 == c.window_)) throw fail("wrong number of columns");
        c.points_.push_back(parse_double(std::string_view(line).substr(start, tab - start)));
        start = tab + 1;
      }
    }
    if (!std::getline(is, line) || line != "knn_stats") throw fail("expected 'knn_stats'");
    c.stats_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::getline(is, line)) throw fail("truncated knn_stats");
      c.stats_.push_back(parse_double(line));
    }
    c.ecdf_ = TailEcdf(c.stats_);
    return c;
  }

 private:
  std::size_t window_ = 1;
  std::size_t k_ = 0;
  std::vector<double> points_;
  std::vector<double> stats_;
  TailEcdf ecdf_;
};

}  // namespace deepadmr::monitor
