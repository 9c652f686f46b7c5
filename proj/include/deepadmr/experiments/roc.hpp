#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace deepadmr::experiments {

struct RocPoint {
  double h = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
  std::size_t nominal_alarms = 0;
  std::size_t anomalous_alarms = 0;
  std::size_t nominal_count = 0;
  std::size_t anomalous_count = 0;
};

/// Every distinct score plus one threshold above the largest, ascending; enough to trace the
/// full empirical staircase.
inline std::vector<double> default_h_grid(std::span<const double> nominal, std::span<const double> anomalous) {
  std::vector<double> grid(nominal.begin(), nominal.end());
  grid.insert(grid.end(), anomalous.begin(), anomalous.end());
  if (grid.empty()) return grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.push_back(grid.back() + 1.0);
  return grid;
}

/// Episode-level ROC: an episode alarms at threshold h when its score is >= h. Points come back
/// sorted by h.
inline std::vector<RocPoint> compute_roc(std::span<const double> nominal, std::span<const double> anomalous,
                                         std::vector<double> h_grid) {
  if (nominal.empty() || anomalous.empty()) throw std::invalid_argument("ROC needs nominal and anomalous episodes");
  if (h_grid.empty()) throw std::invalid_argument("ROC needs a non-empty threshold grid");
  std::sort(h_grid.begin(), h_grid.end());
  std::vector<double> nom(nominal.begin(), nominal.end()), ano(anomalous.begin(), anomalous.end());
  std::sort(nom.begin(), nom.end());
  std::sort(ano.begin(), ano.end());
  auto at_least = [](const std::vector<double>& s, double h) {
    return static_cast<std::size_t>(s.end() - std::lower_bound(s.begin(), s.end(), h));
  };
  std::vector<RocPoint> out;
  out.reserve(h_grid.size());
  for (double h : h_grid) {
    RocPoint p;
    p.h = h;
    p.nominal_count = nom.size();
    p.anomalous_count = ano.size();
    p.nominal_alarms = at_least(nom, h);
    p.anomalous_alarms = at_least(ano, h);
    p.fpr = static_cast<double>(p.nominal_alarms) / static_cast<double>(nom.size());
    p.tpr = static_cast<double>(p.anomalous_alarms) / static_cast<double>(ano.size());
    out.push_back(p);
  }
  return out;
}

/// Trapezoidal area under the (fpr, tpr) staircase, anchored at (0,0) and (1,1).
inline double auc(std::span<const RocPoint> points) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size() + 2);
  xy.emplace_back(0.0, 0.0);
  for (const auto& p : points) xy.emplace_back(p.fpr, p.tpr);
  xy.emplace_back(1.0, 1.0);
  std::sort(xy.begin(), xy.end());
  double area = 0.0;
  for (std::size_t i = 1; i < xy.size(); ++i)
    area += (xy[i].first - xy[i - 1].first) * (xy[i].second + xy[i - 1].second) / 2.0;
  return area;
}

}  // namespace deepadmr::experiments
