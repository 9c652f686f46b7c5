#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace deepadmr::monitor {

constexpr std::size_t no_index = std::numeric_limits<std::size_t>::max();

/// Distance from `x` to its k-th nearest value in ascending `sorted`, skipping position `skip`
/// (leave-one-out). Two pointers walk outward from the insertion point.
inline double kth_nearest_sorted(std::span<const double> sorted, double x, std::size_t k, std::size_t skip = no_index) {
  const std::size_t available = sorted.size() - (skip < sorted.size() ? 1 : 0);
  if (k == 0 || k > available) throw std::invalid_argument("kNN: k must be in [1, number of reference points]");
  std::size_t hi = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
  std::size_t lo = hi;  // candidates below are [0, lo)
  double d = 0.0;
  for (std::size_t taken = 0; taken < k;) {
    if (lo > 0 && lo - 1 == skip) --lo;
    if (hi < sorted.size() && hi == skip) ++hi;
    const double below = lo > 0 ? std::abs(x - sorted[lo - 1]) : std::numeric_limits<double>::infinity();
    const double above = hi < sorted.size() ? std::abs(x - sorted[hi]) : std::numeric_limits<double>::infinity();
    if (below <= above) {
      d = below;
      --lo;
    } else {
      d = above;
      ++hi;
    }
    ++taken;
  }
  return d;
}

/// Leave-one-out k-th nearest distance of every point of ascending `sorted`, in that order.
inline std::vector<double> loo_knn_sorted(std::span<const double> sorted, std::size_t k) {
  std::vector<double> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out[i] = kth_nearest_sorted(sorted, sorted[i], k, i);
  return out;
}

/// Euclidean k-th nearest distance of `x` among row-packed `points` (dim values each), by full scan.
inline double kth_nearest_brute(std::span<const double> points, std::size_t dim, std::span<const double> x,
                                std::size_t k, std::size_t skip = no_index) {
  if (dim == 0 || x.size() != dim || points.size() % dim != 0) throw std::invalid_argument("kNN: dimension mismatch");
  const std::size_t m = points.size() / dim;
  std::vector<double> dist;
  dist.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == skip) continue;
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double e = x[c] - points[j * dim + c];
      s += e * e;
    }
    dist.push_back(dim == 1 ? std::abs(x[0] - points[j]) : std::sqrt(s));
  }
  if (k == 0 || k > dist.size()) throw std::invalid_argument("kNN: k must be in [1, number of reference points]");
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  return dist[k - 1];
}

}  // namespace deepadmr::monitor
