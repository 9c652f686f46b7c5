#pragma once

#include <cmath>
#include <cstddef>

namespace deepadmr::sim {

using NodeId = std::size_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned deployment rectangle [0, width] x [0, height].
struct Area {
  double width = 0.0;
  double height = 0.0;

  bool contains(Vec2 p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }
};

}  // namespace deepadmr::sim
