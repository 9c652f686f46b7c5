#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "deepadmr/common/random.hpp"
#include "deepadmr/sim/geometry.hpp"

namespace deepadmr::sim {

/// Per-node Gauss-Markov state. Speed is in meters per slot.
struct MobilityState {
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;
  double mean_speed = 0.0;
  double mean_heading = 0.0;
  double memory = 0.0;  // in [0, 1]; 1 keeps speed/heading frozen
};

struct MobilityNoise {
  double sigma_speed = 0.0;
  double sigma_heading = 0.0;
};

namespace detail {

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// Mirrors the position back inside the area; headings (current and mean) flip about the wall normal.
inline void reflect(MobilityState& s, const Area& area) {
  constexpr double pi = std::numbers::pi;
  for (int guard = 0; guard < 64 && !area.contains(s.position); ++guard) {
    if (s.position.x < 0.0) {
      s.position.x = -s.position.x;
      s.heading = pi - s.heading;
      s.mean_heading = pi - s.mean_heading;
    } else if (s.position.x > area.width) {
      s.position.x = 2.0 * area.width - s.position.x;
      s.heading = pi - s.heading;
      s.mean_heading = pi - s.mean_heading;
    }
    if (s.position.y < 0.0) {
      s.position.y = -s.position.y;
      s.heading = -s.heading;
      s.mean_heading = -s.mean_heading;
    } else if (s.position.y > area.height) {
      s.position.y = 2.0 * area.height - s.position.y;
      s.heading = -s.heading;
      s.mean_heading = -s.mean_heading;
    }
  }
  s.position.x = std::clamp(s.position.x, 0.0, area.width);
  s.position.y = std::clamp(s.position.y, 0.0, area.height);
  s.heading = wrap_angle(s.heading);
  s.mean_heading = wrap_angle(s.mean_heading);
}

}  // namespace detail

/// One Gauss-Markov step with explicit standard-normal draws `w_speed`, `w_heading`.
inline MobilityState step_mobility(const MobilityState& state, const MobilityNoise& noise, const Area& area,
                                   double w_speed, double w_heading) {
  const double m = state.memory;
  const double diffusion = std::sqrt(std::max(0.0, 1.0 - m * m));
  MobilityState next = state;
  next.speed = m * state.speed + (1.0 - m) * state.mean_speed + diffusion * noise.sigma_speed * w_speed;
  next.speed = std::max(0.0, next.speed);
  next.heading = m * state.heading + (1.0 - m) * state.mean_heading + diffusion * noise.sigma_heading * w_heading;
  next.position.x += next.speed * std::cos(next.heading);
  next.position.y += next.speed * std::sin(next.heading);
  detail::reflect(next, area);
  return next;
}

inline MobilityState step_mobility(const MobilityState& state, const MobilityNoise& noise, const Area& area, Rng& rng) {
  const double w_speed = standard_normal(rng);
  const double w_heading = standard_normal(rng);
  return step_mobility(state, noise, area, w_speed, w_heading);
}

}  // namespace deepadmr::sim
