#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>

namespace deepadmr::monitor {

struct DetectorConfig {
  std::size_t k = 5;
  double alpha = 0.05;
  double h = 5.0;
  /// Lower clamp on p before the log; unset means 1/(M+1) for a calibration of size M.
  std::optional<double> p_floor;
  std::size_t window = 1;

  double floor_for(std::size_t calibration_size) const {
    return p_floor ? *p_floor : 1.0 / (static_cast<double>(calibration_size) + 1.0);
  }

  void validate() const {
    if (k == 0) throw std::invalid_argument("detector: k must be >= 1");
    if (window == 0) throw std::invalid_argument("detector: window must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("detector: alpha must be in (0,1)");
    if (!(h > 0.0)) throw std::invalid_argument("detector: h must be > 0");
    if (p_floor && !(*p_floor > 0.0 && *p_floor < alpha)) throw std::invalid_argument("detector: p_floor must be in (0, alpha)");
  }

  void validate(std::size_t calibration_size) const {
    validate();
    if (k >= calibration_size) throw std::invalid_argument("detector: k must be smaller than the calibration size");
    if (!(floor_for(calibration_size) < alpha)) throw std::invalid_argument("detector: p floor must be below alpha");
  }
};

struct HistoryEntry {
  std::int64_t slot = 0;
  double p = 0.0;
  double ell = 0.0;
  double g = 0.0;
};

struct DetectorState {
  double g = 0.0;
  std::optional<std::int64_t> alarm_slot;
  std::size_t history_capacity = 0;  // 0 keeps no history
  std::deque<HistoryEntry> history;
};

/// l = log(alpha / max(p, p_floor)).
inline double log_unlikelihood(double p, double alpha, double p_floor) { return std::log(alpha / std::max(p, p_floor)); }

/// g <- max(0, g + l); records the first slot at which g reaches h.
inline void cusum_step(DetectorState& s, double ell, double h, std::int64_t slot) {
  s.g = std::max(0.0, s.g + ell);
  if (!s.alarm_slot && s.g >= h) s.alarm_slot = slot;
}

inline void cusum_step(DetectorState& s, double p, double ell, double h, std::int64_t slot) {
  cusum_step(s, ell, h, slot);
  if (s.history_capacity == 0) return;
  if (s.history.size() == s.history_capacity) s.history.pop_front();
  s.history.push_back({slot, p, ell, s.g});
}

}  // namespace deepadmr::monitor
