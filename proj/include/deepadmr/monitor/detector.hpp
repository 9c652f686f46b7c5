#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "deepadmr/monitor/calibration.hpp"
#include "deepadmr/monitor/cusum.hpp"
#include "deepadmr/monitor/td_error.hpp"

namespace deepadmr::monitor {

/// One scored TD error.
struct TraceRow {
  std::int64_t slot = 0;
  NodeId node = 0;
  double delta = 0.0;
  double knn_stat = 0.0;
  double p = 0.0;
  double ell = 0.0;
  double g = 0.0;
  bool alarm = false;  // g >= h at this row
};

/// Online detector of one node: delta -> kNN statistic -> p -> l -> g.
/// In window mode the first window-1 deltas only fill the buffer.
class NodeDetector {
 public:
  NodeDetector(NodeId node, const CalibrationSet& calibration, const DetectorConfig& cfg)
      : node_(node), calib_(&calibration), cfg_(cfg), floor_(cfg.floor_for(calibration.size())) {
    cfg_.validate(calibration.size());
    if (cfg_.k != calibration.k()) throw std::invalid_argument("detector: k differs from the calibration's k");
    if (cfg_.window != calibration.window()) throw std::invalid_argument("detector: window differs from the calibration's window");
  }

  std::optional<TraceRow> observe(std::int64_t slot, double delta) {
    recent_.push_back(delta);
    if (recent_.size() > cfg_.window) recent_.pop_front();
    if (recent_.size() < cfg_.window) return std::nullopt;
    std::vector<double> x(recent_.begin(), recent_.end());
    TraceRow row;
    row.slot = slot;
    row.node = node_;
    row.delta = delta;
    row.knn_stat = calib_->statistic(x);
    row.p = calib_->p_value(row.knn_stat);
    row.ell = log_unlikelihood(row.p, cfg_.alpha, floor_);
    cusum_step(state_, row.p, row.ell, cfg_.h, slot);
    row.g = state_.g;
    row.alarm = state_.g >= cfg_.h;
    return row;
  }

  const DetectorState& state() const { return state_; }
  DetectorState& state() { return state_; }

 private:
  NodeId node_;
  const CalibrationSet* calib_;
  DetectorConfig cfg_;
  double floor_;
  std::deque<double> recent_;
  DetectorState state_;
};

struct DetectorRun {
  std::vector<TraceRow> rows;                        // per node in slot order, nodes ascending
  std::vector<std::optional<std::int64_t>> alarms;   // first alarm slot per node
  std::vector<double> aggregate;                     // mean over nodes of g, held between updates; slots 0..t_max
  double episode_score = 0.0;                        // max of `aggregate`
  std::optional<std::int64_t> aggregate_alarm;       // first slot with aggregate >= h
};

/// Mean-over-nodes score per slot in [0, t_max]; a node's g holds its last value between its
/// updates and is 0 before its first one.
inline std::vector<double> aggregate_score(std::span<const TraceRow> rows, std::size_t n_nodes, std::int64_t t_max) {
  std::vector<std::vector<const TraceRow*>> per_slot(static_cast<std::size_t>(t_max) + 1);
  for (const auto& r : rows) per_slot.at(static_cast<std::size_t>(std::clamp<std::int64_t>(r.slot, 0, t_max))).push_back(&r);
  std::vector<double> g(n_nodes, 0.0), out(per_slot.size(), 0.0);
  for (std::size_t t = 0; t < per_slot.size(); ++t) {
    for (const TraceRow* r : per_slot[t]) g[r->node] = r->g;
    double sum = 0.0;
    for (double v : g) sum += v;
    out[t] = n_nodes ? sum / static_cast<double>(n_nodes) : 0.0;
  }
  return out;
}

/// Runs an independent detector on every node's TD-error stream.
inline DetectorRun run_detector(std::span<const std::vector<TdSample>> streams, const CalibrationSet& calibration,
                                const DetectorConfig& cfg, std::int64_t t_max) {
  DetectorRun run;
  run.alarms.resize(streams.size());
  for (std::size_t node = 0; node < streams.size(); ++node) {
    NodeDetector det(node, calibration, cfg);
    for (const auto& s : streams[node])
      if (auto row = det.observe(s.slot, s.delta)) run.rows.push_back(*row);
    run.alarms[node] = det.state().alarm_slot;
  }
  run.aggregate = aggregate_score(run.rows, streams.size(), t_max);
  for (std::size_t t = 0; t < run.aggregate.size(); ++t) {
    run.episode_score = std::max(run.episode_score, run.aggregate[t]);
    if (!run.aggregate_alarm && run.aggregate[t] >= cfg.h) run.aggregate_alarm = static_cast<std::int64_t>(t);
  }
  return run;
}

}  // namespace deepadmr::monitor
