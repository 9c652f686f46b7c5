#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/experiments/run_record.hpp"
#include "deepadmr/monitor/calibration.hpp"
#include "deepadmr/monitor/detector.hpp"
#include "deepadmr/monitor/td_error.hpp"
#include "deepadmr/policy/checkpoint.hpp"
#include "deepadmr/policy/rollout.hpp"
#include "deepadmr/sim/scenario.hpp"

namespace deepadmr::experiments {

/// Runs episode `index` of `scenario` with the frozen policy. The policy stream is seeded from
/// (policy_seed, index), so nominal and anomalous runs with equal seeds are matched.
inline policy::EpisodeResult run_frozen(const policy::Checkpoint& ck, const sim::ScenarioConfig& scenario,
                                        std::uint64_t index, std::uint64_t policy_seed, sim::EventLog* log = nullptr) {
  Rng rng(derive_seed(policy_seed, index));
  return policy::run_episode(sim::resolve_episode(scenario, index), ck.routing, policy::sampling_selector(ck.model.actor),
                             rng, log);
}

/// TD-error points of `episodes` nominal episodes, flattened in (episode, node, slot) order.
/// With window W every run of W consecutive deltas of one node becomes a point.
inline std::vector<double> collect_nominal_points(const policy::Checkpoint& ck, const sim::ScenarioConfig& scenario,
                                                  std::size_t episodes, std::uint64_t policy_seed, std::size_t window) {
  if (!scenario.nominal())
    throw std::invalid_argument("calibrate: scenario carries a " + std::string(sim::to_string(scenario.anomaly.kind)) +
                                " anomaly; calibration needs nominal runs");
  if (episodes == 0) throw std::invalid_argument("calibrate: at least one episode is required");
  if (window == 0) throw std::invalid_argument("calibrate: window must be >= 1");
  std::vector<double> points;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto res = run_frozen(ck, scenario, e, policy_seed);
    for (const auto& stream : monitor::td_streams(res, ck.model.critic, ck.training.ppo.gamma)) {
      for (std::size_t i = 0; i + window <= stream.size(); ++i)
        for (std::size_t w = 0; w < window; ++w) points.push_back(stream[i + w].delta);
    }
  }
  if (points.empty()) throw std::runtime_error("calibrate: nominal runs produced no TD errors");
  return points;
}

inline monitor::CalibrationSet calibrate(const policy::Checkpoint& ck, const sim::ScenarioConfig& scenario,
                                         std::size_t episodes, std::uint64_t policy_seed, std::size_t k,
                                         std::size_t window = 1) {
  const auto points = collect_nominal_points(ck, scenario, episodes, policy_seed, window);
  if (points.size() / window <= k)
    throw std::invalid_argument("calibrate: " + std::to_string(points.size() / window) +
                                " calibration points are too few for k=" + std::to_string(k));
  return monitor::CalibrationSet(points, window, k);
}

struct DetectOptions {
  std::string scenario_id = "scenario";
  std::uint64_t policy_seed = 1;
  bool keep_trace = true;
};

/// Runs one episode and scores every node's TD-error stream.
inline RunRecord detect_episode(const policy::Checkpoint& ck, const monitor::CalibrationSet& calibration,
                                const sim::ScenarioConfig& scenario, const monitor::DetectorConfig& detector,
                                std::uint64_t index, const DetectOptions& opt = {}) {
  detector.validate(calibration.size());
  if (detector.k != calibration.k())
    throw std::invalid_argument("detect: detector k=" + std::to_string(detector.k) + " differs from calibration k=" +
                                std::to_string(calibration.k()));
  if (detector.window != calibration.window())
    throw std::invalid_argument("detect: detector window differs from the calibration's window");
  sim::EventLog log;
  const auto res = run_frozen(ck, scenario, index, opt.policy_seed, &log);
  const auto streams = monitor::td_streams(res, ck.model.critic, ck.training.ppo.gamma);
  auto run = monitor::run_detector(streams, calibration, detector, res.t_max);

  RunRecord r;
  r.scenario_id = opt.scenario_id;
  r.seed = opt.policy_seed;
  r.episode = index;
  r.label = scenario.nominal() ? Label::Nominal : Label::Anomalous;
  r.anomaly = sim::to_string(scenario.anomaly.kind);
  r.n_nodes = res.n_nodes;
  r.t_max = res.t_max;
  r.metrics = EpisodeMetrics::from(res.metrics);
  r.detector = detector;
  r.jammer_events = static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [](const sim::Event& e) { return e.jammer_related(); }));
  r.episode_score = run.episode_score;
  r.aggregate_alarm = run.aggregate_alarm;
  r.node_alarms = std::move(run.alarms);
  r.aggregate = std::move(run.aggregate);
  if (opt.keep_trace) r.trace = std::move(run.rows);
  r.validate();
  return r;
}

inline std::vector<RunRecord> detect(const policy::Checkpoint& ck, const monitor::CalibrationSet& calibration,
                                     const sim::ScenarioConfig& scenario, const monitor::DetectorConfig& detector,
                                     std::size_t episodes, const DetectOptions& opt = {}) {
  if (episodes == 0) throw std::invalid_argument("detect: at least one episode is required");
  std::vector<RunRecord> out;
  out.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) out.push_back(detect_episode(ck, calibration, scenario, detector, e, opt));
  return out;
}

/// Mean of `aggregate` over slots [from, to], clamped to the recorded range.
inline double mean_aggregate(const RunRecord& r, std::int64_t from, std::int64_t to) {
  if (r.aggregate.empty()) return 0.0;
  from = std::max<std::int64_t>(from, 0);
  to = std::min<std::int64_t>(to, static_cast<std::int64_t>(r.aggregate.size()) - 1);
  if (to < from) return 0.0;
  double s = 0.0;
  for (std::int64_t t = from; t <= to; ++t) s += r.aggregate[static_cast<std::size_t>(t)];
  return s / static_cast<double>(to - from + 1);
}

}  // namespace deepadmr::experiments
