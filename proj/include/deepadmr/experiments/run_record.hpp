#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepadmr/monitor/detector.hpp"
#include "deepadmr/sim/network.hpp"

namespace deepadmr::experiments {

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label { Nominal, Anomalous };

inline const char* to_string(Label l) { return l == Label::Nominal ? "nominal" : "anomalous"; }

struct EpisodeMetrics {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t transmissions = 0;
  double delivery_ratio = 0.0;
  double mean_hops = 0.0;
  double overhead = 0.0;  // transmissions per delivered packet

  static EpisodeMetrics from(const sim::NetworkMetrics& m) {
    return {m.injected, m.delivered, m.transmissions, m.delivery_ratio(), m.mean_hops(), m.overhead()};
  }
};

/// Result of running the frozen policy plus detectors on one episode.
struct RunRecord {
  std::string scenario_id;
  std::uint64_t seed = 0;           // run seed
  std::uint64_t episode = 0;        // index within the scenario family
  Label label = Label::Nominal;
  std::string anomaly = "none";     // anomaly kind of the scenario
  std::size_t n_nodes = 0;
  std::int64_t t_max = 0;
  EpisodeMetrics metrics;
  monitor::DetectorConfig detector;
  std::size_t jammer_events = 0;    // jammed receptions plus lost ACKs
  double episode_score = 0.0;
  std::optional<std::int64_t> aggregate_alarm;
  std::vector<std::optional<std::int64_t>> node_alarms;
  std::vector<double> aggregate;    // slots 0..t_max
  std::vector<monitor::TraceRow> trace;

  /// A record labelled nominal must not carry any jammer activity.
  void validate() const {
    if (label == Label::Nominal && jammer_events > 0)
      throw RecordError("record '" + scenario_id + "' is labelled nominal but contains jammer events");
    if ((label == Label::Nominal) != (anomaly == "none"))
      throw RecordError("record '" + scenario_id + "': label does not match anomaly kind '" + anomaly + "'");
    if (!aggregate.empty() && aggregate.size() != static_cast<std::size_t>(t_max) + 1)
      throw RecordError("record '" + scenario_id + "': aggregate length differs from T_max + 1");
  }
};

namespace detail {

using nlohmann::json;

inline json opt_slot(const std::optional<std::int64_t>& s) { return s ? json(*s) : json(nullptr); }

inline std::optional<std::int64_t> slot_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::int64_t>();
}

}  // namespace detail

inline nlohmann::json detector_to_json(const monitor::DetectorConfig& d) {
  nlohmann::json j = {{"k", d.k}, {"alpha", d.alpha}, {"h", d.h}, {"window", d.window}};
  j["p_floor"] = d.p_floor ? nlohmann::json(*d.p_floor) : nlohmann::json(nullptr);
  return j;
}

inline monitor::DetectorConfig detector_from_json(const nlohmann::json& j) {
  monitor::DetectorConfig d;
  d.k = j.at("k").get<std::size_t>();
  d.alpha = j.at("alpha").get<double>();
  d.h = j.at("h").get<double>();
  d.window = j.at("window").get<std::size_t>();
  if (j.contains("p_floor") && !j.at("p_floor").is_null()) d.p_floor = j.at("p_floor").get<double>();
  return d;
}

inline nlohmann::json record_to_json(const RunRecord& r) {
  using detail::json;
  json alarms = json::array();
  for (const auto& a : r.node_alarms) alarms.push_back(detail::opt_slot(a));
  json trace = json::array();
  for (const auto& row : r.trace)
    trace.push_back({row.slot, row.node, row.delta, row.knn_stat, row.p, row.ell, row.g, row.alarm ? 1 : 0});
  return {
      {"scenario_id", r.scenario_id},
      {"seed", r.seed},
      {"episode", r.episode},
      {"label", to_string(r.label)},
      {"anomaly", r.anomaly},
      {"N", r.n_nodes},
      {"T_max", r.t_max},
      {"metrics",
       {{"injected", r.metrics.injected},
        {"delivered", r.metrics.delivered},
        {"transmissions", r.metrics.transmissions},
        {"delivery_ratio", r.metrics.delivery_ratio},
        {"mean_hops", r.metrics.mean_hops},
        {"overhead", r.metrics.overhead}}},
      {"detector", detector_to_json(r.detector)},
      {"jammer_events", r.jammer_events},
      {"episode_score", r.episode_score},
      {"aggregate_alarm", detail::opt_slot(r.aggregate_alarm)},
      {"node_alarms", alarms},
      {"aggregate", r.aggregate},
      {"trace", trace},
  };
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.scenario_id = j.at("scenario_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.episode = j.at("episode").get<std::uint64_t>();
    const auto label = j.at("label").get<std::string>();
    if (label == "nominal") r.label = Label::Nominal;
    else if (label == "anomalous") r.label = Label::Anomalous;
    else throw RecordError("unknown label '" + label + "'");
    r.anomaly = j.at("anomaly").get<std::string>();
    r.n_nodes = j.at("N").get<std::size_t>();
    r.t_max = j.at("T_max").get<std::int64_t>();
    const auto& m = j.at("metrics");
    r.metrics.injected = m.at("injected").get<std::uint64_t>();
    r.metrics.delivered = m.at("delivered").get<std::uint64_t>();
    r.metrics.transmissions = m.at("transmissions").get<std::uint64_t>();
    r.metrics.delivery_ratio = m.at("delivery_ratio").get<double>();
    r.metrics.mean_hops = m.at("mean_hops").get<double>();
    r.metrics.overhead = m.at("overhead").get<double>();
    r.detector = detector_from_json(j.at("detector"));
    r.jammer_events = j.at("jammer_events").get<std::size_t>();
    r.episode_score = j.at("episode_score").get<double>();
    r.aggregate_alarm = detail::slot_from(j.at("aggregate_alarm"));
    for (const auto& a : j.at("node_alarms")) r.node_alarms.push_back(detail::slot_from(a));
    r.aggregate = j.at("aggregate").get<std::vector<double>>();
    for (const auto& row : j.at("trace")) {
      if (!row.is_array() || row.size() != 8) throw RecordError("trace rows must have 8 columns");
      monitor::TraceRow t;
      t.slot = row[0].get<std::int64_t>();
      t.node = row[1].get<std::size_t>();
      t.delta = row[2].get<double>();
      t.knn_stat = row[3].get<double>();
      t.p = row[4].get<double>();
      t.ell = row[5].get<double>();
      t.g = row[6].get<double>();
      t.alarm = row[7].get<int>() != 0;
      r.trace.push_back(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw RecordError(std::string("malformed run record: ") + e.what());
  }
  r.validate();
  return r;
}

/// Records are stored one JSON object per line.
inline void write_records(std::ostream& os, const std::vector<RunRecord>& records) {
  for (const auto& r : records) os << record_to_json(r).dump() << '\n';
}

inline std::vector<RunRecord> read_records(std::istream& is) {
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw RecordError("line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

}  // namespace deepadmr::experiments
