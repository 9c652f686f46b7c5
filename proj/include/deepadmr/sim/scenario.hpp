#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepadmr/common/json_util.hpp"
#include "deepadmr/common/random.hpp"
#include "deepadmr/sim/channel.hpp"
#include "deepadmr/sim/mobility.hpp"
#include "deepadmr/sim/packet.hpp"

namespace deepadmr::sim {

struct MobilityConfig {
  double mean_speed = 4.0;  // m/slot
  double memory = 0.85;
  double sigma_speed = 1.0;
  double sigma_heading = 0.4;
};

/// Flow declaration. Missing endpoints are drawn per episode.
struct FlowSpec {
  std::optional<NodeId> source;
  std::optional<NodeId> destination;
  double rate = 0.6;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-episode draws for the nominal training family.
struct Randomization {
  std::optional<Range> mean_speed;
  std::optional<Range> area_scale;  // multiplies both area sides
  std::optional<Range> rate;        // replaces every flow rate
};

struct JammerSpec {
  JammerConfig config;
  /// Resolved per episode into `config.follow_node` = source of that flow.
  std::optional<std::size_t> follow_flow_source;
};

enum class AnomalyKind { None, Jammer, SizeShift, MobilityShift, TrafficShift };

struct Anomaly {
  AnomalyKind kind = AnomalyKind::None;
  std::vector<JammerSpec> jammers;  // Jammer
  std::size_t size = 0;             // SizeShift: replacement N
  double multiplier = 1.0;          // MobilityShift / TrafficShift
};

struct ScenarioConfig {
  std::size_t n_nodes = 8;
  Area area{900.0, 900.0};
  double comm_radius = 450.0;
  MobilityConfig mobility;
  std::vector<FlowSpec> flows{FlowSpec{}, FlowSpec{}};
  std::int64_t t_max = 500;
  std::uint64_t seed = 1;
  std::optional<int> ttl;  // default 4 N
  int max_attempts = 4;     // per-hop attempts before a copy nobody accepts is discarded
  std::size_t dpd_capacity = 4096;
  Anomaly anomaly;
  Randomization randomize;

  bool nominal() const { return anomaly.kind == AnomalyKind::None; }

  void validate() const {
    if (n_nodes < 2) throw ConfigError("scenario: N must be >= 2");
    if (!(area.width > 0.0 && area.height > 0.0)) throw ConfigError("scenario: area dimensions must be > 0");
    if (!(comm_radius > 0.0)) throw ConfigError("scenario: comm_radius must be > 0");
    if (!(mobility.memory >= 0.0 && mobility.memory <= 1.0)) throw ConfigError("scenario: mobility.memory must be in [0,1]");
    if (mobility.mean_speed < 0.0 || mobility.sigma_speed < 0.0 || mobility.sigma_heading < 0.0)
      throw ConfigError("scenario: mobility parameters must be non-negative");
    if (t_max <= 0) throw ConfigError("scenario: T_max must be > 0");
    if (ttl && *ttl <= 0) throw ConfigError("scenario: ttl must be > 0");
    if (max_attempts <= 0) throw ConfigError("scenario: max_attempts must be > 0");
    if (dpd_capacity == 0) throw ConfigError("scenario: dpd_capacity must be > 0");
    const std::size_t n_eff = anomaly.kind == AnomalyKind::SizeShift ? anomaly.size : n_nodes;
    for (const auto& f : flows) {
      if (!(f.rate > 0.0 && f.rate <= 1.0)) throw ConfigError("scenario: flow rate must be in (0,1]");
      if ((f.source && *f.source >= n_eff) || (f.destination && *f.destination >= n_eff))
        throw ConfigError("scenario: flow endpoint out of range");
      if (f.source && f.destination && *f.source == *f.destination)
        throw ConfigError("scenario: flow source must differ from destination");
    }
    auto check_range = [](const std::optional<Range>& r, const char* what, double lo_min) {
      if (r && !(r->lo >= lo_min && r->lo <= r->hi))
        throw ConfigError(std::string("scenario.randomize.") + what + ": need " + std::to_string(lo_min) + " <= lo <= hi");
    };
    check_range(randomize.mean_speed, "mean_speed", 0.0);
    check_range(randomize.area_scale, "area_scale", 1e-9);
    check_range(randomize.rate, "rate", 1e-12);
    if (randomize.rate && randomize.rate->hi > 1.0) throw ConfigError("scenario.randomize.rate: hi must be <= 1");
    switch (anomaly.kind) {
      case AnomalyKind::None:
        break;
      case AnomalyKind::Jammer:
        if (anomaly.jammers.empty()) throw ConfigError("scenario.anomaly: jammer anomaly needs at least one jammer");
        for (const auto& j : anomaly.jammers) {
          if (!(j.config.jam_radius > 0.0)) throw ConfigError("scenario.anomaly: jam_radius must be > 0");
          const auto& w = j.config.active_window;
          if (w.first < 0 || w.last > t_max || w.first > w.last)
            throw ConfigError("scenario.anomaly: jammer active_window must lie within [0, T_max]");
          if (j.follow_flow_source && *j.follow_flow_source >= flows.size())
            throw ConfigError("scenario.anomaly: follow_flow_source names a missing flow");
        }
        break;
      case AnomalyKind::SizeShift:
        if (anomaly.size < 2) throw ConfigError("scenario.anomaly: size_shift N must be >= 2");
        break;
      case AnomalyKind::MobilityShift:
      case AnomalyKind::TrafficShift:
        if (!(anomaly.multiplier > 0.0)) throw ConfigError("scenario.anomaly: multiplier must be > 0");
        break;
    }
  }
};

inline const char* to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::None: return "none";
    case AnomalyKind::Jammer: return "jammer";
    case AnomalyKind::SizeShift: return "size_shift";
    case AnomalyKind::MobilityShift: return "mobility_shift";
    case AnomalyKind::TrafficShift: return "traffic_shift";
  }
  return "none";
}

namespace detail {

using nlohmann::json;

inline Range parse_range(const json& j, const char* ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string(ctx) + ": expected [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline JammerSpec parse_jammer(const json& j) {
  using json_util::read_if_present;
  json_util::require_known_keys(j, {"position", "jam_radius", "active_window", "mode", "follow_flow_source"}, "jammer");
  JammerSpec spec;
  if (j.contains("position")) {
    const auto& p = j.at("position");
    if (!p.is_array() || p.size() != 2) throw ConfigError("jammer.position: expected [x, y]");
    spec.config.position = {p[0].get<double>(), p[1].get<double>()};
  }
  read_if_present(j, "jam_radius", spec.config.jam_radius, "jammer");
  if (!j.contains("active_window")) throw ConfigError("jammer: active_window is required");
  const auto& w = j.at("active_window");
  if (!w.is_array() || w.size() != 2) throw ConfigError("jammer.active_window: expected [first, last]");
  spec.config.active_window = {w[0].get<std::int64_t>(), w[1].get<std::int64_t>()};
  std::string mode = "suppress_ack";
  read_if_present(j, "mode", mode, "jammer");
  if (mode == "suppress_ack" || mode == "SUPPRESS_ACK") {
    spec.config.mode = JamMode::SuppressAck;
  } else if (mode == "suppress_all" || mode == "SUPPRESS_ALL") {
    spec.config.mode = JamMode::SuppressAll;
  } else {
    throw ConfigError("jammer.mode: expected suppress_ack or suppress_all");
  }
  if (j.contains("follow_flow_source")) spec.follow_flow_source = j.at("follow_flow_source").get<std::size_t>();
  return spec;
}

}  // namespace detail

/// Parses the `scenario` object. Unknown keys are rejected.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using json_util::read_if_present;
  using json_util::require_known_keys;
  require_known_keys(j, {"N", "area", "comm_radius", "mobility", "flows", "T_max", "jammers", "seed", "ttl",
                         "max_attempts", "dpd_capacity", "anomaly", "randomize"},
                     "scenario");
  ScenarioConfig cfg;
  try {
    read_if_present(j, "N", cfg.n_nodes, "scenario");
    if (j.contains("area")) {
      const auto& a = j.at("area");
      require_known_keys(a, {"width", "height"}, "scenario.area");
      read_if_present(a, "width", cfg.area.width, "scenario.area");
      read_if_present(a, "height", cfg.area.height, "scenario.area");
    }
    read_if_present(j, "comm_radius", cfg.comm_radius, "scenario");
    if (j.contains("mobility")) {
      const auto& m = j.at("mobility");
      require_known_keys(m, {"mean_speed", "memory", "sigma_speed", "sigma_heading"}, "scenario.mobility");
      read_if_present(m, "mean_speed", cfg.mobility.mean_speed, "scenario.mobility");
      read_if_present(m, "memory", cfg.mobility.memory, "scenario.mobility");
      read_if_present(m, "sigma_speed", cfg.mobility.sigma_speed, "scenario.mobility");
      read_if_present(m, "sigma_heading", cfg.mobility.sigma_heading, "scenario.mobility");
    }
    if (j.contains("flows")) {
      const auto& f = j.at("flows");
      cfg.flows.clear();
      if (f.is_object()) {
        // {"count": n, "rate": r} shorthand: n flows with random endpoints.
        require_known_keys(f, {"count", "rate"}, "scenario.flows");
        std::size_t count = 2;
        double rate = 0.6;
        read_if_present(f, "count", count, "scenario.flows");
        read_if_present(f, "rate", rate, "scenario.flows");
        cfg.flows.assign(count, FlowSpec{std::nullopt, std::nullopt, rate});
      } else if (f.is_array()) {
        for (const auto& e : f) {
          require_known_keys(e, {"source", "destination", "rate"}, "scenario.flows[]");
          FlowSpec spec;
          if (e.contains("source")) spec.source = e.at("source").get<NodeId>();
          if (e.contains("destination")) spec.destination = e.at("destination").get<NodeId>();
          read_if_present(e, "rate", spec.rate, "scenario.flows[]");
          cfg.flows.push_back(spec);
        }
      } else {
        throw ConfigError("scenario.flows: expected an object or an array");
      }
    }
    read_if_present(j, "T_max", cfg.t_max, "scenario");
    read_if_present(j, "seed", cfg.seed, "scenario");
    if (j.contains("ttl") && !j.at("ttl").is_null()) cfg.ttl = j.at("ttl").get<int>();
    read_if_present(j, "max_attempts", cfg.max_attempts, "scenario");
    read_if_present(j, "dpd_capacity", cfg.dpd_capacity, "scenario");
    if (j.contains("randomize")) {
      const auto& r = j.at("randomize");
      require_known_keys(r, {"mean_speed", "area_scale", "rate"}, "scenario.randomize");
      if (r.contains("mean_speed")) cfg.randomize.mean_speed = detail::parse_range(r.at("mean_speed"), "randomize.mean_speed");
      if (r.contains("area_scale")) cfg.randomize.area_scale = detail::parse_range(r.at("area_scale"), "randomize.area_scale");
      if (r.contains("rate")) cfg.randomize.rate = detail::parse_range(r.at("rate"), "randomize.rate");
    }
    std::vector<JammerSpec> base_jammers;
    if (j.contains("jammers")) {
      for (const auto& e : j.at("jammers")) base_jammers.push_back(detail::parse_jammer(e));
    }
    if (j.contains("anomaly")) {
      const auto& a = j.at("anomaly");
      require_known_keys(a, {"kind", "jammers", "N", "multiplier"}, "scenario.anomaly");
      std::string kind = "none";
      read_if_present(a, "kind", kind, "scenario.anomaly");
      if (kind == "none") {
        cfg.anomaly.kind = AnomalyKind::None;
      } else if (kind == "jammer") {
        cfg.anomaly.kind = AnomalyKind::Jammer;
        if (a.contains("jammers"))
          for (const auto& e : a.at("jammers")) cfg.anomaly.jammers.push_back(detail::parse_jammer(e));
      } else if (kind == "size_shift") {
        cfg.anomaly.kind = AnomalyKind::SizeShift;
        read_if_present(a, "N", cfg.anomaly.size, "scenario.anomaly");
      } else if (kind == "mobility_shift") {
        cfg.anomaly.kind = AnomalyKind::MobilityShift;
        read_if_present(a, "multiplier", cfg.anomaly.multiplier, "scenario.anomaly");
      } else if (kind == "traffic_shift") {
        cfg.anomaly.kind = AnomalyKind::TrafficShift;
        read_if_present(a, "multiplier", cfg.anomaly.multiplier, "scenario.anomaly");
      } else {
        throw ConfigError("scenario.anomaly.kind: unknown kind '" + kind + "'");
      }
    }
    // Top-level jammers are shorthand for a jammer anomaly; a scenario carries one anomaly kind at most.
    if (!base_jammers.empty()) {
      if (cfg.anomaly.kind != AnomalyKind::None && cfg.anomaly.kind != AnomalyKind::Jammer)
        throw ConfigError("scenario: jammers cannot be combined with a " + std::string(to_string(cfg.anomaly.kind)) +
                          " anomaly");
      cfg.anomaly.kind = AnomalyKind::Jammer;
      cfg.anomaly.jammers.insert(cfg.anomaly.jammers.end(), base_jammers.begin(), base_jammers.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

/// Everything one episode needs, with randomization and the anomaly applied.
struct EpisodeParams {
  std::size_t n_nodes = 0;
  Area area;
  MobilityConfig mobility;
  ChannelModel channel;
  std::vector<TrafficFlow> flows;
  std::int64_t t_max = 0;
  int ttl = 0;
  int max_attempts = 4;
  std::size_t dpd_capacity = 4096;
  std::uint64_t seed = 0;  // drives the simulation stream
  bool nominal = true;
};

/// Resolves episode `index` of a scenario family. Nominal and anomalous variants with equal
/// (seed, index) share every random draw that does not depend on N.
inline EpisodeParams resolve_episode(const ScenarioConfig& cfg, std::uint64_t index) {
  const std::uint64_t episode_seed = derive_seed(cfg.seed, index);
  Rng setup(derive_seed(episode_seed, 0));

  EpisodeParams ep;
  ep.n_nodes = cfg.anomaly.kind == AnomalyKind::SizeShift ? cfg.anomaly.size : cfg.n_nodes;
  ep.area = cfg.area;
  ep.mobility = cfg.mobility;
  ep.channel.comm_radius = cfg.comm_radius;
  ep.t_max = cfg.t_max;
  ep.dpd_capacity = cfg.dpd_capacity;
  ep.max_attempts = cfg.max_attempts;
  ep.seed = derive_seed(episode_seed, 1);
  ep.nominal = cfg.nominal();

  // Always three draws so the stream stays aligned whatever is randomized.
  const double u_speed = uniform01(setup);
  const double u_area = uniform01(setup);
  const double u_rate = uniform01(setup);
  auto lerp = [](const Range& r, double u) { return r.lo + (r.hi - r.lo) * u; };
  if (cfg.randomize.mean_speed) ep.mobility.mean_speed = lerp(*cfg.randomize.mean_speed, u_speed);
  if (cfg.randomize.area_scale) {
    const double s = lerp(*cfg.randomize.area_scale, u_area);
    ep.area.width *= s;
    ep.area.height *= s;
  }

  for (std::size_t f = 0; f < cfg.flows.size(); ++f) {
    const auto& spec = cfg.flows[f];
    TrafficFlow flow;
    flow.flow_id = static_cast<std::uint32_t>(f);
    const NodeId s_draw = std::uniform_int_distribution<NodeId>(0, ep.n_nodes - 1)(setup);
    const NodeId d_draw = std::uniform_int_distribution<NodeId>(0, ep.n_nodes - 2)(setup);
    flow.source = spec.source.value_or(s_draw);
    if (spec.destination) {
      flow.destination = *spec.destination;
    } else {
      flow.destination = d_draw >= flow.source ? d_draw + 1 : d_draw;
    }
    if (flow.source == flow.destination) flow.destination = (flow.source + 1) % ep.n_nodes;
    flow.rate = cfg.randomize.rate ? lerp(*cfg.randomize.rate, u_rate) : spec.rate;
    ep.flows.push_back(flow);
  }

  switch (cfg.anomaly.kind) {
    case AnomalyKind::None:
    case AnomalyKind::SizeShift:
      break;
    case AnomalyKind::Jammer:
      for (const auto& js : cfg.anomaly.jammers) {
        JammerConfig j = js.config;
        if (js.follow_flow_source) j.follow_node = ep.flows.at(*js.follow_flow_source).source;
        ep.channel.jammers.push_back(j);
      }
      break;
    case AnomalyKind::MobilityShift:
      ep.mobility.mean_speed *= cfg.anomaly.multiplier;
      break;
    case AnomalyKind::TrafficShift:
      for (auto& f : ep.flows) f.rate = std::min(1.0, f.rate * cfg.anomaly.multiplier);
      break;
  }

  ep.ttl = cfg.ttl.value_or(static_cast<int>(4 * ep.n_nodes));
  return ep;
}

}  // namespace deepadmr::sim
