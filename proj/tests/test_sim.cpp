#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "deepadmr/sim/channel.hpp"
#include "deepadmr/sim/dpd.hpp"
#include "deepadmr/sim/mobility.hpp"
#include "deepadmr/sim/network.hpp"
#include "deepadmr/sim/packet.hpp"
#include "deepadmr/sim/scenario.hpp"
#include "deepadmr/sim/transmit.hpp"

using namespace deepadmr;
using namespace deepadmr::sim;

// ---------------------------------------------------------------- mobility

TEST(Mobility, FullMemoryKeepsSpeedAndHeading) {
  MobilityState s{{100, 100}, 3.0, 0.7, 1.0, -1.0, 1.0};
  const auto n = step_mobility(s, {2.0, 2.0}, {1000, 1000}, 1.7, -0.4);
  EXPECT_DOUBLE_EQ(n.speed, 3.0);
  EXPECT_DOUBLE_EQ(n.heading, 0.7);
}

TEST(Mobility, ZeroMemoryCollapsesToMean) {
  MobilityState s{{500, 500}, 3.0, 0.7, 2.0, 0.25, 0.0};
  const auto n = step_mobility(s, {1.0, 1.0}, {1000, 1000}, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(n.speed, 2.0);
  EXPECT_DOUBLE_EQ(n.heading, 0.25);
  EXPECT_NEAR(n.position.x, 500 + 2.0 * std::cos(0.25), 1e-12);
}

TEST(Mobility, HalfMemorySpeedUpdate) {
  MobilityState s{{500, 500}, 4.0, 0.0, 2.0, 0.0, 0.5};
  const auto n = step_mobility(s, {1.0, 0.0}, {1000, 1000}, 0.3, 0.0);
  EXPECT_NEAR(n.speed, 0.5 * 4 + 0.5 * 2 + std::sqrt(0.75) * 0.3, 1e-12);
  EXPECT_NEAR(n.speed, 3.2598, 1e-4);
}

TEST(Mobility, StaysInsideAreaAndReflects) {
  Rng rng(5);
  const Area area{200, 100};
  MobilityState s{{190, 50}, 20.0, 0.0, 20.0, 0.0, 0.9};
  const auto first = step_mobility(s, {0.0, 0.0}, area, 0.0, 0.0);
  EXPECT_TRUE(area.contains(first.position));
  EXPECT_NEAR(first.position.x, 190.0, 1e-9);  // 10 past the wall, mirrored back
  EXPECT_GT(std::abs(first.heading), std::numbers::pi / 2);
  for (int i = 0; i < 5000; ++i) {
    s = step_mobility(s, {3.0, 0.8}, area, rng);
    ASSERT_TRUE(area.contains(s.position));
    ASSERT_GE(s.speed, 0.0);
  }
}

// ---------------------------------------------------------------- links

TEST(Links, ClosedDiskBoundary) {
  std::vector<Vec2> p{{0, 0}, {100, 0}};
  EXPECT_TRUE(compute_links(p, 100.0).linked(0, 1));
  p[1].x = 100.0 + 1e-9;
  EXPECT_FALSE(compute_links(p, 100.0).linked(0, 1));
}

TEST(Links, LineIsAPathGraph) {
  std::vector<Vec2> p{{0, 0}, {50, 0}, {100, 0}, {150, 0}};
  const auto g = compute_links(p, 50.0);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.linked(1, 2));
  EXPECT_FALSE(g.linked(0, 2));
}

TEST(Links, Symmetric) {
  Rng rng(9);
  std::vector<Vec2> p(30);
  for (auto& v : p) v = {uniform01(rng) * 500, uniform01(rng) * 500};
  const auto g = compute_links(p, 150.0);
  for (NodeId a = 0; a < p.size(); ++a)
    for (NodeId b = 0; b < p.size(); ++b) EXPECT_EQ(g.linked(a, b), g.linked(b, a));
}

// ---------------------------------------------------------------- transmit

struct Fixture {
  std::vector<Vec2> pos{{0, 0}, {10, 0}, {0, 10}, {-10, 0}, {500, 500}};
  LinkGraph links = compute_links(pos, 20.0);
  ChannelModel ch{20.0, {}};
  std::vector<DpdCache> dpd = std::vector<DpdCache>(5);
  Packet pkt{.packet_id = 1, .source = 0, .destination = 1, .ttl = 8};
};

TEST(Transmit, UnicastToFreshNeighbor) {
  Fixture f;
  const auto out = transmit(0, TxRequest::to(1), f.pkt, f.links, f.ch, f.pos, 0, f.dpd);
  EXPECT_EQ(out.ack_count, 1);
  EXPECT_TRUE(out.reached_destination);
  EXPECT_TRUE(out.destination_acked);
  EXPECT_TRUE(f.dpd[1].contains(1));
}

TEST(Transmit, BroadcastCountsEveryFreshNeighbor) {
  Fixture f;
  const auto out = transmit(0, TxRequest::to_all(), f.pkt, f.links, f.ch, f.pos, 0, f.dpd);
  EXPECT_EQ(out.ack_count, 3);
  EXPECT_EQ(out.receptions.size(), 3u);
}

TEST(Transmit, DuplicatesAreNotAcked) {
  Fixture f;
  f.dpd[2].insert(1);
  const auto out = transmit(0, TxRequest::to_all(), f.pkt, f.links, f.ch, f.pos, 0, f.dpd);
  EXPECT_EQ(out.ack_count, 2);
  const auto again = transmit(0, TxRequest::to(1), f.pkt, f.links, f.ch, f.pos, 1, f.dpd);
  EXPECT_EQ(again.ack_count, 0);
  EXPECT_TRUE(again.receptions[0].duplicate);
  EXPECT_FALSE(again.destination_acked);
}

TEST(Transmit, UnlinkedTargetGetsNothing) {
  Fixture f;
  const auto out = transmit(0, TxRequest::to(4), f.pkt, f.links, f.ch, f.pos, 0, f.dpd);
  EXPECT_EQ(out.ack_count, 0);
  EXPECT_FALSE(out.receptions[0].linked);
  EXPECT_FALSE(f.dpd[4].contains(1));
}

TEST(Transmit, SuppressAckJammerHidesAcksButDelivers) {
  Fixture f;
  f.ch.jammers.push_back({{0, 0}, 5.0, {0, 10}, JamMode::SuppressAck, std::nullopt});
  const auto out = transmit(0, TxRequest::to(1), f.pkt, f.links, f.ch, f.pos, 3, f.dpd);
  EXPECT_EQ(out.ack_count, 0);
  EXPECT_TRUE(out.receptions[0].accepted);
  EXPECT_TRUE(out.reached_destination);
  EXPECT_FALSE(out.destination_acked);
  // Inactive outside its window.
  Packet other = f.pkt;
  other.packet_id = 2;
  EXPECT_EQ(transmit(0, TxRequest::to(1), other, f.links, f.ch, f.pos, 11, f.dpd).ack_count, 1);
}

TEST(Transmit, SuppressAllJammerBlocksReception) {
  Fixture f;
  f.ch.jammers.push_back({{10, 0}, 2.0, {0, 10}, JamMode::SuppressAll, std::nullopt});
  const auto out = transmit(0, TxRequest::to_all(), f.pkt, f.links, f.ch, f.pos, 0, f.dpd);
  EXPECT_EQ(out.ack_count, 2);
  EXPECT_FALSE(f.dpd[1].contains(1));
}

TEST(Transmit, FollowingJammerTracksNode) {
  Fixture f;
  f.ch.jammers.push_back({{0, 0}, 1.0, {0, 10}, JamMode::SuppressAck, NodeId{3}});
  EXPECT_TRUE(f.ch.ack_suppressed(3, f.pos, 0));
  EXPECT_FALSE(f.ch.ack_suppressed(0, f.pos, 0));
}

// ---------------------------------------------------------------- traffic, DPD

TEST(Traffic, RateOneEmitsEverySlot) {
  Rng rng(1);
  PacketIdSource ids;
  std::vector<TrafficFlow> flows{{0, 0, 1, 1.0}};
  for (int t = 0; t < 50; ++t) EXPECT_EQ(inject_traffic(flows, t, 10, ids, rng).size(), 1u);
  EXPECT_EQ(ids.issued(), 50u);
}

TEST(Traffic, BinomialCount) {
  Rng rng(2);
  PacketIdSource ids;
  std::vector<TrafficFlow> flows{{0, 0, 1, 0.25}};
  std::size_t count = 0;
  for (int t = 0; t < 10000; ++t) count += inject_traffic(flows, t, 10, ids, rng).size();
  const double sd = std::sqrt(10000 * 0.25 * 0.75);
  EXPECT_NEAR(static_cast<double>(count), 2500.0, 3 * sd);
}

TEST(Traffic, NoFlowsNoPackets) {
  Rng rng(3);
  PacketIdSource ids;
  EXPECT_TRUE(inject_traffic({}, 0, 10, ids, rng).empty());
}

TEST(Dpd, FifoEviction) {
  DpdCache c(3);
  EXPECT_TRUE(c.insert(1));
  EXPECT_FALSE(c.insert(1));
  c.insert(2);
  c.insert(3);
  c.insert(4);
  EXPECT_FALSE(c.contains(1));
  EXPECT_TRUE(c.contains(4));
  EXPECT_EQ(c.size(), 3u);
  EXPECT_THROW(DpdCache(0), std::invalid_argument);
}

// ---------------------------------------------------------------- network

namespace {

struct FloodRun {
  EventLog log;
  NetworkMetrics metrics;
  std::vector<PacketFate> fates;
};

/// Runs an episode in which every holder broadcasts.
FloodRun flood(const EpisodeParams& p) {
  FloodRun run;
  Network net(p, &run.log);
  while (!net.finished()) {
    net.begin_slot();
    for (NodeId n = 0; n < net.size(); ++n)
      if (net.head(n)) net.transmit(n, TxRequest::to_all());
    net.end_slot();
  }
  run.metrics = net.metrics();
  for (PacketId id = 0; id < net.packets_issued(); ++id) run.fates.push_back(net.fate(id));
  return run;
}

ScenarioConfig small_scenario() {
  ScenarioConfig s;
  s.t_max = 200;
  s.seed = 42;
  return s;
}

}  // namespace

TEST(Network, DeterministicTrace) {
  const auto p = resolve_episode(small_scenario(), 3);
  EXPECT_EQ(flood(p).log, flood(p).log);
}

TEST(Network, ConservationOfPackets) {
  const auto run = flood(resolve_episode(small_scenario(), 1));
  std::size_t delivered = 0;
  for (auto f : run.fates) delivered += f == PacketFate::Delivered;
  EXPECT_EQ(delivered, run.metrics.delivered);
  EXPECT_EQ(run.fates.size(), run.metrics.injected);
  EXPECT_GT(run.metrics.injected, 0u);
}

TEST(Network, DpdSoundness) {
  const auto run = flood(resolve_episode(small_scenario(), 2));
  std::set<std::pair<NodeId, PacketId>> received;
  for (const auto& e : run.log) {
    if (e.kind == EventKind::Receive) {
      EXPECT_TRUE(received.insert({e.node, e.packet}).second) << "node " << e.node << " took packet " << e.packet << " twice";
    }
  }
}

TEST(Network, JammerNeverIncreasesAcks) {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Vec2> pos(8);
    for (auto& v : pos) v = {uniform01(rng) * 300, uniform01(rng) * 300};
    const auto links = compute_links(pos, 150.0);
    ChannelModel clear{150.0, {}}, jammed{150.0, {}};
    const JamMode mode = trial % 2 ? JamMode::SuppressAck : JamMode::SuppressAll;
    jammed.jammers.push_back({{uniform01(rng) * 300, uniform01(rng) * 300}, 20 + uniform01(rng) * 150, {0, 5}, mode, std::nullopt});
    std::vector<DpdCache> d1(8), d2(8);
    for (NodeId n = 0; n < 8; ++n)
      if (rng() % 3 == 0) {
        d1[n].insert(1);
        d2[n].insert(1);
      }
    const NodeId sender = rng() % 8;
    const TxRequest req = trial % 3 ? TxRequest::to_all() : TxRequest::to(rng() % 8);
    Packet pkt{.packet_id = 1, .source = sender, .destination = (sender + 1) % 8, .ttl = 5};
    const auto a = transmit(sender, req, pkt, links, clear, pos, 2, d1);
    const auto b = transmit(sender, req, pkt, links, jammed, pos, 2, d2);
    ASSERT_LE(b.ack_count, a.ack_count);
  }
}

TEST(Network, NominalRunsHaveNoJammerEvents) {
  const auto run = flood(resolve_episode(small_scenario(), 5));
  for (const auto& e : run.log) EXPECT_FALSE(e.jammer_related());
}

TEST(Network, RetryLimitDropsStuckCopies) {
  auto sc = small_scenario();
  sc.comm_radius = 1.0;  // nobody is ever linked
  sc.max_attempts = 3;
  const auto run = flood(resolve_episode(sc, 0));
  std::size_t retries = 0;
  for (const auto& e : run.log) retries += e.kind == EventKind::DropRetry;
  EXPECT_GT(retries, 0u);
  EXPECT_EQ(run.metrics.delivered, 0u);
  for (auto f : run.fates) EXPECT_NE(f, PacketFate::Delivered);
}

// ---------------------------------------------------------------- scenario

TEST(Scenario, ParsesAndRejectsUnknownKeys) {
  const auto j = nlohmann::json::parse(R"({"N": 6, "T_max": 100, "flows": {"count": 3, "rate": 0.5},
    "mobility": {"mean_speed": 2}, "randomize": {"rate": [0.2, 0.4]}})");
  const auto s = scenario_from_json(j);
  EXPECT_EQ(s.n_nodes, 6u);
  EXPECT_EQ(s.flows.size(), 3u);
  ASSERT_TRUE(s.randomize.rate);
  EXPECT_DOUBLE_EQ(s.randomize.rate->hi, 0.4);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"nodes": 6})")), ConfigError);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"N": 1})")), ConfigError);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"anomaly": {"kind": "meteor"}})")), ConfigError);
}

TEST(Scenario, JammerAnomalyParses) {
  const auto s = scenario_from_json(nlohmann::json::parse(
      R"({"anomaly": {"kind": "jammer", "jammers": [{"jam_radius": 50, "active_window": [10, 20], "follow_flow_source": 1}]}})"));
  EXPECT_EQ(s.anomaly.kind, AnomalyKind::Jammer);
  const auto ep = resolve_episode(s, 0);
  ASSERT_EQ(ep.channel.jammers.size(), 1u);
  EXPECT_EQ(*ep.channel.jammers[0].follow_node, ep.flows[1].source);
  EXPECT_FALSE(ep.nominal);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(
                   R"({"T_max": 50, "anomaly": {"kind": "jammer", "jammers": [{"jam_radius": 5, "active_window": [10, 60]}]}})")),
               ConfigError);
}

TEST(Scenario, MatchedEpisodesShareDraws) {
  ScenarioConfig nominal;
  nominal.seed = 7;
  auto shifted = nominal;
  shifted.anomaly.kind = AnomalyKind::MobilityShift;
  shifted.anomaly.multiplier = 3.0;
  const auto a = resolve_episode(nominal, 5), b = resolve_episode(shifted, 5);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.flows[0].source, b.flows[0].source);
  EXPECT_DOUBLE_EQ(b.mobility.mean_speed, 3.0 * a.mobility.mean_speed);
  EXPECT_NE(resolve_episode(nominal, 6).seed, a.seed);
}

TEST(Scenario, RandomizationStaysInRange) {
  ScenarioConfig s;
  s.randomize.mean_speed = Range{3, 5};
  s.randomize.rate = Range{0.4, 0.8};
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto ep = resolve_episode(s, i);
    EXPECT_GE(ep.mobility.mean_speed, 3.0);
    EXPECT_LE(ep.mobility.mean_speed, 5.0);
    for (const auto& f : ep.flows) {
      EXPECT_GE(f.rate, 0.4);
      EXPECT_LE(f.rate, 0.8);
      EXPECT_NE(f.source, f.destination);
    }
  }
}

TEST(Scenario, SizeShiftAndDefaults) {
  ScenarioConfig s;
  s.anomaly.kind = AnomalyKind::SizeShift;
  s.anomaly.size = 20;
  const auto ep = resolve_episode(s, 0);
  EXPECT_EQ(ep.n_nodes, 20u);
  EXPECT_EQ(ep.ttl, 80);
  EXPECT_EQ(ep.dpd_capacity, 4096u);
}
