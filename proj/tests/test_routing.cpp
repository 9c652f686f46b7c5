#include <gtest/gtest.h>

#include "deepadmr/routing/action.hpp"
#include "deepadmr/routing/cq_tables.hpp"
#include "deepadmr/routing/observation.hpp"
#include "deepadmr/routing/reward.hpp"

using namespace deepadmr;
using namespace deepadmr::routing;

TEST(Action, FlatIndexRoundTrip) {
  EXPECT_EQ(Action::from_index(0), Action::broadcast());
  EXPECT_EQ(Action::from_index(3), Action::unicast(2));
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(Action::from_index(i).index(), i);
  EXPECT_EQ(action_count(8), 9u);
}

TEST(Reward, SingleIndicators) {
  const RewardWeights ones{1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(compute_reward({1, false}, ones), 1.0);
  EXPECT_DOUBLE_EQ(compute_reward({0, false}, ones), -1.0);
}

TEST(Reward, SurplusAcksAndDelivery) {
  EXPECT_DOUBLE_EQ(compute_reward({3, true}, {1.0, 0.5, 1.0, 2.0}), 1.0);
  EXPECT_THROW(compute_reward({-1, false}, {}), std::invalid_argument);
}

TEST(Reward, DefaultWeights) {
  const RewardWeights w;
  EXPECT_DOUBLE_EQ(w.w1, 1.0);
  EXPECT_DOUBLE_EQ(w.w2, 1.0);
  EXPECT_DOUBLE_EQ(w.w3, 1.0);
  EXPECT_DOUBLE_EQ(w.w4, 5.0);
}

TEST(CqTables, InitialState) {
  CqTables t(4, 0);
  EXPECT_DOUBLE_EQ(t.q(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(t.q(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(t.c(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(t.dc(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(t.advertised_q(0, {}), 1.0);
}

TEST(CqTables, AckFromDestination) {
  CqParams p;
  p.beta_q = 0.5;
  CqTables t(4, 0, p);
  t.set(3, 3, 0.0, 0.5);
  t.update(std::vector<AckFeedback>{{3, true, 1.0}}, 3);
  EXPECT_NEAR(t.q(3, 3), 0.5 * (1.0 + 0.95 * 1.0), 1e-12);
  EXPECT_NEAR(t.c(3, 3), 0.8 * 0.5 + 0.2, 1e-12);
  t.set(3, 3, 0.9, 0.5);
  t.update(std::vector<AckFeedback>{{3, true, 1.0}}, 3);
  EXPECT_DOUBLE_EQ(t.q(3, 3), 1.0);  // 0.45 + 0.975 clamps
}

TEST(CqTables, MissedAckDecaysConfidence) {
  CqParams p;
  p.beta_c = 0.25;
  CqTables t(4, 0, p);
  t.set(1, 2, 0.4, 0.8);
  const std::vector<AckFeedback> fb{{1, false, 0.0}};
  t.update(fb, 2);
  EXPECT_NEAR(t.c(1, 2), 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(t.q(1, 2), 0.4);
}

TEST(CqTables, RelayUsesAdvertisement) {
  CqTables t(4, 0);
  const std::vector<AckFeedback> fb{{1, true, 0.8}};
  t.update(fb, 3);
  EXPECT_NEAR(t.q(1, 3), 0.3 * 0.95 * 0.8, 1e-12);
  EXPECT_NEAR(t.dq(1, 3), 0.3 * 0.95 * 0.8, 1e-12);
}

TEST(CqTables, TickZeroesDeltas) {
  CqTables t(3, 0);
  t.update(std::vector<AckFeedback>{{1, true, 0.5}}, 2);
  EXPECT_NE(t.dq(1, 2), 0.0);
  const double q = t.q(1, 2);
  t.tick();
  EXPECT_DOUBLE_EQ(t.dq(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(t.dc(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(t.q(1, 2), q);
}

TEST(CqTables, EntriesStayInUnitInterval) {
  Rng rng(4);
  CqTables t(5, 0, {0.9, 0.9, 0.99, 0.5});
  for (int i = 0; i < 2000; ++i) {
    const NodeId j = 1 + rng() % 4, d = rng() % 5;
    t.update(std::vector<AckFeedback>{{j, rng() % 2 == 0, uniform01(rng)}}, d);
    ASSERT_GE(t.q(j, d), 0.0);
    ASSERT_LE(t.q(j, d), 1.0);
    ASSERT_GE(t.c(j, d), 0.0);
    ASSERT_LE(t.c(j, d), 1.0);
  }
}

TEST(Observation, NoNeighbors) {
  CqTables t(4, 0);
  const auto o = build_observation(t, {}, std::nullopt, 2, 8);
  EXPECT_EQ(o.features.size(), observation_size(8));
  EXPECT_EQ(observation_size(8), 41u);
  for (double v : o.features) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(o.action_mask[0], 1);
  for (std::size_t i = 1; i < o.action_mask.size(); ++i) EXPECT_EQ(o.action_mask[i], 0);
}

TEST(Observation, LayoutAndMask) {
  CqTables t(6, 0);
  t.set(2, 5, 0.3, 0.5);
  t.set(4, 5, 0.7, 0.5);
  const std::vector<NodeId> nb{2, 4};
  const auto o = build_observation(t, nb, Action::unicast(1), 5, 4);
  const std::vector<double> q(o.features.begin() + 4, o.features.begin() + 8);
  EXPECT_EQ(q, (std::vector<double>{0.3, 0.7, 0, 0}));
  EXPECT_EQ(o.action_mask, (std::vector<std::uint8_t>{1, 1, 1, 0, 0}));
  EXPECT_EQ(o.features[16 + 2], 1.0);  // one-hot of unicast slot 1 = flat index 2
  EXPECT_DOUBLE_EQ(o.features[0], 0.5);
}

TEST(Observation, RejectsBadInputs) {
  CqTables t(6, 0);
  const std::vector<NodeId> unsorted{4, 2};
  EXPECT_THROW(build_observation(t, unsorted, std::nullopt, 5, 4), std::invalid_argument);
  const std::vector<NodeId> many{1, 2, 3};
  EXPECT_THROW(build_observation(t, many, std::nullopt, 5, 2), std::invalid_argument);
}

TEST(Observation, NeighborSelectionKeepsNearest) {
  std::vector<sim::Vec2> pos{{0, 0}, {5, 0}, {1, 0}, {3, 0}, {2, 0}};
  const auto links = sim::compute_links(pos, 10.0);
  const auto nb = select_neighbors(0, links, pos, 2);
  EXPECT_EQ(nb, (std::vector<NodeId>{2, 4}));
  const auto all = select_neighbors(0, links, pos, 8);
  EXPECT_EQ(all, (std::vector<NodeId>{1, 2, 3, 4}));
}

TEST(Observation, UnicastRequestMapsSlotToNode) {
  CqTables t(6, 0);
  const std::vector<NodeId> nb{2, 4};
  const auto o = build_observation(t, nb, std::nullopt, 5, 4);
  const auto r = to_request(Action::unicast(1), o);
  EXPECT_FALSE(r.broadcast);
  EXPECT_EQ(r.target, 4u);
  EXPECT_THROW(to_request(Action::unicast(2), o), std::invalid_argument);
  EXPECT_TRUE(to_request(Action::broadcast(), o).broadcast);
}
