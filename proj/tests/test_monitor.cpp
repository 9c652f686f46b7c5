#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "deepadmr/common/random.hpp"
#include "deepadmr/monitor/detector.hpp"

using namespace deepadmr;
using namespace deepadmr::monitor;

TEST(TdError, Examples) {
  EXPECT_DOUBLE_EQ(td_error(0.0, 1.0, 0.0, 0.9, false), -1.0);
  EXPECT_DOUBLE_EQ(td_error(1.0, 1.0, 5.0, 0.9, true), 0.0);
  EXPECT_NEAR(td_error(0.5, 0.2, 0.1, 0.85, false), 0.215, 1e-12);
}

// ---------------------------------------------------------------- kNN

TEST(Knn, OnlineExample) {
  const std::vector<double> pts{0, 1, 2};
  EXPECT_DOUBLE_EQ(kth_nearest_sorted(pts, 5.0, 2), 4.0);
  EXPECT_DOUBLE_EQ(kth_nearest_sorted(pts, 1.0, 1), 0.0);  // a point equal to a calibration value
}

TEST(Knn, LeaveOneOutExample) {
  const std::vector<double> pts{0, 1, 2};
  const auto s = loo_knn_sorted(pts, 1);
  EXPECT_EQ(s, (std::vector<double>{1, 1, 1}));
  const auto s2 = loo_knn_sorted(pts, 2);
  EXPECT_EQ(s2, (std::vector<double>{2, 1, 2}));
}

TEST(Knn, SortedMatchesBruteForceWithTies) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> pts(40);
    for (auto& p : pts) p = std::round(standard_normal(rng) * 3) / 2;
    std::sort(pts.begin(), pts.end());
    for (std::size_t k = 1; k <= 6; ++k) {
      const auto loo = loo_knn_sorted(pts, k);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double x[1] = {pts[i]};
        EXPECT_EQ(loo[i], kth_nearest_brute(pts, 1, x, k, i));
      }
      const double q[1] = {standard_normal(rng) * 3};
      EXPECT_EQ(kth_nearest_sorted(pts, q[0], k), kth_nearest_brute(pts, 1, q, k));
    }
  }
}

// ---------------------------------------------------------------- eCDF

TEST(TailEcdf, Examples) {
  const std::vector<double> s{1, 2, 3, 4};
  TailEcdf e(s);
  EXPECT_DOUBLE_EQ(e.tail_probability(2.5), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(e.tail_probability(100.0), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(e.tail_probability(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(e.tail_probability(2.0), 4.0 / 5.0);  // ties count as >=
  EXPECT_THROW(TailEcdf(std::vector<double>{}), std::invalid_argument);
}

// ---------------------------------------------------------------- CUSUM

TEST(Cusum, LogUnlikelihoodExamples) {
  EXPECT_DOUBLE_EQ(log_unlikelihood(0.05, 0.05, 0.001), 0.0);
  EXPECT_NEAR(log_unlikelihood(0.005, 0.05, 0.001), std::log(10.0), 1e-12);
  EXPECT_NEAR(log_unlikelihood(1e-9, 0.05, 1e-4), std::log(500.0), 1e-12);
  EXPECT_LT(log_unlikelihood(0.5, 0.05, 0.001), 0.0);
}

TEST(Cusum, FloorsAtZero) {
  DetectorState s;
  cusum_step(s, -3.0, 5.0, 0);
  EXPECT_EQ(s.g, 0.0);
  cusum_step(s, 1.0, 5.0, 1);
  cusum_step(s, -0.4, 5.0, 2);
  EXPECT_DOUBLE_EQ(s.g, 0.6);
}

TEST(Cusum, TraceAndFirstCrossing) {
  DetectorState s;
  std::vector<double> gs;
  for (int t = 0; t < 3; ++t) {
    cusum_step(s, static_cast<double>(t + 1), 5.0, t);
    gs.push_back(s.g);
  }
  EXPECT_EQ(gs, (std::vector<double>{1, 3, 6}));
  EXPECT_EQ(s.alarm_slot, 2);
  cusum_step(s, -10.0, 5.0, 3);
  cusum_step(s, 6.0, 5.0, 4);
  EXPECT_EQ(s.alarm_slot, 2);  // first crossing is kept
}

TEST(Cusum, HistoryIsBounded) {
  DetectorState s;
  s.history_capacity = 3;
  for (int t = 0; t < 10; ++t) cusum_step(s, 0.5, 0.1, 5.0, t);
  ASSERT_EQ(s.history.size(), 3u);
  EXPECT_EQ(s.history.front().slot, 7);
  EXPECT_DOUBLE_EQ(s.history.back().g, 1.0);
}

TEST(DetectorConfig, Validation) {
  DetectorConfig c;
  EXPECT_NO_THROW(c.validate(100));
  EXPECT_THROW(c.validate(5), std::invalid_argument);  // k >= M
  c.p_floor = 0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  DetectorConfig d;
  EXPECT_DOUBLE_EQ(d.floor_for(99), 0.01);
  EXPECT_THROW(d.validate(10), std::invalid_argument);  // 1/11 > alpha
}

// ---------------------------------------------------------------- calibration

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = standard_normal(rng);
  return v;
}

}  // namespace

TEST(Calibration, PermutationInvariant) {
  auto pts = normals(200, 2);
  CalibrationSet a(pts, 1, 5);
  std::reverse(pts.begin(), pts.end());
  std::rotate(pts.begin(), pts.begin() + 37, pts.end());
  CalibrationSet b(pts, 1, 5);
  EXPECT_EQ(a.knn_stats(), b.knn_stats());
  EXPECT_EQ(a.statistic(std::vector<double>{0.3}), b.statistic(std::vector<double>{0.3}));
}

TEST(Calibration, WindowModeMatchesBruteForce) {
  const auto pts = normals(300, 3);  // 100 points of width 3
  CalibrationSet c(pts, 3, 4);
  ASSERT_EQ(c.size(), 100u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j == i) continue;
      double s = 0;
      for (std::size_t w = 0; w < 3; ++w) s += std::pow(c.point(i)[w] - c.point(j)[w], 2);
      d.push_back(std::sqrt(s));
    }
    std::sort(d.begin(), d.end());
    EXPECT_NEAR(c.knn_stats()[i], d[3], 1e-12);
  }
  EXPECT_THROW(c.statistic(std::vector<double>{0.0}), std::invalid_argument);
}

TEST(Calibration, RoundTripAndRejection) {
  CalibrationSet c(normals(60, 4), 2, 3);
  std::stringstream s;
  c.write(s);
  const auto back = CalibrationSet::read(s);
  EXPECT_EQ(back.knn_stats(), c.knn_stats());
  EXPECT_EQ(std::vector<double>(back.points().begin(), back.points().end()),
            std::vector<double>(c.points().begin(), c.points().end()));
  EXPECT_EQ(back.window(), 2u);
  EXPECT_EQ(back.k(), 3u);

  std::stringstream bad_header("something 1\n");
  EXPECT_THROW(CalibrationSet::read(bad_header), std::runtime_error);
  std::string text = s.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(CalibrationSet::read(truncated), std::runtime_error);
  EXPECT_THROW(CalibrationSet(normals(5, 1), 1, 5), std::invalid_argument);
  EXPECT_THROW(CalibrationSet(normals(5, 1), 2, 1), std::invalid_argument);
}

TEST(Calibration, NominalPValuesAreRoughlyUniform) {
  CalibrationSet c(normals(500, 5), 1, 5);
  const auto test = normals(4000, 6);
  std::size_t below = 0;
  for (double x : test) below += c.p_value(c.statistic(std::vector<double>{x})) <= 0.1;
  EXPECT_NEAR(static_cast<double>(below) / test.size(), 0.1, 0.03);
}

// ---------------------------------------------------------------- detector

TEST(Detector, NonNegativeAndOutliersRaiseEvidence) {
  CalibrationSet c(normals(300, 7), 1, 5);
  DetectorConfig cfg;
  NodeDetector d(0, c, cfg);
  const auto xs = normals(100, 8);
  double prev = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    auto row = d.observe(static_cast<std::int64_t>(t), xs[t]);
    ASSERT_TRUE(row);
    EXPECT_GE(row->g, 0.0);
    prev = row->g;
  }
  for (int t = 100; t < 110; ++t) {
    auto row = d.observe(t, 50.0);
    EXPECT_GT(row->g, prev);
    EXPECT_NEAR(row->ell, std::log(cfg.alpha * 301.0), 1e-12);
    prev = row->g;
  }
  EXPECT_TRUE(d.state().alarm_slot);
}

TEST(Detector, WindowFillsBeforeScoring) {
  CalibrationSet c(normals(300, 9), 3, 5);
  DetectorConfig cfg;
  cfg.window = 3;
  NodeDetector d(0, c, cfg);
  EXPECT_FALSE(d.observe(0, 0.1));
  EXPECT_FALSE(d.observe(1, 0.2));
  EXPECT_TRUE(d.observe(2, 0.3));
}

TEST(Detector, RejectsMismatchedCalibration) {
  CalibrationSet c(normals(300, 10), 1, 5);
  DetectorConfig cfg;
  cfg.k = 3;
  EXPECT_THROW(NodeDetector(0, c, cfg), std::invalid_argument);
  cfg.k = 5;
  cfg.window = 2;
  EXPECT_THROW(NodeDetector(0, c, cfg), std::invalid_argument);
}

TEST(Detector, AggregateHoldsLastValue) {
  std::vector<TraceRow> rows(3);
  rows[0].slot = 1;
  rows[0].node = 0;
  rows[0].g = 2.0;
  rows[1].slot = 3;
  rows[1].node = 1;
  rows[1].g = 4.0;
  rows[2].slot = 4;
  rows[2].node = 0;
  rows[2].g = 0.0;
  const auto a = aggregate_score(rows, 2, 5);
  EXPECT_EQ(a, (std::vector<double>{0, 1, 1, 3, 2, 2}));
}

TEST(Detector, RunScoresStreams) {
  CalibrationSet c(normals(300, 11), 1, 5);
  std::vector<std::vector<TdSample>> streams(2);
  for (std::int64_t t = 0; t < 20; ++t) {
    streams[0].push_back({0, t, 0.0});
    streams[1].push_back({1, t, t >= 10 ? 40.0 : 0.0});
  }
  DetectorConfig cfg;
  const auto run = run_detector(streams, c, cfg, 25);
  EXPECT_EQ(run.aggregate.size(), 26u);
  EXPECT_EQ(run.rows.size(), 40u);
  EXPECT_FALSE(run.alarms[0]);
  ASSERT_TRUE(run.alarms[1]);
  EXPECT_GE(*run.alarms[1], 10);
  EXPECT_EQ(run.episode_score, *std::max_element(run.aggregate.begin(), run.aggregate.end()));
  EXPECT_TRUE(run.aggregate_alarm);
}
