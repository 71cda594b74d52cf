#include "swarmtraj/icdab.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swarmtraj/errors.hpp"

namespace swarmtraj {
namespace {

using testing::brute_force_all;
using testing::brute_force_pair;
using testing::straight_line;

SwarmDataset dataset_of(std::vector<Trajectory> trajs) {
  SwarmDataset ds;
  ds.trajectories = std::move(trajs);
  ds.gen_config.n_uavs = ds.trajectories.size();
  return ds;
}

// Generated swarm squeezed into small start/destination boxes so that many pairs collide.
SwarmDataset crowded(std::size_t n, std::uint64_t seed) {
  GenConfig g;
  g.n_uavs = n;
  g.seed = seed;
  g.init_range_xy = {10.0, 16.0};
  g.dest_range_xy = {200.0, 206.0};
  return generate(g);
}

// UAV 0 flies along x at z = 10.6, UAV 1 along y at z = 10; they are 0.6 apart at index 100 only.
SwarmDataset vertical_near_miss() {
  return dataset_of({straight_line(0, 0, 0, 10.6, 200, 0, 10.6), straight_line(1, 100, -100, 10, 100, 100, 10)});
}

TEST(Detect, IdenticalTrajectories) {
  const Trajectory a = make_trajectory(0, 10, 10, 250, 250, 35, 5);
  Trajectory b = a;
  b.uav_id = 1;
  const auto e = detect_pair(a, b, IcdabConfig{});
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->waypoint_index_a, 0u);
  EXPECT_EQ(e->waypoint_index_b, 0u);
  EXPECT_EQ(e->distance, 0.0);
  EXPECT_EQ(e->uav_a, 0);
  EXPECT_EQ(e->uav_b, 1);
}

TEST(Detect, ParallelJustOutsideTwoR) {
  const double offset = 1.0 + 1e-9;
  const Trajectory a = straight_line(0, 0, 0, 10, 200, 0, 10);
  const Trajectory b = straight_line(1, 0, offset, 10, 200, offset, 10);
  EXPECT_FALSE(detect_pair(a, b, IcdabConfig{}).has_value());
  const Trajectory c = straight_line(1, 0, 1.0 - 1e-9, 10, 200, 1.0 - 1e-9, 10);
  EXPECT_TRUE(detect_pair(a, c, IcdabConfig{}).has_value());
  // Exactly 2R apart is not a collision.
  const Trajectory d = straight_line(1, 0, 1.0, 10, 200, 1.0, 10);
  EXPECT_FALSE(detect_pair(a, d, IcdabConfig{}).has_value());
}

TEST(Detect, TimeThresholdIsInclusive) {
  const Trajectory a = straight_line(0, 0, 0, 10, 200, 0, 10, 201, 0.5);
  Trajectory b = straight_line(1, 0, 0, 10, 200, 0, 10, 201, 0.5);
  for (auto& w : b.waypoints) w.t += 1.0;
  // Same positions one second apart: only the +-1.0 s window admits them.
  IcdabConfig c;
  const auto e = detect_pair(a, b, c);
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->waypoint_index_a, 0u);
  c.time_threshold = 0.25;
  // With a 0.25 s window the nearest time-admissible pair is 1 m apart.
  EXPECT_FALSE(detect_pair(a, b, c).has_value());
}

TEST(Detect, CrossingLinesMatchBruteForce) {
  IcdabConfig c;
  for (int trial = 0; trial < 40; ++trial) {
    const double phase = 0.05 * trial;
    const Trajectory a = straight_line(0, 0, 0, 10, 200, 200, 10 + 0.02 * trial, 201, 0.35);
    const Trajectory b = straight_line(1, 200, phase, 10, 0, 200 - phase, 10.5, 201, 0.35 + 0.001 * trial);
    EXPECT_EQ(detect_pair(a, b, c), brute_force_pair(a, b, c.radius_r, c.time_threshold)) << trial;
  }
}

TEST(Detect, AllSmallCases) {
  IcdabConfig c;
  EXPECT_TRUE(detect_all(dataset_of({make_trajectory(0, 10, 10, 250, 250, 35, 5)}), c).empty());
  std::vector<Trajectory> same;
  for (int i = 0; i < 3; ++i) {
    same.push_back(make_trajectory(i, 10, 10, 250, 250, 35, 5));
  }
  const auto events = detect_all(dataset_of(same), c);
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(std::make_pair(events[0].uav_a, events[0].uav_b), std::make_pair(0, 1));
  EXPECT_EQ(std::make_pair(events[1].uav_a, events[1].uav_b), std::make_pair(0, 2));
  EXPECT_EQ(std::make_pair(events[2].uav_a, events[2].uav_b), std::make_pair(1, 2));
}

TEST(Detect, AllMatchesBruteForceOverSeeds) {
  IcdabConfig c;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SwarmDataset ds = seed % 2 == 0 ? crowded(20 + seed % 6, seed) : [&] {
      GenConfig g;
      g.n_uavs = 20;
      g.seed = seed;
      return generate(g);
    }();
    const auto events = detect_all(ds, c);
    ASSERT_EQ(events, brute_force_all(ds, c.radius_r, c.time_threshold)) << seed;
    total += events.size();
  }
  EXPECT_GT(total, 0u);
}

TEST(Detect, UnsortedTimestampsStillExact) {
  IcdabConfig c;
  SwarmDataset ds = crowded(8, 3);
  std::reverse(ds.trajectories[2].waypoints.begin(), ds.trajectories[2].waypoints.end());
  EXPECT_EQ(detect_all(ds, c), brute_force_all(ds, c.radius_r, c.time_threshold));
}

TEST(Padding, Examples) {
  EXPECT_EQ(make_padding(5, 1.5), (std::vector<double>{0, 0.75, 1.5, 0.75, 0}));
  EXPECT_EQ(make_padding(3, 2.0), (std::vector<double>{0, 2.0, 0}));
  for (std::size_t len : {3u, 7u, 21u, 41u}) {
    auto p = make_padding(len, 1.5);
    auto r = p;
    std::reverse(r.begin(), r.end());
    EXPECT_EQ(p, r);
    EXPECT_EQ(p[len / 2], 1.5);
    const double step = p[1];
    for (std::size_t i = 1; i <= len / 2; ++i) EXPECT_NEAR(p[i] - p[i - 1], step, 1e-12);
  }
  EXPECT_THROW(make_padding(4, 1.0), UsageError);
  EXPECT_THROW(make_padding(1, 1.0), UsageError);
  EXPECT_THROW(make_padding(5, 0.0), UsageError);
}

TEST(Avoidance, ZeroPaddingIsIdentity) {
  const Trajectory t = make_trajectory(0, 10, 20, 220, 230, 33, 5);
  const std::vector<double> zeros(21, 0.0);
  EXPECT_EQ(apply_avoidance(t, 100, zeros), t);
}

TEST(Avoidance, PeakAtIndexAndWindowEdges) {
  const Trajectory t = make_trajectory(0, 10, 20, 220, 230, 33, 5);
  const auto pad = make_padding(21, 1.5);
  const Trajectory m = apply_avoidance(t, 60, pad);
  EXPECT_EQ(m.waypoints[60].z, t.waypoints[60].z + 1.5);
  EXPECT_EQ(m.waypoints[50].z, t.waypoints[50].z);
  EXPECT_EQ(m.waypoints[70].z, t.waypoints[70].z);
  for (std::size_t k = 0; k < t.waypoints.size(); ++k) {
    EXPECT_EQ(m.waypoints[k].x, t.waypoints[k].x);
    EXPECT_EQ(m.waypoints[k].y, t.waypoints[k].y);
    EXPECT_EQ(m.waypoints[k].t, t.waypoints[k].t);
    if (k < 50 || k > 70) EXPECT_EQ(m.waypoints[k].z, t.waypoints[k].z);
  }
}

TEST(Avoidance, ClippedWindowKeepsPeakAndRamp) {
  const Trajectory t = make_trajectory(0, 10, 20, 220, 230, 33, 5);
  const auto pad = make_padding(21, 1.5);
  for (std::size_t idx : {0u, 3u, 197u, 200u}) {
    const Trajectory m = apply_avoidance(t, idx, pad);
    EXPECT_DOUBLE_EQ(m.waypoints[idx].z, t.waypoints[idx].z + 1.5) << idx;
    for (std::size_t k = 0; k < t.waypoints.size(); ++k) {
      const double added = m.waypoints[k].z - t.waypoints[k].z;
      EXPECT_GE(added, -1e-12);
      EXPECT_LE(added, 1.5 + 1e-12);
      if (k + 10 < idx || k > idx + 10) EXPECT_EQ(added, 0.0);
    }
  }
  // Clipped at the start: a rebuilt three-step ramp 0.5, 1.0, 1.5 leading to index 3.
  const Trajectory m = apply_avoidance(t, 3, pad);
  EXPECT_NEAR(m.waypoints[0].z - t.waypoints[0].z, 0.0, 1e-12);
  EXPECT_NEAR(m.waypoints[1].z - t.waypoints[1].z, 0.5, 1e-12);
  EXPECT_NEAR(m.waypoints[2].z - t.waypoints[2].z, 1.0, 1e-12);
}

TEST(Avoidance, VerticalNearMissIsResolved) {
  IcdabConfig c;
  const SwarmDataset ds = vertical_near_miss();
  const auto before = detect_pair(ds.trajectories[0], ds.trajectories[1], c);
  ASSERT_TRUE(before.has_value());
  EXPECT_EQ(before->waypoint_index_a, 100u);
  EXPECT_NEAR(before->distance, 0.6, 1e-12);

  const Trajectory raised = apply_avoidance(ds.trajectories[0], 100, make_padding(21, c.padding_peak()));
  EXPECT_FALSE(detect_pair(raised, ds.trajectories[1], c).has_value());
  EXPECT_FALSE(brute_force_pair(raised, ds.trajectories[1], c.radius_r, c.time_threshold).has_value());
  const double gap = raised.waypoints[100].z - ds.trajectories[1].waypoints[100].z;
  EXPECT_GE(gap, c.padding_peak() - 0.6);
}

TEST(AvoidAll, CollisionFreeDatasetUntouched) {
  const SwarmDataset ds =
      dataset_of({straight_line(0, 0, 0, 10, 200, 0, 10), straight_line(1, 0, 50, 10, 200, 50, 10)});
  const auto r = avoid_all(ds, IcdabConfig{});
  EXPECT_EQ(r.modified, ds);
  EXPECT_EQ(r.tracking.total(), 0u);
  EXPECT_TRUE(r.batching_list.uav_ids.empty());
  EXPECT_TRUE(r.residual.empty());
}

TEST(AvoidAll, NearMissNeedsOneManipulation) {
  const auto r = avoid_all(vertical_near_miss(), IcdabConfig{});
  EXPECT_EQ(r.tracking.count(0), 1u);
  EXPECT_EQ(r.tracking.count(1), 0u);
  EXPECT_EQ(r.tracking.total(), 1u);
  EXPECT_TRUE(r.batching_list.uav_ids.empty());
  EXPECT_TRUE(r.residual.empty());
}

TEST(AvoidAll, FullOverlapExhaustsTheCap) {
  const Trajectory a = make_trajectory(0, 10, 10, 250, 250, 35, 5);
  Trajectory b = a;
  b.uav_id = 1;
  IcdabConfig c;
  const auto r = avoid_all(dataset_of({a, b}), c);
  EXPECT_EQ(r.batching_list.uav_ids, (std::vector<int>{0, 1}));
  EXPECT_EQ(r.tracking.count(0), c.manipulation_limit);
  EXPECT_EQ(r.tracking.count(1), c.manipulation_limit);
  EXPECT_EQ(r.residual.size(), 1u);
}

TEST(AvoidAll, Invariants) {
  std::size_t listed_total = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    IcdabConfig c;
    c.manipulation_limit = 3 + seed % 4;
    const SwarmDataset ds = crowded(25, 100 + seed);
    const auto r = avoid_all(ds, c);
    ASSERT_EQ(r.modified.trajectories.size(), ds.trajectories.size());
    EXPECT_LE(r.tracking.total(), ds.trajectories.size() * c.manipulation_limit);
    for (const auto& [id, n] : r.tracking.manipulations) EXPECT_LE(n, c.manipulation_limit);
    for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
      const auto& before = ds.trajectories[i].waypoints;
      const auto& after = r.modified.trajectories[i].waypoints;
      const bool touched = r.tracking.count(static_cast<int>(i)) > 0;
      for (std::size_t k = 0; k < before.size(); ++k) {
        ASSERT_EQ(after[k].x, before[k].x);
        ASSERT_EQ(after[k].y, before[k].y);
        ASSERT_EQ(after[k].t, before[k].t);
        if (!touched) ASSERT_EQ(after[k].z, before[k].z);
        ASSERT_GE(after[k].z, before[k].z);
      }
    }
    std::set<int> listed(r.batching_list.uav_ids.begin(), r.batching_list.uav_ids.end());
    EXPECT_EQ(listed.size(), r.batching_list.uav_ids.size());
    listed_total += listed.size();
    // Every remaining collision involves batching-list members only.
    EXPECT_EQ(r.residual, detect_all(r.modified, c));
    for (const auto& e : r.residual) {
      EXPECT_TRUE(listed.count(e.uav_a) && listed.count(e.uav_b));
    }
  }
  EXPECT_GT(listed_total, 0u);
}

TEST(Batches, EmptyListGivesOneBatch) {
  const SwarmDataset ds = crowded(6, 1);
  const BatchPlan plan = build_batches(ds, BatchingList{}, IcdabConfig{});
  ASSERT_EQ(plan.batches.size(), 1u);
  EXPECT_EQ(plan.batches[0], (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(plan.non_empty_count(), 1u);
}

TEST(Batches, GreedyExample) {
  // 0 is free; 1 and 2 coincide; 3 is far from both.
  const Trajectory a = make_trajectory(1, 10, 10, 250, 250, 35, 5);
  Trajectory b = a;
  b.uav_id = 2;
  const SwarmDataset ds =
      dataset_of({straight_line(0, 0, 500, 10, 200, 500, 10), a, b, straight_line(3, 0, 900, 10, 200, 900, 10)});
  BatchingList list;
  list.add(1);
  list.add(2);
  list.add(3);
  list.add(2);
  EXPECT_EQ(list.uav_ids, (std::vector<int>{1, 2, 3}));
  const BatchPlan plan = build_batches(ds, list, IcdabConfig{});
  EXPECT_EQ(plan.batches, (std::vector<std::vector<int>>{{0}, {1, 3}, {2}}));
  EXPECT_EQ(plan.max_batch_size(), 2u);
}

TEST(Batches, AllCollidingGivesSingletons) {
  std::vector<Trajectory> same;
  BatchingList list;
  for (int i = 0; i < 4; ++i) {
    same.push_back(make_trajectory(i, 10, 10, 250, 250, 35, 5));
    list.add(i);
  }
  const BatchPlan plan = build_batches(dataset_of(same), list, IcdabConfig{});
  EXPECT_EQ(plan.batches, (std::vector<std::vector<int>>{{}, {0}, {1}, {2}, {3}}));
  EXPECT_EQ(plan.non_empty_count(), 4u);
}

TEST(Pipeline, CollisionFree) {
  const SwarmDataset ds =
      dataset_of({straight_line(0, 0, 0, 10, 200, 0, 10), straight_line(1, 0, 50, 10, 200, 50, 10)});
  const auto r = run_pipeline(ds, IcdabConfig{});
  EXPECT_TRUE(r.initial_events.empty());
  EXPECT_TRUE(r.residual_events.empty());
  EXPECT_EQ(r.n_batches(), 1u);
  EXPECT_TRUE(r.all_batches_verified);
}

TEST(Pipeline, PartitionAndExhaustiveVerification) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    IcdabConfig c;
    c.manipulation_limit = 2;
    const SwarmDataset ds = crowded(25, 40 + seed);
    const auto r = run_pipeline(ds, c);
    EXPECT_GT(r.initial_events.size(), 0u);
    std::vector<int> all;
    for (const auto& b : r.plan.batches) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    std::vector<int> ids(ds.trajectories.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    EXPECT_EQ(all, ids);
    for (int id : r.plan.batches[0]) EXPECT_FALSE(r.batching_list.contains(id));
    for (const auto& batch : r.plan.batches) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        for (std::size_t j = i + 1; j < batch.size(); ++j)
          EXPECT_FALSE(brute_force_pair(r.final_dataset.trajectories[static_cast<std::size_t>(batch[i])],
                                        r.final_dataset.trajectories[static_cast<std::size_t>(batch[j])], c.radius_r,
                                        c.time_threshold)
                           .has_value());
    }
    EXPECT_TRUE(r.all_batches_verified);
    const auto again = run_pipeline(ds, c);
    EXPECT_EQ(nlohmann::json(again).dump(), nlohmann::json(r).dump());
  }
}

TEST(Pipeline, SweepRows) {
  const SwarmDataset ds = crowded(15, 9);
  const std::vector<double> radii{0.5, 1.5};
  const auto rows = sweep_safe_distance(ds, IcdabConfig{}, radii);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].safe_radius, 0.5);
  EXPECT_EQ(rows[1].safe_radius, 1.5);
  for (const auto& row : rows) {
    EXPECT_GE(row.n_batches, 1u);
    EXPECT_GE(row.max_batch_size, 1u);
  }
}

TEST(Config, Validation) {
  IcdabConfig c;
  c.radius_r = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = IcdabConfig{};
  c.safe_distance = -1.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = IcdabConfig{};
  c.time_threshold = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = IcdabConfig{};
  c.manipulation_limit = 4;
  const IcdabConfig back = nlohmann::json(c).get<IcdabConfig>();
  EXPECT_EQ(back.manipulation_limit, 4u);
  EXPECT_EQ(back.padding_peak(), 1.5);
}

}  // namespace
}  // namespace swarmtraj
