#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "swarmtraj/swarm_gen.hpp"

namespace swarmtraj {

/// Integrated collision detection, avoidance and batching.
struct IcdabConfig {
  double radius_r = 0.5;         // collision-sphere radius; two UAVs collide below 2R
  double safe_distance = 0.5;    // extra clearance added on top of 2R by the padding peak
  double time_threshold = 1.0;   // max |t_a - t_b| in seconds for a waypoint pair to count
  std::size_t manipulation_limit = 10;
  std::size_t padding_halfwidth = 10;  // waypoints on each side of the collision index

  double collision_distance() const { return 2.0 * radius_r; }
  double padding_peak() const { return 2.0 * radius_r + safe_distance; }

  void validate() const;
};

void to_json(nlohmann::json& j, const IcdabConfig& c);
void from_json(const nlohmann::json& j, IcdabConfig& c);

struct CollisionEvent {
  int uav_a = 0;  // always the lower id
  int uav_b = 0;
  std::size_t waypoint_index_a = 0;
  std::size_t waypoint_index_b = 0;
  double distance = 0.0;
  double time_gap = 0.0;

  bool operator==(const CollisionEvent&) const = default;
};

void to_json(nlohmann::json& j, const CollisionEvent& e);

/// Manipulation count per UAV; UAVs never manipulated are absent.
struct TrackingArray {
  std::map<int, std::size_t> manipulations;

  std::size_t count(int uav_id) const;
  std::size_t total() const;
};

/// UAVs whose capped avoidance failed, in insertion order, without duplicates.
struct BatchingList {
  std::vector<int> uav_ids;

  bool contains(int uav_id) const;
  void add(int uav_id);
};

/// Batch 0 holds every UAV never placed on the batching list (possibly none);
/// the rest are built greedily from the list.
struct BatchPlan {
  std::vector<std::vector<int>> batches;

  std::size_t non_empty_count() const;
  std::size_t max_batch_size() const;
};

/// Earliest waypoint pair (by index in `a`, then in `b`) closer than 2R whose
/// timestamps differ by at most the time threshold. Waypoint samples only; no
/// interpolation between them.
std::optional<CollisionEvent> detect_pair(const Trajectory& a, const Trajectory& b, const IcdabConfig& config);

/// One event per colliding unordered pair, sorted by (uav_a, uav_b).
std::vector<CollisionEvent> detect_all(const SwarmDataset& dataset, const IcdabConfig& config);

/// Triangular profile 0 .. peak .. 0 with uniform steps. `length` must be odd and >= 3.
std::vector<double> make_padding(std::size_t length, double peak);

/// Adds `padding`, centred on `collision_index`, to the altitude of `traj`.
/// Where the window runs past either end it is clipped and that side's ramp is
/// rebuilt over the remaining waypoints so the peak still lands on the
/// collision index. X, Y and timestamps are untouched.
Trajectory apply_avoidance(const Trajectory& traj, std::size_t collision_index, std::span<const double> padding);

struct AvoidanceResult {
  SwarmDataset modified;
  TrackingArray tracking;
  BatchingList batching_list;
  std::vector<CollisionEvent> residual;
};

/// Capped avoidance. For every colliding pair the lower-id UAV is raised
/// unless it already reached the manipulation limit, then the other one; when
/// both are capped they go on the batching list and the pair is left alone.
/// Each manipulated UAV is re-checked against all others before the pair scan
/// resumes.
AvoidanceResult avoid_all(const SwarmDataset& dataset, const IcdabConfig& config);

BatchPlan build_batches(const SwarmDataset& dataset, const BatchingList& batching_list, const IcdabConfig& config);

struct BatchCheck {
  std::vector<int> uav_ids;
  std::size_t intra_batch_collisions = 0;
  bool verified_collision_free = true;
};

struct DeconflictionReport {
  IcdabConfig config;
  std::size_t n_uavs = 0;
  std::vector<CollisionEvent> initial_events;
  std::size_t initial_colliding_uavs = 0;
  std::vector<CollisionEvent> residual_events;
  std::size_t residual_colliding_uavs = 0;
  TrackingArray tracking;
  BatchingList batching_list;
  BatchPlan plan;
  std::vector<BatchCheck> batch_checks;
  bool all_batches_verified = true;
  SwarmDataset final_dataset;

  std::size_t n_batches() const { return plan.non_empty_count(); }
};

/// detect_all -> avoid_all -> build_batches, then checks every batch pairwise.
DeconflictionReport run_pipeline(const SwarmDataset& dataset, const IcdabConfig& config);

/// Number of distinct UAVs appearing in `events`.
std::size_t colliding_uav_count(std::span<const CollisionEvent> events);

void to_json(nlohmann::json& j, const DeconflictionReport& r);

struct SweepRow {
  double safe_radius = 0.0;
  std::size_t residual_collisions = 0;
  std::size_t n_batches = 0;
  std::size_t max_batch_size = 0;
};

/// run_pipeline once per safe distance, other settings taken from `base`.
std::vector<SweepRow> sweep_safe_distance(const SwarmDataset& dataset, const IcdabConfig& base,
                                          std::span<const double> safe_distances);

}  // namespace swarmtraj
