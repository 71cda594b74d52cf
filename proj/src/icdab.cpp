#include "swarmtraj/icdab.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <utility>

#include "swarmtraj/errors.hpp"

namespace swarmtraj {

namespace {

bool timestamps_sorted(const Trajectory& t) {
  for (std::size_t k = 1; k < t.waypoints.size(); ++k) {
    if (t.waypoints[k].t < t.waypoints[k - 1].t) return false;
  }
  return true;
}

double distance(const Waypoint& p, const Waypoint& q) {
  const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

CollisionEvent make_event(const Trajectory& a, const Trajectory& b, std::size_t i, std::size_t j) {
  const Waypoint& p = a.waypoints[i];
  const Waypoint& q = b.waypoints[j];
  CollisionEvent e{a.uav_id, b.uav_id, i, j, distance(p, q), std::abs(p.t - q.t)};
  if (e.uav_a > e.uav_b) {
    std::swap(e.uav_a, e.uav_b);
    std::swap(e.waypoint_index_a, e.waypoint_index_b);
  }
  return e;
}

}  // namespace

void IcdabConfig::validate() const {
  if (!(radius_r > 0.0) || !std::isfinite(radius_r)) throw UsageError("radius_r must be positive");
  if (!(safe_distance >= 0.0) || !std::isfinite(safe_distance)) {
    throw UsageError("safe_distance must be non-negative");
  }
  if (!(time_threshold > 0.0) || !std::isfinite(time_threshold)) {
    throw UsageError("time_threshold must be positive");
  }
  if (padding_halfwidth == 0) throw UsageError("padding_halfwidth must be at least 1");
}

void to_json(nlohmann::json& j, const IcdabConfig& c) {
  j = nlohmann::json{{"radius_r", c.radius_r},
                     {"safe_distance", c.safe_distance},
                     {"time_threshold", c.time_threshold},
                     {"manipulation_limit", c.manipulation_limit},
                     {"padding_halfwidth", c.padding_halfwidth}};
}

void from_json(const nlohmann::json& j, IcdabConfig& c) {
  c.radius_r = j.value("radius_r", c.radius_r);
  c.safe_distance = j.value("safe_distance", c.safe_distance);
  c.time_threshold = j.value("time_threshold", c.time_threshold);
  c.manipulation_limit = j.value("manipulation_limit", c.manipulation_limit);
  c.padding_halfwidth = j.value("padding_halfwidth", c.padding_halfwidth);
}

void to_json(nlohmann::json& j, const CollisionEvent& e) {
  j = nlohmann::json{{"uav_a", e.uav_a},
                     {"uav_b", e.uav_b},
                     {"waypoint_index_a", e.waypoint_index_a},
                     {"waypoint_index_b", e.waypoint_index_b},
                     {"distance", e.distance},
                     {"time_gap", e.time_gap}};
}

std::size_t TrackingArray::count(int uav_id) const {
  const auto it = manipulations.find(uav_id);
  return it == manipulations.end() ? 0 : it->second;
}

std::size_t TrackingArray::total() const {
  std::size_t sum = 0;
  for (const auto& [id, n] : manipulations) sum += n;
  return sum;
}

bool BatchingList::contains(int uav_id) const {
  return std::find(uav_ids.begin(), uav_ids.end(), uav_id) != uav_ids.end();
}

void BatchingList::add(int uav_id) {
  if (!contains(uav_id)) uav_ids.push_back(uav_id);
}

std::size_t BatchPlan::non_empty_count() const {
  return static_cast<std::size_t>(
      std::count_if(batches.begin(), batches.end(), [](const auto& b) { return !b.empty(); }));
}

std::size_t BatchPlan::max_batch_size() const {
  std::size_t m = 0;
  for (const auto& b : batches) m = std::max(m, b.size());
  return m;
}

std::optional<CollisionEvent> detect_pair(const Trajectory& a, const Trajectory& b, const IcdabConfig& config) {
  const double limit = config.collision_distance();
  const double limit_sq = limit * limit;
  const double tau = config.time_threshold;
  const auto& wa = a.waypoints;
  const auto& wb = b.waypoints;
  const auto close = [&](const Waypoint& p, const Waypoint& q) {
    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    return dx * dx + dy * dy + dz * dz < limit_sq && std::abs(p.t - q.t) <= tau;
  };

  if (!timestamps_sorted(a) || !timestamps_sorted(b)) {
    for (std::size_t i = 0; i < wa.size(); ++i)
      for (std::size_t j = 0; j < wb.size(); ++j)
        if (close(wa[i], wb[j])) return make_event(a, b, i, j);
    return std::nullopt;
  }

  // Sliding window over b's timestamps within +-tau of a's current waypoint.
  std::size_t lo = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const double t = wa[i].t;
    while (lo < wb.size() && wb[lo].t < t - tau) ++lo;
    for (std::size_t j = lo; j < wb.size() && wb[j].t <= t + tau; ++j) {
      if (close(wa[i], wb[j])) return make_event(a, b, i, j);
    }
  }
  return std::nullopt;
}

std::vector<CollisionEvent> detect_all(const SwarmDataset& dataset, const IcdabConfig& config) {
  config.validate();
  std::vector<CollisionEvent> events;
  const auto& trajs = dataset.trajectories;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (std::size_t j = i + 1; j < trajs.size(); ++j) {
      const bool ordered = trajs[i].uav_id < trajs[j].uav_id;
      const auto& lower = ordered ? trajs[i] : trajs[j];
      const auto& upper = ordered ? trajs[j] : trajs[i];
      if (auto e = detect_pair(lower, upper, config)) events.push_back(*e);
    }
  }
  std::sort(events.begin(), events.end(), [](const CollisionEvent& x, const CollisionEvent& y) {
    return std::pair(x.uav_a, x.uav_b) < std::pair(y.uav_a, y.uav_b);
  });
  return events;
}

std::vector<double> make_padding(std::size_t length, double peak) {
  if (length < 3 || length % 2 == 0) {
    throw UsageError("padding length must be odd and at least 3, got " + std::to_string(length));
  }
  if (!(peak > 0.0) || !std::isfinite(peak)) throw UsageError("padding peak must be positive");
  const std::size_t half = length / 2;
  std::vector<double> out(length);
  for (std::size_t i = 0; i <= half; ++i) {
    const double v = peak * static_cast<double>(i) / static_cast<double>(half);
    out[i] = v;
    out[length - 1 - i] = v;
  }
  return out;
}

Trajectory apply_avoidance(const Trajectory& traj, std::size_t collision_index, std::span<const double> padding) {
  if (padding.empty() || padding.size() % 2 == 0) throw UsageError("padding must have odd length");
  Trajectory out = traj;
  auto& wp = out.waypoints;
  if (collision_index >= wp.size()) throw UsageError("collision index outside the trajectory");
  const std::size_t half = padding.size() / 2;
  const double peak = padding[half];
  const std::size_t last = wp.size() - 1;

  const std::size_t left = std::min(half, collision_index);
  const std::size_t right = std::min(half, last - collision_index);
  wp[collision_index].z += peak;
  for (std::size_t d = 1; d <= left; ++d) {
    const double v = left == half ? padding[half - d]
                                  : peak * static_cast<double>(left - d) / static_cast<double>(left);
    wp[collision_index - d].z += v;
  }
  for (std::size_t d = 1; d <= right; ++d) {
    const double v = right == half ? padding[half + d]
                                   : peak * static_cast<double>(right - d) / static_cast<double>(right);
    wp[collision_index + d].z += v;
  }
  return out;
}

AvoidanceResult avoid_all(const SwarmDataset& dataset, const IcdabConfig& config) {
  config.validate();
  AvoidanceResult result;
  result.modified = dataset;
  auto& trajs = result.modified.trajectories;
  const std::size_t n = trajs.size();
  const std::vector<double> padding = make_padding(2 * config.padding_halfwidth + 1, config.padding_peak());

  std::set<std::pair<std::size_t, std::size_t>> abandoned;
  const auto key = [&](std::size_t u, std::size_t v) {
    return trajs[u].uav_id < trajs[v].uav_id ? std::pair(u, v) : std::pair(v, u);
  };

  // Checks one pair; on a collision manipulates one side (or gives up on the
  // pair) and returns the index of the UAV that changed.
  const auto check = [&](std::size_t u, std::size_t v) -> std::optional<std::size_t> {
    const auto [lo, hi] = key(u, v);
    if (abandoned.count({lo, hi}) != 0) return std::nullopt;
    const auto event = detect_pair(trajs[lo], trajs[hi], config);
    if (!event) return std::nullopt;
    std::size_t target;
    std::size_t index;
    if (result.tracking.count(trajs[lo].uav_id) < config.manipulation_limit) {
      target = lo;
      index = event->waypoint_index_a;
    } else if (result.tracking.count(trajs[hi].uav_id) < config.manipulation_limit) {
      target = hi;
      index = event->waypoint_index_b;
    } else {
      result.batching_list.add(trajs[lo].uav_id);
      result.batching_list.add(trajs[hi].uav_id);
      abandoned.insert({lo, hi});
      return std::nullopt;
    }
    trajs[target] = apply_avoidance(trajs[target], index, padding);
    ++result.tracking.manipulations[trajs[target].uav_id];
    return target;
  };

  std::deque<std::size_t> pending;
  std::vector<bool> queued(n, false);
  const auto enqueue = [&](std::size_t u) {
    if (!queued[u]) {
      queued[u] = true;
      pending.push_back(u);
    }
  };
  const auto drain = [&] {
    while (!pending.empty()) {
      const std::size_t u = pending.front();
      pending.pop_front();
      queued[u] = false;
      std::size_t v = 0;
      while (v < n) {
        if (v != u) {
          if (const auto changed = check(u, v)) {
            if (*changed == u) {
              v = 0;  // u moved: start its sweep over
              continue;
            }
            enqueue(*changed);
          }
        }
        ++v;
      }
    }
  };

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (const auto changed = check(a, b)) {
        enqueue(*changed);
        drain();
      }
    }
  }

  result.residual = detect_all(result.modified, config);
  return result;
}

BatchPlan build_batches(const SwarmDataset& dataset, const BatchingList& batching_list, const IcdabConfig& config) {
  config.validate();
  std::map<int, const Trajectory*> by_id;
  for (const auto& t : dataset.trajectories) by_id[t.uav_id] = &t;
  for (int id : batching_list.uav_ids) {
    if (by_id.count(id) == 0) throw UsageError("batching list names unknown UAV " + std::to_string(id));
  }

  BatchPlan plan;
  std::vector<int> first;
  for (const auto& [id, traj] : by_id) {
    if (!batching_list.contains(id)) first.push_back(id);
  }
  plan.batches.push_back(std::move(first));

  const auto collides = [&](int x, int y) {
    const int lo = std::min(x, y), hi = std::max(x, y);
    return detect_pair(*by_id[lo], *by_id[hi], config).has_value();
  };

  std::vector<bool> assigned(batching_list.uav_ids.size(), false);
  for (std::size_t start = 0; start < batching_list.uav_ids.size(); ++start) {
    if (assigned[start]) continue;
    std::vector<int> batch{batching_list.uav_ids[start]};
    assigned[start] = true;
    for (std::size_t k = start + 1; k < batching_list.uav_ids.size(); ++k) {
      if (assigned[k]) continue;
      const int candidate = batching_list.uav_ids[k];
      const bool clear = std::none_of(batch.begin(), batch.end(), [&](int m) { return collides(m, candidate); });
      if (clear) {
        batch.push_back(candidate);
        assigned[k] = true;
      }
    }
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

std::size_t colliding_uav_count(std::span<const CollisionEvent> events) {
  std::set<int> ids;
  for (const auto& e : events) {
    ids.insert(e.uav_a);
    ids.insert(e.uav_b);
  }
  return ids.size();
}

DeconflictionReport run_pipeline(const SwarmDataset& dataset, const IcdabConfig& config) {
  config.validate();
  DeconflictionReport report;
  report.config = config;
  report.n_uavs = dataset.trajectories.size();
  report.initial_events = detect_all(dataset, config);
  report.initial_colliding_uavs = colliding_uav_count(report.initial_events);

  AvoidanceResult avoided = avoid_all(dataset, config);
  report.residual_events = std::move(avoided.residual);
  report.residual_colliding_uavs = colliding_uav_count(report.residual_events);
  report.tracking = std::move(avoided.tracking);
  report.batching_list = std::move(avoided.batching_list);
  report.plan = build_batches(avoided.modified, report.batching_list, config);

  std::map<int, const Trajectory*> by_id;
  for (const auto& t : avoided.modified.trajectories) by_id[t.uav_id] = &t;
  for (const auto& batch : report.plan.batches) {
    BatchCheck check{batch, 0, true};
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t j = i + 1; j < batch.size(); ++j) {
        const int lo = std::min(batch[i], batch[j]), hi = std::max(batch[i], batch[j]);
        if (detect_pair(*by_id[lo], *by_id[hi], config)) ++check.intra_batch_collisions;
      }
    }
    check.verified_collision_free = check.intra_batch_collisions == 0;
    report.all_batches_verified = report.all_batches_verified && check.verified_collision_free;
    report.batch_checks.push_back(std::move(check));
  }
  report.final_dataset = std::move(avoided.modified);
  return report;
}

void to_json(nlohmann::json& j, const DeconflictionReport& r) {
  auto tracking = nlohmann::json::array();
  for (const auto& [id, n] : r.tracking.manipulations) tracking.push_back({id, n});
  auto batches = nlohmann::json::array();
  for (const auto& c : r.batch_checks) {
    batches.push_back({{"uav_ids", c.uav_ids},
                       {"intra_batch_collisions", c.intra_batch_collisions},
                       {"verified_collision_free", c.verified_collision_free}});
  }
  j = nlohmann::json{{"format_version", kFormatVersion},
                     {"config", r.config},
                     {"n_uavs", r.n_uavs},
                     {"stage_counts",
                      {{"initial_collisions", r.initial_events.size()},
                       {"initial_colliding_uavs", r.initial_colliding_uavs},
                       {"residual_collisions", r.residual_events.size()},
                       {"residual_colliding_uavs", r.residual_colliding_uavs},
                       {"total_manipulations", r.tracking.total()},
                       {"n_batches", r.n_batches()},
                       {"max_batch_size", r.plan.max_batch_size()}}},
                     {"tracking", tracking},
                     {"batching_list", r.batching_list.uav_ids},
                     {"batches", batches},
                     {"all_batches_verified", r.all_batches_verified},
                     {"initial_events", r.initial_events},
                     {"residual_events", r.residual_events}};
}

std::vector<SweepRow> sweep_safe_distance(const SwarmDataset& dataset, const IcdabConfig& base,
                                          std::span<const double> safe_distances) {
  if (safe_distances.empty()) throw UsageError("safe distance sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double s : safe_distances) {
    IcdabConfig c = base;
    c.safe_distance = s;
    const DeconflictionReport r = run_pipeline(dataset, c);
    rows.push_back({s, r.residual_events.size(), r.n_batches(), r.plan.max_batch_size()});
  }
  return rows;
}

}  // namespace swarmtraj
