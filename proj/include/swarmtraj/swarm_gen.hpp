#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace swarmtraj {

inline constexpr std::size_t kWaypointsPerTrajectory = 201;
inline constexpr const char* kFormatVersion = "1.0";

/// Position in metres, timestamp in seconds since the common takeoff.
struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;

  bool operator==(const Waypoint&) const = default;
};

struct Trajectory {
  int uav_id = 0;
  std::vector<Waypoint> waypoints;

  bool operator==(const Trajectory&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Interval&) const = default;
};

struct GenConfig {
  std::size_t n_uavs = 500;
  Interval init_range_xy{10.0, 50.0};
  Interval dest_range_xy{200.0, 300.0};
  Interval altitude_range{30.0, 40.0};
  double cruise_speed = 5.0;
  std::uint64_t seed = 0;

  /// Throws UsageError on n_uavs == 0, inverted intervals, or non-positive speed.
  void validate() const;

  bool operator==(const GenConfig&) const = default;
};

struct SwarmDataset {
  std::vector<Trajectory> trajectories;
  GenConfig gen_config;
  std::string format_version = kFormatVersion;

  bool operator==(const SwarmDataset&) const = default;
};

/// One straight ground track per UAV from a random start to a random
/// destination, with altitude h * sin^2(pi * s) for s = k / 200 and timestamps
/// at constant cruise speed along the 3-D path. UAV i draws from its own
/// substream of `seed`, so a UAV does not depend on how many others exist.
SwarmDataset generate(const GenConfig& config);

/// Builds one trajectory the way `generate` does, from explicit endpoints.
Trajectory make_trajectory(int uav_id, double x0, double y0, double xf, double yf, double peak_altitude,
                           double cruise_speed, std::size_t n_waypoints = kWaypointsPerTrajectory);

struct Violation {
  int uav_id = -1;  // -1 for dataset-level problems
  std::string field;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// One record per (uav, field) breach; empty iff the dataset satisfies every
/// trajectory invariant and the generator ranges.
std::vector<Violation> validate(const SwarmDataset& dataset);

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);
void to_json(nlohmann::json& j, const SwarmDataset& d);
void from_json(const nlohmann::json& j, SwarmDataset& d);

/// Columns: uav_id,k,x,y,z,t with one header line.
void write_dataset_csv(std::ostream& os, const SwarmDataset& d);

}  // namespace swarmtraj
