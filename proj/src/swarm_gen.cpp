#include "swarmtraj/swarm_gen.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include "swarmtraj/errors.hpp"
#include "swarmtraj/metrics.hpp"
#include "swarmtraj/rng.hpp"

namespace swarmtraj {

namespace {

bool well_ordered(const Interval& iv) {
  return std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo <= iv.hi;
}

void interval_from_json(const nlohmann::json& j, const char* key, Interval& iv) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw UsageError(std::string(key) + " must be [lo, hi]");
  iv = {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

void GenConfig::validate() const {
  if (n_uavs == 0) throw UsageError("n_uavs must be at least 1");
  if (!well_ordered(init_range_xy) || !well_ordered(dest_range_xy) || !well_ordered(altitude_range)) {
    throw UsageError("generator intervals must be finite with lo <= hi");
  }
  if (altitude_range.lo < 0.0) throw UsageError("altitude range must be non-negative");
  if (!(cruise_speed > 0.0) || !std::isfinite(cruise_speed)) {
    throw UsageError("cruise_speed must be positive");
  }
}

Trajectory make_trajectory(int uav_id, double x0, double y0, double xf, double yf, double peak_altitude,
                           double cruise_speed, std::size_t n_waypoints) {
  if (n_waypoints < 2) throw UsageError("a trajectory needs at least two waypoints");
  Trajectory traj;
  traj.uav_id = uav_id;
  traj.waypoints.resize(n_waypoints);
  const std::size_t last = n_waypoints - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(last);
    // Folding s onto [0, 1/2] makes both ends exactly zero and the profile symmetric.
    const double folded = static_cast<double>(std::min(k, last - k)) / static_cast<double>(last);
    const double lift = std::sin(std::numbers::pi * folded);
    auto& w = traj.waypoints[k];
    w.x = x0 + s * (xf - x0);
    w.y = y0 + s * (yf - y0);
    w.z = peak_altitude * lift * lift;
  }
  double length = 0.0;
  for (std::size_t k = 1; k <= last; ++k) {
    const auto& a = traj.waypoints[k - 1];
    const auto& b = traj.waypoints[k];
    length += std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) + (b.z - a.z) * (b.z - a.z));
  }
  const double dt = length / static_cast<double>(last) / cruise_speed;
  for (std::size_t k = 0; k <= last; ++k) traj.waypoints[k].t = static_cast<double>(k) * dt;
  return traj;
}

SwarmDataset generate(const GenConfig& config) {
  config.validate();
  SwarmDataset ds;
  ds.gen_config = config;
  ds.trajectories.reserve(config.n_uavs);
  for (std::size_t i = 0; i < config.n_uavs; ++i) {
    Rng rng(substream_seed(config.seed, i));
    const double x0 = rng.uniform(config.init_range_xy.lo, config.init_range_xy.hi);
    const double y0 = rng.uniform(config.init_range_xy.lo, config.init_range_xy.hi);
    const double xf = rng.uniform(config.dest_range_xy.lo, config.dest_range_xy.hi);
    const double yf = rng.uniform(config.dest_range_xy.lo, config.dest_range_xy.hi);
    const double h = rng.uniform(config.altitude_range.lo, config.altitude_range.hi);
    ds.trajectories.push_back(make_trajectory(static_cast<int>(i), x0, y0, xf, yf, h, config.cruise_speed));
  }
  return ds;
}

std::vector<Violation> validate(const SwarmDataset& dataset) {
  std::vector<Violation> out;
  const auto& cfg = dataset.gen_config;

  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    if (dataset.trajectories[i].uav_id != static_cast<int>(i)) {
      out.push_back({-1, "uav_id", "uav ids must be unique and contiguous from 0; position " +
                                        std::to_string(i) + " holds id " +
                                        std::to_string(dataset.trajectories[i].uav_id)});
      break;
    }
  }

  for (const auto& traj : dataset.trajectories) {
    const auto& wp = traj.waypoints;
    const int id = traj.uav_id;
    if (wp.size() != kWaypointsPerTrajectory) {
      out.push_back({id, "waypoint_count", "expected " + std::to_string(kWaypointsPerTrajectory) +
                                               " waypoints, found " + std::to_string(wp.size())});
      continue;
    }

    bool finite = true;
    for (const auto& w : wp) {
      finite = finite && std::isfinite(w.x) && std::isfinite(w.y) && std::isfinite(w.z) && std::isfinite(w.t);
    }
    if (!finite) {
      out.push_back({id, "finite", "waypoint coordinates and timestamps must be finite"});
      continue;
    }
    for (std::size_t k = 1; k < wp.size(); ++k) {
      if (!(wp[k].t > wp[k - 1].t)) {
        out.push_back({id, "timestamps", "timestamps must be strictly increasing (index " +
                                             std::to_string(k) + ")"});
        break;
      }
    }
    double max_z = wp.front().z;
    bool below_ground = false;
    for (const auto& w : wp) {
      max_z = std::max(max_z, w.z);
      below_ground = below_ground || w.z < 0.0;
    }
    if (below_ground) out.push_back({id, "z", "altitude must be non-negative"});
    if (wp.front().z != 0.0 || wp.back().z != 0.0) {
      out.push_back({id, "endpoint_z", "first and last waypoint must be on the ground"});
    }
    if (!cfg.init_range_xy.contains(wp.front().x) || !cfg.init_range_xy.contains(wp.front().y)) {
      out.push_back({id, "start", "start position outside init_range_xy"});
    }
    if (!cfg.dest_range_xy.contains(wp.back().x) || !cfg.dest_range_xy.contains(wp.back().y)) {
      out.push_back({id, "destination", "destination outside dest_range_xy"});
    }
    if (!cfg.altitude_range.contains(max_z)) {
      out.push_back({id, "altitude", "peak altitude outside altitude_range"});
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = nlohmann::json{{"n_uavs", c.n_uavs},
                     {"init_range_xy", {c.init_range_xy.lo, c.init_range_xy.hi}},
                     {"dest_range_xy", {c.dest_range_xy.lo, c.dest_range_xy.hi}},
                     {"altitude_range", {c.altitude_range.lo, c.altitude_range.hi}},
                     {"cruise_speed", c.cruise_speed},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  if (j.contains("n_uavs")) {
    const auto n = j.at("n_uavs").get<long long>();
    if (n < 0) throw UsageError("n_uavs must be non-negative");
    c.n_uavs = static_cast<std::size_t>(n);
  }
  interval_from_json(j, "init_range_xy", c.init_range_xy);
  interval_from_json(j, "dest_range_xy", c.dest_range_xy);
  interval_from_json(j, "altitude_range", c.altitude_range);
  c.cruise_speed = j.value("cruise_speed", c.cruise_speed);
  c.seed = j.value("seed", c.seed);
}

void to_json(nlohmann::json& j, const SwarmDataset& d) {
  auto trajs = nlohmann::json::array();
  for (const auto& traj : d.trajectories) {
    auto wps = nlohmann::json::array();
    for (const auto& w : traj.waypoints) wps.push_back({w.x, w.y, w.z, w.t});
    trajs.push_back({{"uav_id", traj.uav_id}, {"waypoints", std::move(wps)}});
  }
  j = nlohmann::json{{"format_version", d.format_version},
                     {"gen_config", d.gen_config},
                     {"trajectories", std::move(trajs)}};
}

void from_json(const nlohmann::json& j, SwarmDataset& d) {
  if (!j.contains("format_version")) throw UsageError("dataset file lacks format_version");
  d.format_version = j.at("format_version").get<std::string>();
  d.gen_config = GenConfig{};
  if (j.contains("gen_config")) from_json(j.at("gen_config"), d.gen_config);
  d.trajectories.clear();
  for (const auto& jt : j.at("trajectories")) {
    Trajectory traj;
    traj.uav_id = jt.at("uav_id").get<int>();
    for (const auto& jw : jt.at("waypoints")) {
      if (!jw.is_array() || jw.size() != 4) throw UsageError("waypoint must be [x, y, z, t]");
      traj.waypoints.push_back({jw[0].get<double>(), jw[1].get<double>(), jw[2].get<double>(),
                                jw[3].get<double>()});
    }
    d.trajectories.push_back(std::move(traj));
  }
}

void write_dataset_csv(std::ostream& os, const SwarmDataset& d) {
  os << "uav_id,k,x,y,z,t\n";
  for (const auto& traj : d.trajectories) {
    for (std::size_t k = 0; k < traj.waypoints.size(); ++k) {
      const auto& w = traj.waypoints[k];
      os << traj.uav_id << ',' << k << ',' << format_double(w.x) << ',' << format_double(w.y) << ','
         << format_double(w.z) << ',' << format_double(w.t) << '\n';
    }
  }
}

}  // namespace swarmtraj
