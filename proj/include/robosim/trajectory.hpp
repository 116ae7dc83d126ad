#pragma once

// Ground-truth trajectory and landmark generation. Trajectories start at the
// origin with heading 0 (+x); poses are sampled on a fixed 1 kHz grid so that
// 200 Hz IMU sample times always fall on grid points.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "robosim/errors.hpp"
#include "robosim/geometry.hpp"
#include "robosim/prng.hpp"

namespace robosim {

enum class TrajectoryKind { Stationary, StraightLine, Circle, WaypointPath };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Stationary;
  double speed_mps = 0.0;
  double radius_m = 0.0;
  std::vector<Vec2> waypoints;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  double max_speed_mps = 1.0;  // ground robot travels at low speed
};

struct PoseSample {
  std::int64_t t_ns = 0;
  Vec2 position;
  double heading = 0.0;
  Vec2 velocity;
  double angular_rate = 0.0;
  Vec2 accel_world;  // kinematic acceleration, world frame
};

struct Landmark {
  std::uint32_t id = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct GroundTruth {
  std::vector<PoseSample> samples;  // 1 kHz grid, t = k * 1e6 ns
  std::vector<Landmark> landmarks;
  double duration_s = 0.0;

  static constexpr std::int64_t kGridStepNs = 1'000'000;

  // Nearest grid sample; IMU/frame times in this project land on the grid.
  const PoseSample& at(std::int64_t t_ns) const {
    std::int64_t idx = (t_ns + kGridStepNs / 2) / kGridStepNs;
    if (idx < 0) idx = 0;
    if (idx >= static_cast<std::int64_t>(samples.size()))
      idx = static_cast<std::int64_t>(samples.size()) - 1;
    return samples[static_cast<std::size_t>(idx)];
  }
};

namespace detail {

inline PoseSample eval_stationary(double) { return PoseSample{}; }

inline PoseSample eval_straight(double t, double v) {
  PoseSample p;
  p.position = {v * t, 0.0};
  p.velocity = {v, 0.0};
  return p;
}

// CCW circle through the origin, initial heading +x, center at (0, r).
inline PoseSample eval_circle(double t, double v, double r) {
  const double w = v / r;
  const double a = w * t;
  PoseSample p;
  p.position = {r * std::sin(a), r * (1.0 - std::cos(a))};
  p.heading = normalize_angle(a);
  p.velocity = {v * std::cos(a), v * std::sin(a)};
  p.angular_rate = w;
  p.accel_world = {-v * w * std::sin(a), v * w * std::cos(a)};
  return p;
}

struct WaypointTable {
  std::vector<Vec2> pts;
  std::vector<double> cum_t;  // arrival time at each point

  static WaypointTable build(const std::vector<Vec2>& wp, double v) {
    WaypointTable tb;
    tb.pts.push_back({0.0, 0.0});
    for (const auto& p : wp) tb.pts.push_back(p);
    tb.cum_t.resize(tb.pts.size(), 0.0);
    for (std::size_t i = 1; i < tb.pts.size(); ++i)
      tb.cum_t[i] = tb.cum_t[i - 1] + (tb.pts[i] - tb.pts[i - 1]).norm() / v;
    return tb;
  }

  PoseSample eval(double t, double v) const {
    PoseSample p;
    if (t >= cum_t.back()) {  // hold at the final waypoint
      p.position = pts.back();
      if (pts.size() >= 2) {
        Vec2 d = pts.back() - pts[pts.size() - 2];
        if (d.norm() > 0) p.heading = std::atan2(d.y, d.x);
      }
      return p;
    }
    std::size_t seg = 1;
    while (seg < cum_t.size() && cum_t[seg] <= t) ++seg;
    const Vec2 a = pts[seg - 1];
    const Vec2 b = pts[seg];
    const double seg_len = (b - a).norm();
    const double frac = seg_len > 0 ? (t - cum_t[seg - 1]) * v / seg_len : 0.0;
    Vec2 dir = seg_len > 0 ? (b - a) * (1.0 / seg_len) : Vec2{1.0, 0.0};
    p.position = a + dir * (frac * seg_len);
    p.heading = std::atan2(dir.y, dir.x);
    p.velocity = dir * v;
    return p;
  }
};

}  // namespace detail

inline void validate(const TrajectorySpec& spec) {
  if (!(spec.duration_s > 0.0)) throw ValidationError("trajectory duration_s must be > 0");
  if (spec.speed_mps < 0.0) throw ValidationError("trajectory speed must be >= 0");
  if (spec.speed_mps > spec.max_speed_mps)
    throw ValidationError("trajectory speed exceeds max_speed_mps");
  switch (spec.kind) {
    case TrajectoryKind::Stationary:
      break;
    case TrajectoryKind::StraightLine:
      break;
    case TrajectoryKind::Circle:
      if (!(spec.radius_m > 0.0)) throw ValidationError("circle trajectory needs radius_m > 0");
      if (!(spec.speed_mps > 0.0)) throw ValidationError("circle trajectory needs speed > 0");
      break;
    case TrajectoryKind::WaypointPath:
      if (spec.waypoints.empty()) throw ValidationError("waypoint trajectory needs waypoints");
      if (!(spec.speed_mps > 0.0)) throw ValidationError("waypoint trajectory needs speed > 0");
      break;
  }
}

inline PoseSample eval_pose(const TrajectorySpec& spec, double t_s) {
  switch (spec.kind) {
    case TrajectoryKind::Stationary:
      return detail::eval_stationary(t_s);
    case TrajectoryKind::StraightLine:
      return detail::eval_straight(t_s, spec.speed_mps);
    case TrajectoryKind::Circle:
      return detail::eval_circle(t_s, spec.speed_mps, spec.radius_m);
    case TrajectoryKind::WaypointPath: {
      auto tb = detail::WaypointTable::build(spec.waypoints, spec.speed_mps);
      return tb.eval(t_s, spec.speed_mps);
    }
  }
  return PoseSample{};
}

// Scatters landmarks around random path points: bearing uniform, range within
// the stereo camera's usable depth band, height within the vertical FOV.
inline std::vector<Landmark> scatter_landmarks(const TrajectorySpec& spec, std::size_t count) {
  Prng rng = Prng(spec.seed).derive(0x1a17d);
  std::vector<Landmark> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = rng.uniform(0.0, spec.duration_s);
    const PoseSample p = eval_pose(spec, t);
    const double bearing = rng.uniform(-3.14159265358979323846, 3.14159265358979323846);
    const double range = rng.uniform(1.5, 7.0);
    Landmark lm;
    lm.id = static_cast<std::uint32_t>(i);
    lm.x = p.position.x + range * std::cos(bearing);
    lm.y = p.position.y + range * std::sin(bearing);
    lm.z = rng.uniform(0.05, 0.95);
    out.push_back(lm);
  }
  return out;
}

inline GroundTruth generate_trajectory(const TrajectorySpec& spec) {
  validate(spec);
  GroundTruth gt;
  gt.duration_s = spec.duration_s;
  const std::int64_t n = static_cast<std::int64_t>(std::llround(spec.duration_s * 1000.0));
  gt.samples.reserve(static_cast<std::size_t>(n + 1));
  detail::WaypointTable wp_table;
  if (spec.kind == TrajectoryKind::WaypointPath)
    wp_table = detail::WaypointTable::build(spec.waypoints, spec.speed_mps);
  for (std::int64_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * 1e-3;
    PoseSample p;
    if (spec.kind == TrajectoryKind::WaypointPath)
      p = wp_table.eval(t, spec.speed_mps);
    else
      p = eval_pose(spec, t);
    p.t_ns = k * GroundTruth::kGridStepNs;
    gt.samples.push_back(p);
  }
  gt.landmarks = scatter_landmarks(spec, 80);
  return gt;
}

}  // namespace robosim
