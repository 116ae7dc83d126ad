#pragma once

// Planar visual-inertial SLAM: IMU propagation, Harris corner extraction,
// stereo triangulation, landmark map with merge-on-insert, and a closed-form
// 2D rigid registration update that corrects propagation drift.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "robosim/errors.hpp"
#include "robosim/geometry.hpp"
#include "robosim/sensors.hpp"

namespace robosim {

struct AgentState {
  std::int64_t t_ns = 0;
  Vec2 position;
  Vec2 velocity;
  double heading = 0.0;
};

// ---------------------------------------------------------------------------
// Propagation (dead reckoning)

// First-order integrator: world-frame acceleration is computed with the
// interval-start heading, heading advances by gyro * dt.
inline AgentState propagate(const AgentState& state, const ImuSample& imu, double dt_s) {
  if (!(dt_s > 0.0)) throw ValidationError("propagate: dt must be > 0");
  const Vec2 accel_world = rotate(state.heading, {imu.accel_x, imu.accel_y});
  AgentState next;
  next.t_ns = state.t_ns + static_cast<std::int64_t>(std::llround(dt_s * 1e9));
  next.position = state.position + state.velocity * dt_s + accel_world * (0.5 * dt_s * dt_s);
  next.velocity = state.velocity + accel_world * dt_s;
  next.heading = normalize_angle(state.heading + imu.gyro_z * dt_s);
  return next;
}

// ---------------------------------------------------------------------------
// Feature extraction

struct FeaturePoint {
  double u = 0.0;  // subpixel column
  double v = 0.0;  // subpixel row
  double score = 0.0;
  std::array<double, 64> descriptor{};  // unit-normalized 8x8 patch
};

struct FeatureConfig {
  double harris_k = 0.04;
  double harris_threshold = 1e-4;  // on [0,1]-scaled intensities
  int nms_radius = 5;
};

namespace detail {

inline double descriptor_distance(const std::array<double, 64>& a,
                                  const std::array<double, 64>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// 3-point parabola peak refinement, clamped to half a pixel.
inline double parabolic_offset(double lo, double mid, double hi) {
  const double denom = lo - 2.0 * mid + hi;
  if (denom >= 0.0) return 0.0;  // not a proper maximum
  double off = 0.5 * (lo - hi) / denom;
  return std::clamp(off, -0.5, 0.5);
}

// Closed-form X-junction localization for checkerboard corners rendered with
// box-filter antialiasing. Around the junction pixel (r, s) the normalized
// intensity is J = (1 + u*v)/2 with u = 2*(r - x0), v = 2*(s - y0); the four
// edge-adjacent pixels saturate one factor and so give u and v directly.
// Candidate junction pixels in a 3x3 neighbourhood are scored by model
// residual. Returns false if nothing checkerboard-like is found.
inline bool junction_offset(const std::vector<std::uint8_t>& img, int w, int h, int x, int y,
                            double& du, double& dv) {
  const auto I = [&](int xx, int yy) -> double {
    return img[static_cast<std::size_t>(yy) * w + xx];
  };
  double best_res = 0.2;  // acceptance threshold on the model residual
  bool found = false;
  for (int ry = y - 1; ry <= y + 1; ++ry) {
    for (int rx = x - 1; rx <= x + 1; ++rx) {
      if (rx < 1 || ry < 1 || rx > w - 2 || ry > h - 2) continue;
      const double bright = 0.5 * (I(rx - 1, ry - 1) + I(rx + 1, ry + 1));
      const double dark = 0.5 * (I(rx + 1, ry - 1) + I(rx - 1, ry + 1));
      const double contrast = bright - dark;
      if (contrast < 20.0) continue;
      const auto J = [&](int dx2, int dy2) {
        return (I(rx + dx2, ry + dy2) - dark) / contrast;
      };
      const double u1 = 1.0 - 2.0 * J(0, -1);
      const double u2 = 2.0 * J(0, 1) - 1.0;
      const double v1 = 1.0 - 2.0 * J(-1, 0);
      const double v2 = 2.0 * J(1, 0) - 1.0;
      const double u = 0.5 * (u1 + u2);
      const double v = 0.5 * (v1 + v2);
      if (std::abs(u) > 1.05 || std::abs(v) > 1.05) continue;
      const double res = std::abs(J(0, 0) - 0.5 * (1.0 + u * v)) +
                         0.5 * std::abs(u1 - u2) + 0.5 * std::abs(v1 - v2);
      if (res < best_res) {
        best_res = res;
        du = (rx - 0.5 * u) - x;
        dv = (ry - 0.5 * v) - y;
        found = true;
      }
    }
  }
  return found && std::abs(du) <= 1.6 && std::abs(dv) <= 1.6;
}

// Least-squares quadratic fit of intensity over a 5x5 window; if the fitted
// surface is a saddle (checkerboard junction), its stationary point gives the
// corner position to a small fraction of a pixel. Returns false when the
// window is not saddle-like or the refined offset is implausible.
inline bool saddle_offset(const std::vector<std::uint8_t>& img, int w, int h, int x, int y,
                          double& du, double& dv) {
  if (x < 2 || y < 2 || x > w - 3 || y > h - 3) return false;
  // normal equations for I ~ a + b*dx + c*dy + d*dx^2 + e*dx*dy + f*dy^2
  double ata[6][6] = {};
  double atb[6] = {};
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const double val = img[static_cast<std::size_t>(y + dy) * w + (x + dx)] / 255.0;
      const double row[6] = {1.0, double(dx), double(dy), double(dx) * dx, double(dx) * dy,
                             double(dy) * dy};
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) ata[i][j] += row[i] * row[j];
        atb[i] += row[i] * val;
      }
    }
  }
  // gaussian elimination with partial pivoting
  double m[6][7];
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) m[i][j] = ata[i][j];
    m[i][6] = atb[i];
  }
  for (int col = 0; col < 6; ++col) {
    int piv = col;
    for (int r = col + 1; r < 6; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-12) return false;
    if (piv != col)
      for (int j = 0; j <= 6; ++j) std::swap(m[col][j], m[piv][j]);
    for (int r = 0; r < 6; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int j = col; j <= 6; ++j) m[r][j] -= f * m[col][j];
    }
  }
  double coeff[6];
  for (int i = 0; i < 6; ++i) coeff[i] = m[i][6] / m[i][i];
  const double b = coeff[1], c = coeff[2], d = coeff[3], e = coeff[4], f = coeff[5];
  const double det = 4.0 * d * f - e * e;
  if (det >= -1e-6) return false;  // not a saddle
  // stationary point of the quadratic
  du = (-2.0 * f * b + e * c) / det;
  dv = (-2.0 * d * c + e * b) / det;
  if (std::abs(du) > 1.2 || std::abs(dv) > 1.2) return false;
  return true;
}

}  // namespace detail

// Harris corner response over the whole image ([0,1]-scaled intensities,
// central-difference gradients, 3x3 box-summed structure tensor). Exposed so
// tests can evaluate the response map exhaustively.
inline std::vector<double> harris_response(const std::vector<std::uint8_t>& img, int w, int h,
                                           double k) {
  std::vector<double> gx(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> gy(static_cast<std::size_t>(w) * h, 0.0);
  const auto at = [&](int x, int y) { return img[static_cast<std::size_t>(y) * w + x] / 255.0; };
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      gx[idx] = 0.5 * (at(x + 1, y) - at(x - 1, y));
      gy[idx] = 0.5 * (at(x, y + 1) - at(x, y - 1));
    }
  }
  std::vector<double> resp(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t idx = static_cast<std::size_t>(y + dy) * w + (x + dx);
          sxx += gx[idx] * gx[idx];
          syy += gy[idx] * gy[idx];
          sxy += gx[idx] * gy[idx];
        }
      }
      const double tr = sxx + syy;
      resp[static_cast<std::size_t>(y) * w + x] = sxx * syy - sxy * sxy - k * tr * tr;
    }
  }
  return resp;
}

inline std::vector<FeaturePoint> extract_features(const std::vector<std::uint8_t>& img, int w,
                                                  int h, const FeatureConfig& cfg = {}) {
  if (w < 8 || h < 8) throw ValidationError("image smaller than descriptor patch");
  const std::vector<double> resp = harris_response(img, w, h, cfg.harris_k);
  const int r = cfg.nms_radius;
  const int r2 = r * r;
  const int margin = 4;  // full 8x8 descriptor patch must fit
  std::vector<FeaturePoint> out;
  for (int y = margin; y <= h - 1 - margin; ++y) {
    for (int x = margin; x <= w - 1 - margin; ++x) {
      const double v = resp[static_cast<std::size_t>(y) * w + x];
      if (v < cfg.harris_threshold) continue;
      bool is_max = true;
      for (int dy = -r; dy <= r && is_max; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r2 || (dx == 0 && dy == 0)) continue;
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          const double o = resp[static_cast<std::size_t>(yy) * w + xx];
          if (o > v || (o == v && (yy < y || (yy == y && xx < x)))) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      FeaturePoint f;
      double du = 0.0, dv = 0.0;
      if (detail::junction_offset(img, w, h, x, y, du, dv) ||
          detail::saddle_offset(img, w, h, x, y, du, dv)) {
        f.u = x + du;
        f.v = y + dv;
      } else {
        const auto R = [&](int xx, int yy) {
          return resp[static_cast<std::size_t>(yy) * w + xx];
        };
        f.u = x + detail::parabolic_offset(R(x - 1, y), v, R(x + 1, y));
        f.v = y + detail::parabolic_offset(R(x, y - 1), v, R(x, y + 1));
      }
      f.score = v;
      double norm_sq = 0.0;
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          const double val = img[static_cast<std::size_t>(y - 3 + i) * w + (x - 3 + j)] / 255.0;
          f.descriptor[static_cast<std::size_t>(i * 8 + j)] = val;
          norm_sq += val * val;
        }
      }
      if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& d : f.descriptor) d *= inv;
      }
      out.push_back(f);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stereo pairing and triangulation

struct StereoParams {
  double disparity_min = 0.5;
  double max_row_offset = 1.5;
  double max_descriptor_distance = 0.5;
};

// Greedy one-to-one pairing by descriptor distance along the epipolar row.
inline std::vector<std::pair<std::size_t, std::size_t>> pair_stereo(
    const std::vector<FeaturePoint>& left, const std::vector<FeaturePoint>& right,
    const StereoParams& p = {}) {
  struct Cand {
    double dist;
    std::size_t li, ri;
  };
  std::vector<Cand> cands;
  for (std::size_t li = 0; li < left.size(); ++li) {
    for (std::size_t ri = 0; ri < right.size(); ++ri) {
      if (std::abs(left[li].v - right[ri].v) > p.max_row_offset) continue;
      const double disp = left[li].u - right[ri].u;
      if (disp <= p.disparity_min) continue;
      const double d = detail::descriptor_distance(left[li].descriptor, right[ri].descriptor);
      if (d >= p.max_descriptor_distance) continue;
      cands.push_back({d, li, ri});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.li != b.li) return a.li < b.li;
    return a.ri < b.ri;
  });
  std::vector<bool> lused(left.size(), false), rused(right.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Cand& c : cands) {
    if (lused[c.li] || rused[c.ri]) continue;
    lused[c.li] = true;
    rused[c.ri] = true;
    out.push_back({c.li, c.ri});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Camera-frame point (X right, Y down, Z forward) from a stereo pair.
inline CameraPoint triangulate_stereo(const FeaturePoint& left, const FeaturePoint& right,
                                      const CameraIntrinsics& cam, double baseline_m,
                                      double disparity_min = 0.5) {
  const double disparity = left.u - right.u;
  if (disparity <= disparity_min)
    throw ValidationError("stereo disparity below minimum: point too far or mismatched");
  CameraPoint c;
  c.z = cam.focal_px * baseline_m / disparity;
  c.x = (left.u - cam.cx) * c.z / cam.focal_px;
  c.y = (left.v - cam.cy) * c.z / cam.focal_px;
  return c;
}

// An extracted feature with its triangulated position in the robot frame
// (x forward, y left) plus retained height metadata.
struct Observation {
  FeaturePoint feature;
  Vec2 robot_frame;
  double height = 0.0;
};

inline Observation make_observation(const FeaturePoint& left, const CameraPoint& cam_pt,
                                    const CameraIntrinsics& cam) {
  Observation o;
  o.feature = left;
  o.robot_frame = {cam_pt.z, -cam_pt.x};
  o.height = cam.height_m - cam_pt.y;
  return o;
}

// ---------------------------------------------------------------------------
// World map

struct MapPoint {
  std::uint32_t id = 0;
  Vec2 position;  // world ground-plane coordinates
  double height = 0.0;
  std::array<double, 64> descriptor{};
  std::uint32_t observation_count = 1;
};

class WorldMap {
 public:
  explicit WorldMap(double merge_radius_m = 0.05) : merge_radius_(merge_radius_m) {}

  std::size_t size() const { return points_.size(); }
  double merge_radius() const { return merge_radius_; }
  const std::map<std::uint32_t, MapPoint>& points() const { return points_; }

  const MapPoint* find(std::uint32_t id) const {
    auto it = points_.find(id);
    return it == points_.end() ? nullptr : &it->second;
  }

  // Map points within radius of center, ordered by id.
  std::vector<const MapPoint*> query_radius(const Vec2& center, double radius) const {
    std::vector<const MapPoint*> out;
    const int c0x = cell_coord(center.x - radius), c1x = cell_coord(center.x + radius);
    const int c0y = cell_coord(center.y - radius), c1y = cell_coord(center.y + radius);
    for (int cy = c0y; cy <= c1y; ++cy) {
      for (int cx = c0x; cx <= c1x; ++cx) {
        auto it = grid_.find(cell_key(cx, cy));
        if (it == grid_.end()) continue;
        for (std::uint32_t id : it->second) {
          const MapPoint& mp = points_.at(id);
          if ((mp.position - center).norm() <= radius) out.push_back(&mp);
        }
      }
    }
    std::sort(out.begin(), out.end(),
              [](const MapPoint* a, const MapPoint* b) { return a->id < b->id; });
    return out;
  }

  // Insert a point, merging with an existing one inside the merge radius
  // (running position average, observation count incremented).
  std::uint32_t insert(const Vec2& position, double height,
                       const std::array<double, 64>& descriptor) {
    auto near = query_radius(position, merge_radius_);
    if (!near.empty()) {
      // merge into the closest (ties by id from query ordering)
      const MapPoint* best = near.front();
      double best_d = (best->position - position).norm();
      for (const MapPoint* c : near) {
        const double d = (c->position - position).norm();
        if (d < best_d) {
          best = c;
          best_d = d;
        }
      }
      MapPoint& mp = points_.at(best->id);
      remove_from_grid(mp);
      const double n = mp.observation_count;
      mp.position = (mp.position * n + position) * (1.0 / (n + 1.0));
      mp.height = (mp.height * n + height) / (n + 1.0);
      mp.observation_count += 1;
      add_to_grid(mp);
      return mp.id;
    }
    MapPoint mp;
    mp.id = next_id_++;
    mp.position = position;
    mp.height = height;
    mp.descriptor = descriptor;
    mp.observation_count = 1;
    add_to_grid(mp);
    points_.emplace(mp.id, mp);
    return mp.id;
  }

  void record_observation(std::uint32_t id) {
    auto it = points_.find(id);
    if (it != points_.end()) it->second.observation_count += 1;
  }

 private:
  static int cell_coord(double v) { return static_cast<int>(std::floor(v / 0.5)); }
  static std::uint64_t cell_key(int cx, int cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
  }
  void add_to_grid(const MapPoint& mp) {
    grid_[cell_key(cell_coord(mp.position.x), cell_coord(mp.position.y))].push_back(mp.id);
  }
  void remove_from_grid(const MapPoint& mp) {
    auto key = cell_key(cell_coord(mp.position.x), cell_coord(mp.position.y));
    auto it = grid_.find(key);
    if (it == grid_.end()) return;
    auto& v = it->second;
    v.erase(std::remove(v.begin(), v.end(), mp.id), v.end());
    if (v.empty()) grid_.erase(it);
  }

  double merge_radius_;
  std::uint32_t next_id_ = 0;
  std::map<std::uint32_t, MapPoint> points_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;
};

// ---------------------------------------------------------------------------
// Matching

struct MatchConfig {
  double gating_radius_m = 0.5;
  double max_descriptor_distance = 0.5;
  double ratio_test = 0.8;
};

struct Match {
  std::uint32_t map_id = 0;
  Vec2 map_position;       // world
  Vec2 observed;           // robot frame
  std::size_t observation_index = 0;
  double descriptor_dist = 0.0;
};

inline std::vector<Match> match_features(const std::vector<Observation>& observations,
                                         const WorldMap& map, const AgentState& predicted,
                                         const MatchConfig& cfg = {}) {
  struct Cand {
    double dist;
    std::size_t oi;
    const MapPoint* mp;
  };
  std::vector<Cand> accepted;
  for (std::size_t oi = 0; oi < observations.size(); ++oi) {
    const Vec2 predicted_world =
        predicted.position + rotate(predicted.heading, observations[oi].robot_frame);
    const auto cands = map.query_radius(predicted_world, cfg.gating_radius_m);
    const MapPoint* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    double second_d = std::numeric_limits<double>::infinity();
    for (const MapPoint* mp : cands) {
      const double d =
          detail::descriptor_distance(observations[oi].feature.descriptor, mp->descriptor);
      if (d < best_d) {
        second_d = best_d;
        best_d = d;
        best = mp;
      } else if (d < second_d) {
        second_d = d;
      }
    }
    if (!best || best_d >= cfg.max_descriptor_distance) continue;
    if (std::isfinite(second_d) && second_d > 0.0 && best_d / second_d >= cfg.ratio_test)
      continue;
    accepted.push_back({best_d, oi, best});
  }
  // one observation per map point, best descriptor distance wins
  std::sort(accepted.begin(), accepted.end(), [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.oi < b.oi;
  });
  std::vector<bool> used_obs(observations.size(), false);
  std::vector<std::uint32_t> used_map;
  std::vector<Match> out;
  for (const Cand& c : accepted) {
    if (used_obs[c.oi]) continue;
    if (std::find(used_map.begin(), used_map.end(), c.mp->id) != used_map.end()) continue;
    used_obs[c.oi] = true;
    used_map.push_back(c.mp->id);
    out.push_back({c.mp->id, c.mp->position, observations[c.oi].robot_frame, c.oi, c.dist});
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.map_id < b.map_id; });
  return out;
}

// ---------------------------------------------------------------------------
// Pose update (closed-form 2D rigid registration)

struct PoseUpdate {
  AgentState state;
  bool propagation_only = false;
};

// Solves R, t minimizing sum ||R*q_i + t - p_i||^2 where q are robot-frame
// observations and p the matched map positions: theta = atan2(sum cross,
// sum dot) over centered pairs, translation from centroids. Degenerate
// observation sets (all coincident) fall back to translation-only.
inline PoseUpdate update_pose(const AgentState& state, const std::vector<Match>& matches) {
  if (matches.size() < 2) return {state, true};
  Vec2 qc{0, 0}, pc{0, 0};
  for (const Match& m : matches) {
    qc += m.observed;
    pc += m.map_position;
  }
  const double inv_n = 1.0 / static_cast<double>(matches.size());
  qc = qc * inv_n;
  pc = pc * inv_n;
  double sum_cross = 0.0, sum_dot = 0.0, spread = 0.0;
  for (const Match& m : matches) {
    const Vec2 q = m.observed - qc;
    const Vec2 p = m.map_position - pc;
    sum_cross += q.cross(p);
    sum_dot += q.dot(p);
    spread += q.dot(q);
  }
  AgentState next = state;
  if (spread < 1e-12) {  // coincident observations: translation-only correction
    next.position = pc - rotate(state.heading, qc);
    return {next, false};
  }
  const double theta = std::atan2(sum_cross, sum_dot);
  next.heading = normalize_angle(theta);
  next.position = pc - rotate(theta, qc);
  return {next, false};
}

// ---------------------------------------------------------------------------
// Map extension

inline void extend_map(WorldMap& map, const std::vector<Observation>& unmatched,
                       const AgentState& state) {
  for (const Observation& o : unmatched) {
    const Vec2 world = state.position + rotate(state.heading, o.robot_frame);
    map.insert(world, o.height, o.feature.descriptor);
  }
}

// ---------------------------------------------------------------------------
// Pipeline

struct SlamConfig {
  FeatureConfig features;
  StereoParams stereo;
  MatchConfig matching;
  double map_merge_radius_m = 0.05;
};

struct FrameOutcome {
  AgentState pose_at_frame;
  bool corrected = false;
  std::size_t features_left = 0;
  std::size_t observations = 0;
  std::size_t matches = 0;
};

class SlamPipeline {
 public:
  explicit SlamPipeline(const SlamConfig& cfg = {})
      : cfg_(cfg), map_(cfg.map_merge_radius_m) {}

  void init(const AgentState& initial) {
    state_ = initial;
    have_last_corrected_ = false;
  }

  const AgentState& state() const { return state_; }
  const WorldMap& map() const { return map_; }

  // 200 Hz path: one pose per IMU sample.
  AgentState process_imu(const ImuSample& imu) {
    const double dt_s = static_cast<double>(imu.t_ns - state_.t_ns) * 1e-9;
    state_ = propagate(state_, imu, dt_s);
    return state_;
  }

  struct FrontendResult {
    std::vector<Observation> observations;
    std::size_t features_left = 0;
    std::size_t features_right = 0;
  };

  // Frontend: corner extraction, stereo pairing, triangulation.
  FrontendResult run_frontend(const StereoFrame& frame) const {
    FrontendResult res;
    const auto left = extract_features(frame.left, frame.width, frame.height, cfg_.features);
    const auto right = extract_features(frame.right, frame.width, frame.height, cfg_.features);
    res.features_left = left.size();
    res.features_right = right.size();
    const auto pairs = pair_stereo(left, right, cfg_.stereo);
    res.observations.reserve(pairs.size());
    for (const auto& [li, ri] : pairs) {
      const double disp = left[li].u - right[ri].u;
      if (disp <= cfg_.stereo.disparity_min) continue;
      const CameraPoint cp = triangulate_stereo(left[li], right[ri], frame.intrinsics,
                                                frame.intrinsics.baseline_m,
                                                cfg_.stereo.disparity_min);
      res.observations.push_back(make_observation(left[li], cp, frame.intrinsics));
    }
    return res;
  }

  // Backend: match against the map, correct the pose, extend the map.
  // `predicted_at_capture` is the propagated state at the frame timestamp;
  // the correction delta is applied to the current (possibly later) state.
  FrameOutcome run_backend(const std::vector<Observation>& observations,
                           const AgentState& predicted_at_capture,
                           std::size_t features_left = 0) {
    FrameOutcome out;
    out.features_left = features_left;
    out.observations = observations.size();
    const auto matches = match_features(observations, map_, predicted_at_capture, cfg_.matching);
    out.matches = matches.size();
    const PoseUpdate upd = update_pose(predicted_at_capture, matches);
    out.pose_at_frame = upd.state;
    out.corrected = !upd.propagation_only;

    if (out.corrected) {
      const Vec2 dpos = upd.state.position - predicted_at_capture.position;
      const double dheading = normalize_angle(upd.state.heading - predicted_at_capture.heading);
      state_.position += dpos;
      state_.heading = normalize_angle(state_.heading + dheading);
      for (const Match& m : matches) map_.record_observation(m.map_id);
      if (have_last_corrected_) {
        const double dt_s = static_cast<double>(upd.state.t_ns - last_corrected_.t_ns) * 1e-9;
        if (dt_s > 0.0)
          state_.velocity = (upd.state.position - last_corrected_.position) * (1.0 / dt_s);
      }
      last_corrected_ = upd.state;
      have_last_corrected_ = true;
    }

    if (out.corrected || map_.size() == 0) {
      std::vector<bool> matched(observations.size(), false);
      for (const Match& m : matches) matched[m.observation_index] = true;
      std::vector<Observation> unmatched;
      for (std::size_t oi = 0; oi < observations.size(); ++oi)
        if (!matched[oi]) unmatched.push_back(observations[oi]);
      const AgentState& anchor = out.corrected ? out.pose_at_frame : predicted_at_capture;
      extend_map(map_, unmatched, anchor);
    }
    return out;
  }

  FrameOutcome process_frame(const StereoFrame& frame) {
    AgentState predicted = state_;
    predicted.t_ns = frame.t_ns;
    const FrontendResult fr = run_frontend(frame);
    return run_backend(fr.observations, predicted, fr.features_left);
  }

 private:
  SlamConfig cfg_;
  AgentState state_;
  WorldMap map_;
  AgentState last_corrected_;
  bool have_last_corrected_ = false;
};

// Pose stream CSV (t_ns, x, y, heading, flag), per docs/formats.md.
struct PoseRecord {
  std::int64_t t_ns = 0;
  Vec2 position;
  double heading = 0.0;
  bool corrected = false;
};

inline std::string poses_to_csv(const std::vector<PoseRecord>& poses) {
  std::ostringstream os;
  os << "t_ns,x,y,heading,flag\n";
  for (const auto& p : poses)
    os << p.t_ns << ',' << p.position.x << ',' << p.position.y << ',' << p.heading << ','
       << (p.corrected ? "corrected" : "propagation-only") << '\n';
  return os.str();
}

}  // namespace robosim
