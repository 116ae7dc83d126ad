#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "robosim/sensors.hpp"
#include "robosim/trajectory.hpp"

using namespace robosim;

namespace {

TrajectorySpec circle_spec(double duration_s = 10.0) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Circle;
  s.speed_mps = 1.0;
  s.radius_m = 2.0;
  s.duration_s = duration_s;
  s.seed = 7;
  return s;
}

}  // namespace

TEST_CASE("stationary trajectory holds pose, zero velocity") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Stationary;
  s.duration_s = 1.0;
  s.seed = 1;
  const GroundTruth gt = generate_trajectory(s);
  CHECK(gt.samples.size() == 1001);
  for (const auto& p : gt.samples) {
    CHECK(p.position.x == 0.0);
    CHECK(p.position.y == 0.0);
    CHECK(p.velocity.x == 0.0);
    CHECK(p.velocity.y == 0.0);
    CHECK(p.angular_rate == 0.0);
  }
}

TEST_CASE("straight line covers speed * time with constant heading") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::StraightLine;
  s.speed_mps = 1.0;
  s.duration_s = 10.0;
  s.seed = 1;
  const GroundTruth gt = generate_trajectory(s);
  const PoseSample& last = gt.samples.back();
  CHECK(last.position.x == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(last.position.y == doctest::Approx(0.0));
  for (const auto& p : gt.samples) CHECK(p.heading == 0.0);
}

TEST_CASE("circle closes after one revolution") {
  TrajectorySpec s = circle_spec(4.0 * 3.14159265358979323846);
  const GroundTruth gt = generate_trajectory(s);
  const PoseSample& last = gt.samples.back();
  // grid quantization leaves a sub-millimeter residual
  CHECK(std::abs(last.position.x - 0.0) < 2e-3);
  CHECK(std::abs(last.position.y - 0.0) < 2e-3);
}

TEST_CASE("trajectory validation rejects bad specs") {
  TrajectorySpec s;
  s.duration_s = 0.0;
  CHECK_THROWS_AS(generate_trajectory(s), ValidationError);

  TrajectorySpec wp;
  wp.kind = TrajectoryKind::WaypointPath;
  wp.duration_s = 1.0;
  wp.speed_mps = 0.5;
  CHECK_THROWS_AS(generate_trajectory(wp), ValidationError);

  TrajectorySpec fast;
  fast.kind = TrajectoryKind::StraightLine;
  fast.duration_s = 1.0;
  fast.speed_mps = 1.5;
  CHECK_THROWS_AS(generate_trajectory(fast), ValidationError);
}

TEST_CASE("trajectories carry a usable landmark field") {
  const GroundTruth gt = generate_trajectory(circle_spec());
  CHECK(gt.landmarks.size() >= 50);
  CHECK(gt.samples.front().t_ns == 0);
  for (std::size_t i = 1; i < gt.samples.size(); ++i)
    CHECK(gt.samples[i].t_ns > gt.samples[i - 1].t_ns);
}

TEST_CASE("stationary IMU with zero error model is all zeros") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Stationary;
  s.duration_s = 1.0;
  s.seed = 3;
  const GroundTruth gt = generate_trajectory(s);
  const auto samples = sample_imu(gt, ImuErrorModel{}, 1);
  CHECK(samples.size() == 200);
  for (const auto& m : samples) {
    CHECK(m.accel_x == 0.0);
    CHECK(m.accel_y == 0.0);
    CHECK(m.gyro_z == 0.0);
  }
}

TEST_CASE("circle IMU shows centripetal acceleration and constant gyro") {
  const GroundTruth gt = generate_trajectory(circle_spec(2.0));
  const auto samples = sample_imu(gt, ImuErrorModel{}, 1);
  CHECK(samples.size() == 400);
  for (const auto& m : samples) {
    const double mag = std::hypot(m.accel_x, m.accel_y);
    CHECK(mag == doctest::Approx(0.5).epsilon(1e-9));  // v^2/r
    CHECK(m.gyro_z == doctest::Approx(0.5).epsilon(1e-12));  // v/r
  }
}

TEST_CASE("accelerometer bias is additive") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::StraightLine;
  s.speed_mps = 1.0;
  s.duration_s = 2.0;
  s.seed = 5;
  const GroundTruth gt = generate_trajectory(s);
  ImuErrorModel err;
  err.accel_bias_x = 0.01;
  const auto samples = sample_imu(gt, err, 1);
  for (const auto& m : samples) {
    CHECK(m.accel_x == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(m.accel_y == doctest::Approx(0.0));
  }
}

TEST_CASE("sensor streams are bit-identical for identical seeds") {
  const GroundTruth gt = generate_trajectory(circle_spec(1.0));
  ImuErrorModel err;
  err.accel_noise_std = 0.02;
  err.gyro_noise_std = 0.001;
  const auto a = sample_imu(gt, err, 99);
  const auto b = sample_imu(gt, err, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t_ns == b[i].t_ns);
    CHECK(a[i].accel_x == b[i].accel_x);
    CHECK(a[i].accel_y == b[i].accel_y);
    CHECK(a[i].gyro_z == b[i].gyro_z);
  }
  const auto c = sample_imu(gt, err, 100);
  CHECK(c[0].accel_x != a[0].accel_x);
}

TEST_CASE("frame count matches 60 FPS") {
  const GroundTruth gt = generate_trajectory(circle_spec(10.0));
  CHECK(frame_count(gt) == 600);
}

TEST_CASE("no visible landmarks renders a uniform background") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Stationary;
  s.duration_s = 0.1;
  s.seed = 2;
  GroundTruth gt = generate_trajectory(s);
  gt.landmarks.clear();
  gt.landmarks.push_back({0, -5.0, 0.0, 0.3});  // behind the camera
  const StereoFrame f = render_stereo_frame(gt, CameraIntrinsics{}, 0, 2);
  for (auto px : f.left) CHECK(px == kImageBackground);
  for (auto px : f.right) CHECK(px == kImageBackground);
}

TEST_CASE("projection disparity follows f*b/z") {
  CameraIntrinsics cam;
  cam.baseline_m = 0.1;
  PoseSample pose;  // origin, heading 0
  Landmark lm{0, 2.0, 0.0, cam.height_m};
  const Projection pr = project_landmark(pose, lm, cam);
  REQUIRE(pr.visible);
  CHECK(pr.depth == doctest::Approx(2.0));
  CHECK(pr.disparity == doctest::Approx(400.0 * 0.1 / 2.0).epsilon(1e-12));  // 20 px
  CHECK(pr.u == doctest::Approx(cam.cx));
  CHECK(pr.v == doctest::Approx(cam.cy));
}

TEST_CASE("rendered fiducial disparity matches f*b/z within a pixel") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Stationary;
  s.duration_s = 0.1;
  s.seed = 2;
  GroundTruth gt = generate_trajectory(s);
  CameraIntrinsics cam;
  gt.landmarks.clear();
  gt.landmarks.push_back({0, 2.5, 0.31, 0.42});
  const StereoFrame f = render_stereo_frame(gt, cam, 0, 2);

  const auto centroid_u = [&](const std::vector<std::uint8_t>& img) {
    double wsum = 0.0, usum = 0.0;
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const double dev =
            std::abs(static_cast<double>(img[static_cast<std::size_t>(y) * f.width + x]) -
                     kImageBackground);
        if (dev > 8.0) {
          wsum += dev;
          usum += dev * x;
        }
      }
    }
    REQUIRE(wsum > 0.0);
    return usum / wsum;
  };
  const double measured = centroid_u(f.left) - centroid_u(f.right);
  const double expected = cam.focal_px * cam.baseline_m / 2.5;
  CHECK(std::abs(measured - expected) < 1.0);
}

TEST_CASE("empty word sequence synthesizes pure silence") {
  const auto chunks = synthesize_audio({}, 1);
  CHECK(!chunks.empty());
  for (const auto& c : chunks) {
    CHECK(c.samples.size() == 800);
    for (auto v : c.samples) CHECK(v == 0);
  }
}

TEST_CASE("audio chunks are contiguous at 8 kHz") {
  const auto chunks = synthesize_audio({"go", "stop"}, 1);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    CHECK(chunks[i].t_ns == static_cast<std::int64_t>(i) * kAudioChunkPeriodNs);
    CHECK(chunks[i].samples.size() == 800);
  }
}

TEST_CASE("two words make two energetic regions") {
  // energy-threshold oracle on the rendered signal, zero noise
  const auto chunks = synthesize_audio({"go", "stop"}, 1);
  std::vector<double> frame_rms;
  std::vector<std::int16_t> all;
  for (const auto& c : chunks) all.insert(all.end(), c.samples.begin(), c.samples.end());
  const int frame = 200, hop = 80;
  for (std::size_t off = 0; off + frame <= all.size(); off += hop) {
    double e = 0.0;
    for (int i = 0; i < frame; ++i) {
      const double v = all[off + i] / 32767.0;
      e += v * v;
    }
    frame_rms.push_back(std::sqrt(e / frame));
  }
  int regions = 0;
  bool in_region = false;
  for (double e : frame_rms) {
    const bool active = e > 0.05;
    if (active && !in_region) ++regions;
    in_region = active;
  }
  CHECK(regions == 2);
}

TEST_CASE("unknown word is rejected") {
  CHECK_THROWS_AS(synthesize_audio({"jump"}, 1), ValidationError);
}
