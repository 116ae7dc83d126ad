#pragma once

// Deterministic synthetic sensor streams: 200 Hz IMU, 60 FPS stereo frames
// with fiducial landmarks, 8 kHz audio in 100 ms chunks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "robosim/errors.hpp"
#include "robosim/geometry.hpp"
#include "robosim/prng.hpp"
#include "robosim/trajectory.hpp"

namespace robosim {

// ---------------------------------------------------------------------------
// IMU

struct ImuSample {
  std::int64_t t_ns = 0;
  double accel_x = 0.0;  // body frame, m/s^2
  double accel_y = 0.0;
  double gyro_z = 0.0;  // rad/s
};

struct ImuErrorModel {
  double accel_bias_x = 0.0;
  double accel_bias_y = 0.0;
  double gyro_bias = 0.0;
  double accel_noise_std = 0.0;
  double gyro_noise_std = 0.0;
};

inline void validate(const ImuErrorModel& m) {
  if (m.accel_noise_std < 0.0 || m.gyro_noise_std < 0.0)
    throw ValidationError("IMU noise stddev must be >= 0");
}

constexpr std::int64_t kImuPeriodNs = 5'000'000;  // 200 Hz

// Samples are stamped at the end of each 5 ms interval: t = (k+1) * 5 ms.
// Noise draw order per sample: accel_x, accel_y, gyro (documented for
// cross-implementation reproducibility).
inline std::vector<ImuSample> sample_imu(const GroundTruth& gt, const ImuErrorModel& err,
                                         std::uint64_t seed) {
  if (gt.samples.empty()) throw ValidationError("ground truth is empty");
  validate(err);
  Prng rng = Prng(seed).derive(0x1341);
  const std::int64_t n = static_cast<std::int64_t>(std::llround(gt.duration_s * 200.0));
  std::vector<ImuSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t t = (k + 1) * kImuPeriodNs;
    const PoseSample& p = gt.at(t);
    const Vec2 accel_body = rotate(-p.heading, p.accel_world);
    ImuSample s;
    s.t_ns = t;
    s.accel_x = accel_body.x + err.accel_bias_x + rng.gaussian(0.0, err.accel_noise_std);
    s.accel_y = accel_body.y + err.accel_bias_y + rng.gaussian(0.0, err.accel_noise_std);
    s.gyro_z = p.angular_rate + err.gyro_bias + rng.gaussian(0.0, err.gyro_noise_std);
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stereo camera

struct CameraIntrinsics {
  int width = 640;
  int height = 480;
  double focal_px = 400.0;
  double cx = 320.0;
  double cy = 240.0;
  double baseline_m = 0.2;
  double height_m = 0.3;  // camera above the ground plane
  double z_near = 0.3;
  double z_far = 15.0;
};

struct StereoFrame {
  std::int64_t t_ns = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> left;
  std::vector<std::uint8_t> right;
  CameraIntrinsics intrinsics;
};

constexpr std::uint8_t kImageBackground = 25;

// Camera-frame coordinates of a landmark seen from a robot pose.
// X right, Y down, Z forward (optical axis along the heading).
struct CameraPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline CameraPoint to_camera_frame(const PoseSample& pose, const Landmark& lm,
                                   const CameraIntrinsics& cam) {
  const Vec2 rel{lm.x - pose.position.x, lm.y - pose.position.y};
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double forward = c * rel.x + s * rel.y;
  const double left = -s * rel.x + c * rel.y;
  return {-left, -(lm.z - cam.height_m), forward};
}

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double disparity = 0.0;
  double depth = 0.0;
  bool visible = false;
};

inline Projection project_landmark(const PoseSample& pose, const Landmark& lm,
                                   const CameraIntrinsics& cam) {
  Projection pr;
  const CameraPoint c = to_camera_frame(pose, lm, cam);
  if (c.z < cam.z_near || c.z > cam.z_far) return pr;
  pr.depth = c.z;
  pr.u = cam.cx + cam.focal_px * c.x / c.z;
  pr.v = cam.cy + cam.focal_px * c.y / c.z;
  pr.disparity = cam.focal_px * cam.baseline_m / c.z;
  const double margin = 6.0;
  pr.visible = pr.u - pr.disparity >= margin && pr.u <= cam.width - 1 - margin &&
               pr.v >= margin && pr.v <= cam.height - 1 - margin;
  return pr;
}

// Per-landmark 8x8 fiducial: a 2x2 checkerboard of 4x4 quadrants whose
// intensities are id-keyed, so the center X-junction is a strong corner and
// descriptors differ between landmarks.
inline std::array<std::uint8_t, 4> fiducial_quadrants(std::uint32_t landmark_id,
                                                      std::uint64_t scene_seed) {
  Prng rng = Prng(scene_seed).derive(0xf1d0'0000ULL + landmark_id);
  // Diagonal quadrants share one intensity so the X-junction is symmetric
  // and subpixel localization is unbiased.
  const auto b = static_cast<std::uint8_t>(185 + rng.uniform_int(70));
  const auto d = static_cast<std::uint8_t>(rng.uniform_int(55));
  return {b, d, d, b};  // TL, TR, BL, BR
}

// Full 8x8 cell pattern: the central 4x4 cells are pure quadrant colors (the
// X-junction the detector localizes), the outer ring is id-keyed texture in
// the same bright/dark class so descriptors discriminate between landmarks.
inline std::array<std::uint8_t, 64> fiducial_pattern(std::uint32_t landmark_id,
                                                     std::uint64_t scene_seed) {
  const auto quad = fiducial_quadrants(landmark_id, scene_seed);
  Prng rng = Prng(scene_seed).derive(0xf1d1'0000ULL + landmark_id);
  std::array<std::uint8_t, 64> cells{};
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const int q = (i < 4 ? 0 : 2) + (j < 4 ? 0 : 1);
      const bool central = i >= 2 && i <= 5 && j >= 2 && j <= 5;
      const bool bright = q == 0 || q == 3;
      std::uint8_t v;
      if (central) {
        v = quad[static_cast<std::size_t>(q)];
      } else if (bright) {
        v = static_cast<std::uint8_t>(160 + rng.uniform_int(96));
      } else {
        v = static_cast<std::uint8_t>(rng.uniform_int(90));
      }
      cells[static_cast<std::size_t>(i * 8 + j)] = v;
    }
  }
  return cells;
}

namespace detail {

// Splats the 8x8 pattern at a continuous center with bilinear coverage, so
// corner positions carry subpixel information. Pixel index p samples the
// area [p - 0.5, p + 0.5), matching the pinhole convention of pixel centers
// at integer coordinates.
inline void splat_fiducial(std::vector<std::uint8_t>& img, int w, int h, double cu, double cv,
                           const std::array<std::uint8_t, 64>& cells) {
  const double left = cu - 4.0;
  const double top = cv - 4.0;
  const int px0 = static_cast<int>(std::floor(left + 0.5));
  const int py0 = static_cast<int>(std::floor(top + 0.5));
  // accumulate coverage-weighted pattern value over a 9x9 pixel footprint
  for (int py = py0; py <= py0 + 8; ++py) {
    if (py < 0 || py >= h) continue;
    for (int px = px0; px <= px0 + 8; ++px) {
      if (px < 0 || px >= w) continue;
      double acc = 0.0;
      double cov = 0.0;
      for (int i = 0; i < 8; ++i) {
        const double cy0 = top + i;
        const double oy =
            std::min<double>(py + 0.5, cy0 + 1.0) - std::max<double>(py - 0.5, cy0);
        if (oy <= 0.0) continue;
        for (int j = 0; j < 8; ++j) {
          const double cx0 = left + j;
          const double ox =
              std::min<double>(px + 0.5, cx0 + 1.0) - std::max<double>(px - 0.5, cx0);
          if (ox <= 0.0) continue;
          acc += ox * oy * cells[static_cast<std::size_t>(i * 8 + j)];
          cov += ox * oy;
        }
      }
      if (cov > 0.0) {
        const double bg = img[static_cast<std::size_t>(py) * w + px];
        const double val = acc + (1.0 - std::min(cov, 1.0)) * bg;
        img[static_cast<std::size_t>(py) * w + px] =
            static_cast<std::uint8_t>(std::lround(std::clamp(val, 0.0, 255.0)));
      }
    }
  }
}

}  // namespace detail

constexpr std::int64_t frame_timestamp_ns(std::int64_t frame_index) {
  return frame_index * 1'000'000'000LL / 60;
}

inline StereoFrame render_stereo_frame(const GroundTruth& gt, const CameraIntrinsics& cam,
                                       std::int64_t frame_index, std::uint64_t seed) {
  StereoFrame f;
  f.t_ns = frame_timestamp_ns(frame_index);
  f.width = cam.width;
  f.height = cam.height;
  f.intrinsics = cam;
  f.left.assign(static_cast<std::size_t>(cam.width) * cam.height, kImageBackground);
  f.right.assign(static_cast<std::size_t>(cam.width) * cam.height, kImageBackground);
  const PoseSample& pose = gt.at(f.t_ns);
  for (const Landmark& lm : gt.landmarks) {
    const Projection pr = project_landmark(pose, lm, cam);
    if (!pr.visible) continue;
    const auto quad = fiducial_quadrants(lm.id, seed);
    detail::splat_fiducial(f.left, f.width, f.height, pr.u, pr.v, quad);
    detail::splat_fiducial(f.right, f.width, f.height, pr.u - pr.disparity, pr.v, quad);
  }
  return f;
}

inline std::int64_t frame_count(const GroundTruth& gt) {
  // frames at t = k/60 s for k in [0, 60 * duration)
  return static_cast<std::int64_t>(std::llround(gt.duration_s * 60.0));
}

inline std::vector<StereoFrame> render_stereo_frames(const GroundTruth& gt,
                                                     const CameraIntrinsics& cam,
                                                     std::uint64_t seed) {
  if (gt.landmarks.empty()) throw ValidationError("ground truth has no landmarks");
  std::vector<StereoFrame> out;
  const std::int64_t n = frame_count(gt);
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) out.push_back(render_stereo_frame(gt, cam, k, seed));
  return out;
}

// ---------------------------------------------------------------------------
// Audio

constexpr int kAudioSampleRate = 8000;
constexpr int kAudioChunkSamples = 800;  // 100 ms
constexpr std::int64_t kAudioChunkPeriodNs = 100'000'000;

struct AudioChunk {
  std::int64_t t_ns = 0;  // chunk start time
  std::vector<std::int16_t> samples;
};

// Fixture vocabulary: each word is a fixed sequence of three band-centered
// tones (bands are the 500 Hz-wide analysis bands of the speech frontend).
struct WordTones {
  std::array<int, 3> bands;
};

inline const std::map<std::string, WordTones>& vocabulary() {
  static const std::map<std::string, WordTones> vocab = {
      {"stop", {{1, 3, 5}}},
      {"go", {{2, 4, 6}}},
      {"left", {{7, 5, 3}}},
      {"right", {{6, 0, 4}}},
  };
  return vocab;
}

constexpr double kToneSegmentSeconds = 0.15;
constexpr double kWordGapSeconds = 0.3;
constexpr double kLeadSilenceSeconds = 0.2;
constexpr double kToneAmplitude = 0.3;  // fraction of full scale

inline double band_center_hz(int band) { return band * 500.0 + 250.0; }

struct AudioOptions {
  double noise_std = 0.0;  // additive gaussian, fraction of full scale
};

inline std::vector<AudioChunk> synthesize_audio(const std::vector<std::string>& words,
                                                std::uint64_t seed,
                                                const AudioOptions& opt = {}) {
  for (const auto& w : words)
    if (!vocabulary().count(w)) throw ValidationError("unknown vocabulary word: " + w);

  const int seg_n = static_cast<int>(kToneSegmentSeconds * kAudioSampleRate);
  const int gap_n = static_cast<int>(kWordGapSeconds * kAudioSampleRate);
  const int lead_n = static_cast<int>(kLeadSilenceSeconds * kAudioSampleRate);

  std::vector<double> signal(static_cast<std::size_t>(lead_n), 0.0);
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    if (wi > 0) signal.insert(signal.end(), static_cast<std::size_t>(gap_n), 0.0);
    const WordTones& tones = vocabulary().at(words[wi]);
    for (int band : tones.bands) {
      const double freq = band_center_hz(band);
      for (int n = 0; n < seg_n; ++n) {
        const double t = static_cast<double>(n) / kAudioSampleRate;
        signal.push_back(kToneAmplitude *
                         std::sin(6.283185307179586476925286766559 * freq * t));
      }
    }
  }
  signal.insert(signal.end(), static_cast<std::size_t>(lead_n), 0.0);

  // pad to a whole number of chunks
  while (signal.size() % kAudioChunkSamples != 0) signal.push_back(0.0);

  Prng rng = Prng(seed).derive(0xa0d10);
  std::vector<AudioChunk> out;
  out.reserve(signal.size() / kAudioChunkSamples);
  for (std::size_t off = 0; off < signal.size(); off += kAudioChunkSamples) {
    AudioChunk c;
    c.t_ns = static_cast<std::int64_t>(off / kAudioChunkSamples) * kAudioChunkPeriodNs;
    c.samples.resize(kAudioChunkSamples);
    for (int i = 0; i < kAudioChunkSamples; ++i) {
      double v = signal[off + i];
      if (opt.noise_std > 0.0) v += rng.gaussian(0.0, opt.noise_std);
      c.samples[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(
          std::lround(std::clamp(v, -1.0, 1.0) * 32767.0));
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Debug CSV dumps (column order documented in docs/formats.md)

inline std::string imu_to_csv(const std::vector<ImuSample>& samples) {
  std::ostringstream os;
  os << "t_ns,accel_x,accel_y,gyro_z\n";
  for (const auto& s : samples)
    os << s.t_ns << ',' << s.accel_x << ',' << s.accel_y << ',' << s.gyro_z << '\n';
  return os.str();
}

inline std::string ground_truth_to_csv(const GroundTruth& gt) {
  std::ostringstream os;
  os << "t_ns,x,y,heading,vx,vy,angular_rate\n";
  for (const auto& p : gt.samples)
    os << p.t_ns << ',' << p.position.x << ',' << p.position.y << ',' << p.heading << ','
       << p.velocity.x << ',' << p.velocity.y << ',' << p.angular_rate << '\n';
  return os.str();
}

}  // namespace robosim
