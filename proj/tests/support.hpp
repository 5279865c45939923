#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "tvbench/fixtures.hpp"
#include "tvbench/image.hpp"
#include "tvbench/pose.hpp"
#include "tvbench/track_metrics.hpp"

namespace tvtest {

using tvbench::Rng;

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tvbench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline tvbench::Frame random_frame(Rng& rng, int w, int h) {
  tvbench::Frame f;
  f.width = w;
  f.height = h;
  f.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : f.rgb) v = static_cast<std::uint8_t>(rng.integer(0, 255));
  return f;
}

inline tvbench::FrameSequence random_frames(Rng& rng, std::size_t t, int w, int h) {
  tvbench::FrameSequence s;
  for (std::size_t i = 0; i < t; ++i) s.frames.push_back(random_frame(rng, w, h));
  return s;
}

/// Copy of `s` with every channel value moved by up to ±amp.
inline tvbench::FrameSequence jitter(const tvbench::FrameSequence& s, Rng& rng, int amp) {
  tvbench::FrameSequence out = s;
  for (auto& f : out.frames) {
    for (auto& v : f.rgb) v = static_cast<std::uint8_t>(std::clamp<std::int64_t>(v + rng.integer(-amp, amp), 0, 255));
  }
  return out;
}

/// Random pose clip: `persons` people inside a w × h canvas, a fraction
/// `invalid` of keypoints marked invalid.
inline tvbench::PoseSequence random_poses(Rng& rng, std::size_t frames, std::size_t persons, double w, double h,
                                          double invalid = 0.0, double fps = 30.0) {
  tvbench::PoseSequence seq;
  seq.fps = fps;
  seq.frames.assign(frames, std::vector<tvbench::KeypointSet>(persons));
  for (auto& frame : seq.frames) {
    for (auto& ks : frame) {
      for (std::size_t j = 0; j < tvbench::kNumKeypoints; ++j) {
        ks.points[j] = {rng.uniform(0.0, w), rng.uniform(0.0, h)};
        ks.valid[j] = rng.uniform() >= invalid;
        ks.confidence[j] = ks.valid[j] ? 1.0 : 0.0;
      }
    }
  }
  return seq;
}

inline tvbench::BoundingBox box(double x0, double y0, double x1, double y1) { return {x0, y0, x1, y1}; }

}  // namespace tvtest
