#include "tvbench/pose.hpp"

#include <cmath>
#include <string>

#include "tvbench/error.hpp"

namespace tvbench {

void KeypointSet::apply_confidence_threshold(double threshold) {
  for (std::size_t k = 0; k < kNumKeypoints; ++k) valid[k] = confidence[k] >= threshold;
}

std::size_t KeypointSet::valid_count() const {
  std::size_t n = 0;
  for (bool v : valid) n += v;
  return n;
}

std::vector<Point2D> KeypointSet::valid_points() const {
  std::vector<Point2D> out;
  for (std::size_t k = 0; k < kNumKeypoints; ++k) {
    if (valid[k]) out.push_back(points[k]);
  }
  return out;
}

void validate(const PoseSequence& seq) {
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) {
    throw Error(ErrorCode::kInvalidArgument, "pose sequence: fps must be positive");
  }
  const std::size_t persons = seq.num_persons();
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    if (seq.frames[t].size() != persons) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pose sequence: frame " + std::to_string(t) + " has " +
                      std::to_string(seq.frames[t].size()) + " persons, expected " +
                      std::to_string(persons));
    }
    for (const KeypointSet& ks : seq.frames[t]) {
      for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        if (ks.valid[k] && !(std::isfinite(ks.points[k].x) && std::isfinite(ks.points[k].y))) {
          throw Error(ErrorCode::kInvalidArgument,
                      "pose sequence: non-finite keypoint at frame " + std::to_string(t));
        }
      }
    }
  }
}

const std::array<double, kNumKeypoints>& coco_wholebody_sigmas() {
  static constexpr std::array<double, kNumKeypoints> kSigmas = {
      // body
      0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072, 0.062, 0.062, 0.107, 0.107,
      0.087, 0.087, 0.089, 0.089,
      // foot
      0.068, 0.066, 0.066, 0.092, 0.094, 0.094,
      // face
      0.042, 0.043, 0.044, 0.043, 0.040, 0.035, 0.031, 0.025, 0.020, 0.023, 0.029, 0.032, 0.037,
      0.038, 0.043, 0.041, 0.045, 0.013, 0.012, 0.011, 0.011, 0.012, 0.012, 0.011, 0.011, 0.013,
      0.015, 0.009, 0.007, 0.007, 0.007, 0.012, 0.009, 0.008, 0.016, 0.010, 0.017, 0.011, 0.009,
      0.011, 0.009, 0.007, 0.013, 0.008, 0.011, 0.012, 0.010, 0.034, 0.008, 0.008, 0.009, 0.008,
      0.008, 0.007, 0.010, 0.008, 0.009, 0.009, 0.009, 0.007, 0.007, 0.008, 0.011, 0.008, 0.008,
      0.008, 0.010, 0.008,
      // left hand
      0.029, 0.022, 0.035, 0.037, 0.047, 0.026, 0.025, 0.024, 0.035, 0.018, 0.024, 0.022, 0.026,
      0.017, 0.021, 0.021, 0.032, 0.020, 0.019, 0.022, 0.031,
      // right hand
      0.029, 0.022, 0.035, 0.037, 0.047, 0.026, 0.025, 0.024, 0.035, 0.018, 0.024, 0.022, 0.026,
      0.017, 0.021, 0.021, 0.032, 0.020, 0.019, 0.022, 0.031};
  return kSigmas;
}

}  // namespace tvbench
