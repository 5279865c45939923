#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tvbench/geometry.hpp"

namespace tvbench {

inline constexpr std::size_t kNumKeypoints = 133;
inline constexpr double kDefaultKeypointConfidence = 0.3;

/// One person's whole-body pose in one frame (COCO-WholeBody order: 17 body,
/// 6 foot, 68 face, 21 left hand, 21 right hand).
struct KeypointSet {
  std::array<Point2D, kNumKeypoints> points{};
  std::array<double, kNumKeypoints> confidence{};
  std::array<bool, kNumKeypoints> valid{};

  /// All slots invalid with zero confidence.
  static KeypointSet missing() { return {}; }

  /// Marks slots valid where confidence ≥ threshold.
  void apply_confidence_threshold(double threshold);
  std::size_t valid_count() const;
  std::vector<Point2D> valid_points() const;
};

/// frames[t][p]; every frame holds the same number of persons.
struct PoseSequence {
  double fps = 0.0;
  std::vector<std::vector<KeypointSet>> frames;

  std::size_t num_frames() const { return frames.size(); }
  std::size_t num_persons() const { return frames.empty() ? 0 : frames.front().size(); }
};

/// Throws kInvalidArgument unless fps > 0, the person count is constant and
/// every valid keypoint is finite.
void validate(const PoseSequence& seq);

/// Per-keypoint COCO-WholeBody standard deviations (see data/README.md).
const std::array<double, kNumKeypoints>& coco_wholebody_sigmas();

}  // namespace tvbench
