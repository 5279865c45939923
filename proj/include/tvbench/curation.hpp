#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tvbench/geometry.hpp"
#include "tvbench/mask.hpp"
#include "tvbench/pose.hpp"

namespace tvbench {

inline constexpr std::size_t kReidDim = 512;

struct Detection {
  std::size_t frame = 0;
  BoundingBox box;
  double confidence = 1.0;
  Eigen::VectorXd reid;  ///< kReidDim entries, any non-zero norm
};

/// Detections per frame, in frame order.
using DetectionFrames = std::vector<std::vector<Detection>>;

struct Track {
  std::int64_t id = 0;
  std::vector<Detection> members;  ///< ascending frame, at most one per frame
  Eigen::VectorXd reid_sum;        ///< sum of unit-normalised member embeddings

  /// Unit-norm mean embedding (zero vector if the members cancel out).
  Eigen::VectorXd centroid() const;
  std::size_t last_frame() const { return members.back().frame; }
};

struct AssociationConfig {
  double spatial_weight = 0.4;
  double reid_weight = 0.6;
  double max_cost = 0.7;
  std::size_t max_gap = 30;  ///< frames a track may go unmatched and still resume
};

/// Frame-by-frame gated assignment of detections to open tracks on
/// w_s·(1 − IoU(last box, box)) + w_r·(1 − cos(reid, centroid)). Unmatched
/// detections open new tracks (ids 0, 1, ... in order of creation).
std::vector<Track> associate(const DetectionFrames& frames, const AssociationConfig& config = {});

struct SubjectScore {
  std::int64_t track_id = 0;
  double coverage = 0.0;
  double consistency = 0.0;
  double quality = 0.0;
};

inline constexpr double kCoverageWeight = 0.7;
inline constexpr double kConsistencyWeight = 0.3;

/// coverage = member frames / total_frames; consistency = mean of
/// (cos(member, centroid) + 1) / 2; quality = 0.7·coverage + 0.3·consistency.
std::vector<SubjectScore> score_subjects(const std::vector<Track>& tracks, std::size_t total_frames);

/// Two highest-quality tracks among those with coverage ≥ min_coverage
/// (ties: higher coverage, then lower id). nullopt with fewer than two.
std::optional<std::array<std::int64_t, 2>> select_primary(const std::vector<SubjectScore>& scores,
                                                          double min_coverage = 0.40);

/// Per person, per frame: the box a pose should be matched against.
using PersonBoxes = std::vector<std::vector<std::optional<BoundingBox>>>;

/// Tight boxes of each person's masks; empty masks give no box.
PersonBoxes boxes_from_masks(const std::vector<MaskSequence>& masks);

struct PoseAssignment {
  PoseSequence poses;               ///< frames[t][k] for person k
  std::size_t dropped_poses = 0;    ///< poses overlapping no person box
  std::size_t unmatched_slots = 0;  ///< (t, k) with no pose, filled as missing
};

/// Per frame, matches the tight box of each pose's valid keypoints to the
/// person boxes with solve_assignment on 1 − IoU; pairs with IoU 0 are
/// dropped.
PoseAssignment assign_poses(const std::vector<std::vector<KeypointSet>>& poses,
                            const PersonBoxes& persons, double fps);

struct FilterConfig {
  double max_overlap_iou = 0.1;      ///< pass: clip-wide max IoU < this
  double min_area_fraction = 0.02;   ///< pass: fraction > this
  double max_area_fraction = 0.80;   ///< pass: fraction < this
  double min_coverage = 0.40;        ///< a primary subject has coverage ≥ this
  std::size_t required_subjects = 2;
  double min_tracking = 0.90;        ///< pass: tracked fraction > this
};

struct FilterReason {
  std::string rule;  ///< overlap | area | subjects | tracking
  double value = 0.0;
  std::string message;
};

struct ClipVerdict {
  bool accepted = false;
  std::vector<FilterReason> reasons;
  std::optional<std::array<std::int64_t, 2>> selected;
  std::size_t eligible_subjects = 0;
  double max_overlap = 0.0;
  std::vector<double> frame_overlap;  ///< per frame; NaN where a subject is absent
  double min_area_fraction = 0.0;
  double max_area_fraction = 0.0;
  std::array<double, 2> tracking{0.0, 0.0};
};

/// Applies the overlap, area, subject-count and tracking rules to the two
/// selected subjects. Every violated rule is listed with its measurement.
ClipVerdict filter_clip(const std::vector<Track>& tracks, const std::vector<SubjectScore>& scores,
                        std::size_t total_frames, int frame_width, int frame_height,
                        const FilterConfig& config = {});

}  // namespace tvbench
