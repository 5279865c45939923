#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tvbench/gaussian.hpp"
#include "tvbench/geometry.hpp"
#include "tvbench/image.hpp"
#include "tvbench/pose.hpp"

namespace tvbench {

struct MpjpeResult {
  double error_px = 0.0;
  std::size_t keypoints = 0;         ///< (t, p, j) entries averaged
  std::size_t unaligned_frames = 0;  ///< frames left at the identity transform
};

/// Mean per-joint position error after aligning each prediction frame onto
/// the GT frame with a similarity fitted to the keypoints valid in both
/// (all persons of the frame jointly). Frames with fewer than two shared
/// keypoints, or a degenerate fit, keep the identity transform.
MpjpeResult mpjpe_2d(const PoseSequence& gt, const PoseSequence& pred);

/// Person area A per frame and person: areas[t][p] in px².
using PersonAreas = std::vector<std::vector<double>>;

inline constexpr double kBoxAreaToPersonArea = 0.53;

/// Mask pixel count when available and positive, else 0.53 × box area.
/// Throws kInsufficientData when neither is available.
double resolve_person_area(std::optional<double> mask_area, std::optional<BoundingBox> box);

/// Per frame, mean of exp(−d² / (2σ²(A + 1e−6))) over keypoints valid in
/// both sequences; averaged over frames that have any such keypoint.
double oks(const PoseSequence& gt, const PoseSequence& pred, const PersonAreas& areas);

inline constexpr double kHeatmapSigma = 4.0;

/// Max-combined unit Gaussian bumps (σ = 4 px, truncated at 4σ) for every
/// valid keypoint of every person, on a width × height grid whose pixel
/// (x, y) sits at coordinate (x, y).
Plane rasterize_keypoints(std::span<const KeypointSet> persons, int width, int height,
                          double sigma = kHeatmapSigma);

/// Mean over frames of SSIM between the GT and predicted heatmaps
/// (dynamic range 1).
double pose_heat_ssim(const PoseSequence& gt, const PoseSequence& pred, int width, int height);

/// RMS of the third forward difference × f³ over every stencil whose four
/// samples are valid. Needs T ≥ 4.
double smooth_rms(const PoseSequence& seq);

enum class TimeDynMode {
  kPrediction,   ///< RMS of the prediction's acceleration alone
  kDifference,  ///< RMS of (prediction − GT) acceleration on shared stencils
};

/// Second forward difference × f². Needs T ≥ 3 in both sequences.
double time_dyn_rmse(const PoseSequence& pred, const PoseSequence& gt,
                     TimeDynMode mode = TimeDynMode::kPrediction);

/// Gaussian fitted to every first difference × f of a valid keypoint pair
/// across consecutive frames.
GaussianSummary velocity_summary(const PoseSequence& seq);

/// Fréchet distance between the GT and predicted velocity Gaussians.
double fvmd(const PoseSequence& gt, const PoseSequence& pred);

}  // namespace tvbench
