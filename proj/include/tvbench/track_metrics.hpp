#pragma once

#include <cstdint>
#include <vector>

#include "tvbench/geometry.hpp"

namespace tvbench {

struct TrackedBox {
  std::int64_t id = 0;
  BoundingBox box;
};

/// One entry per frame; track ids are unique within a frame.
struct TrackSet {
  std::vector<std::vector<TrackedBox>> frames;

  std::size_t num_frames() const { return frames.size(); }
  std::size_t num_detections() const;
};

/// Throws kInvalidArgument on duplicate ids within a frame or invalid boxes.
void validate(const TrackSet& tracks);

struct ClearScores {
  double mota = 0.0;  ///< NaN when there are no GT detections.
  double motp = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t gt_dets = 0;
  bool motp_undefined = false;  ///< No true positives; motp reported as 0.
};

struct IdentityScores {
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  bool idp_undefined = false;
  bool idr_undefined = false;
};

struct AlphaScores {
  double alpha = 0.0;
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
};

struct HotaScores {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
  std::vector<AlphaScores> per_alpha;
};

inline constexpr double kDefaultClearIou = 0.5;

/// The 19 localisation thresholds 0.05, 0.10, ..., 0.95.
std::vector<double> hota_alphas();

/// CLEAR-MOT. Per frame, GT and predictions are matched on 1 − IoU with the
/// gate IoU ≥ iou_threshold; an identity switch is a GT track whose matched
/// predicted id differs from its previous match (unmatched frames ignored).
ClearScores compute_clear(const TrackSet& gt, const TrackSet& pred,
                          double iou_threshold = kDefaultClearIou);

/// IDF1 family from the globally optimal GT↔prediction identity bijection,
/// weighting each identity pair by the number of frames in which the two
/// boxes overlap with IoU ≥ iou_threshold.
IdentityScores compute_identity(const TrackSet& gt, const TrackSet& pred,
                                double iou_threshold = kDefaultClearIou);

/// HOTA with DetA/AssA/LocA, averaged over hota_alphas().
HotaScores compute_hota(const TrackSet& gt, const TrackSet& pred);

}  // namespace tvbench
