#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvbench/curation.hpp"
#include "tvbench/image.hpp"
#include "tvbench/mask.hpp"
#include "tvbench/pose.hpp"
#include "tvbench/quality_metrics.hpp"
#include "tvbench/track_metrics.hpp"

namespace tvbench::io {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

/// Whole-file read; missing or unreadable files throw kIo.
std::string read_text(const fs::path& path);
/// Creates parent directories as needed.
void write_text(const fs::path& path, std::string_view text);
void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes);

/// Regular files in `dir` whose extension is in `extensions` (lower case,
/// with dot), ordered by the last run of digits in the stem, then by name.
std::vector<fs::path> list_numbered(const fs::path& dir, const std::vector<std::string>& extensions);

// Tracks: {frames: [{t, detections: [{id, bbox: [x0, y0, x1, y1]}]}], num_frames?}
TrackSet parse_tracks(std::string_view text, const std::string& origin);
TrackSet load_tracks(const fs::path& path);
void save_tracks(const fs::path& path, const TrackSet& tracks);

// Poses: {fps?, num_frames?, persons: [{id, frames: [{t, keypoints: [[x, y, c] × 133]}]}]}
// `default_fps` is used when the file has none.
PoseSequence parse_poses(std::string_view text, const std::string& origin, double confidence_threshold,
                         std::optional<double> default_fps = std::nullopt);
PoseSequence load_poses(const fs::path& path, double confidence_threshold = kDefaultKeypointConfidence,
                        std::optional<double> default_fps = std::nullopt);
void save_poses(const fs::path& path, const PoseSequence& poses);

// Masks: {width, height, counts}. A sequence is a directory of numbered
// per-frame files or one file holding {frames: [...]}.
BinaryMask parse_mask(std::string_view text, const std::string& origin);
MaskSequence load_mask_sequence(const fs::path& path);
void save_mask(const fs::path& path, const BinaryMask& mask);

// Frames: numbered .png or .ppm (binary P6, maxval 255) files.
Frame load_frame(const fs::path& path);
FrameSequence load_frames(const fs::path& dir);
void save_ppm(const fs::path& path, const Frame& frame);
void save_png(const fs::path& path, const Frame& frame);

// Binary feature files, little-endian.
FeatureSet load_features(const fs::path& path);
void save_features(const fs::path& path, const FeatureSet& features);
LayerFeatureMaps load_layer_features(const fs::path& path);
void save_layer_features(const fs::path& path, const LayerFeatureMaps& maps);
/// Numbered .tvlf files, one per frame.
std::vector<LayerFeatureMaps> load_layer_feature_dir(const fs::path& dir);

struct FeaturePaths {
  fs::path gt;
  fs::path pred;
};

struct ClipFeatures {
  std::optional<FeaturePaths> fvd;
  std::optional<FeaturePaths> fid;
  std::optional<FeaturePaths> clip_fid;
  std::optional<FeaturePaths> clip;
  std::optional<FeaturePaths> lpips;  ///< directories of per-frame layer files
  std::optional<FeaturePaths> dists;
};

/// Every path is absolute.
struct ClipManifest {
  fs::path source;
  std::string clip_id;
  double fps = 0.0;
  std::optional<int> frame_width;
  std::optional<int> frame_height;
  std::optional<fs::path> gt_frames;
  std::optional<fs::path> pred_frames;
  std::optional<fs::path> gt_poses;
  std::optional<fs::path> pred_poses;
  std::optional<fs::path> gt_tracks;
  std::optional<fs::path> pred_tracks;
  std::vector<fs::path> masks;  ///< person k, same order as the pose file
  ClipFeatures features;
  std::vector<ClipFeatures> masked_features;
};

ClipManifest parse_manifest(std::string_view text, const fs::path& source);
ClipManifest load_manifest(const fs::path& path);
void save_manifest(const fs::path& path, const ClipManifest& manifest);

/// {schema_version, clips: [manifest paths]}; returns absolute paths.
std::vector<fs::path> load_corpus(const fs::path& path);
void save_corpus(const fs::path& path, const std::vector<fs::path>& manifests);

struct DetectionDump {
  DetectionFrames frames;
  std::optional<int> width;
  std::optional<int> height;
};

/// JSON lines {t, width?, height?, detections: [{bbox, confidence, reid}]}.
DetectionDump load_detection_dump(const fs::path& path);
void save_detection_dump(const fs::path& path, const DetectionDump& dump);

/// JSON lines {t, poses: [[[x, y, c] × 133], ...]}; `frames` fixes the
/// length when given.
std::vector<std::vector<KeypointSet>> load_pose_dump(const fs::path& path, double confidence_threshold,
                                                     std::optional<std::size_t> frames = std::nullopt);
void save_pose_dump(const fs::path& path, const std::vector<std::vector<KeypointSet>>& poses);

}  // namespace tvbench::io
