#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "tvbench/curation.hpp"
#include "tvbench/pose_metrics.hpp"
#include "tvbench/track_metrics.hpp"

namespace tvbench {

struct EngineConfig {
  // [tracking]
  double clear_iou = kDefaultClearIou;
  // [pose]
  double keypoint_confidence = kDefaultKeypointConfidence;
  TimeDynMode time_dyn = TimeDynMode::kPrediction;
  int heatmap_size = 512;  ///< raster side when the clip has no frame size
  // [association], [filter]
  AssociationConfig association;
  FilterConfig filter;
  // [engine]; these do not affect scores and stay out of the hash
  std::size_t threads = 0;  ///< 0 = all hardware threads
  std::string format = "json";
};

/// Parses `key = value` lines grouped under `[section]` headers; `#` starts
/// a comment. Values are numbers, booleans or double-quoted strings.
/// Unknown keys and out-of-range values throw kSchema.
EngineConfig parse_config(std::string_view text, const std::string& origin);
EngineConfig load_config(const std::filesystem::path& path);

/// Sets one `section.key` (e.g. "tracking.clear_iou") from its textual value.
void set_config_value(EngineConfig& config, const std::string& key, const std::string& value);

/// Throws kSchema when a value leaves its documented range.
void check_config(const EngineConfig& config);

/// Sorted `section.key = value` lines of every score-affecting setting.
std::string canonical_config(const EngineConfig& config);

/// 16 hex digits of FNV-1a 64 over canonical_config().
std::string config_hash(const EngineConfig& config);

}  // namespace tvbench
