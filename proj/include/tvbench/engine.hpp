#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tvbench/config.hpp"
#include "tvbench/curation.hpp"
#include "tvbench/io.hpp"
#include "tvbench/report.hpp"

namespace tvbench {

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct ClipTiming {
  std::string clip_id;
  double seconds = 0.0;
  std::vector<StageTime> stages;
};

/// Scores one clip on report scale. Missing inputs a track needs, schema
/// problems and shape mismatches throw; metrics that are merely undefined for
/// the data (too few frames, no valid keypoints, ...) become NaN with a flag.
ClipReport evaluate_clip(const io::ClipManifest& manifest, TrackSelection track, const EngineConfig& config,
                         ClipTiming* timing = nullptr);

struct EvaluationResult {
  CorpusReport report;
  std::vector<ClipTiming> timings;
  bool internal_error = false;  ///< some clip failed with a non-data error
};

/// Evaluates every manifest on config.threads workers (0 = all cores). Clip
/// order in the report follows `manifests`. Failing clips are listed under
/// report.errors.
EvaluationResult evaluate_corpus(const std::vector<std::filesystem::path>& manifests, TrackSelection track,
                                 const EngineConfig& config);

/// Fixed-width per-clip stage timing table.
std::string format_profile(const std::vector<ClipTiming>& timings);

struct CurationInputs {
  std::string clip_id;
  std::filesystem::path detections;
  std::optional<std::filesystem::path> poses;
  std::optional<std::filesystem::path> masks;  ///< holds one numbered subdirectory per selected subject
  std::optional<int> frame_width;
  std::optional<int> frame_height;
  double fps = 30.0;  ///< stamped on the assigned pose sequences
};

struct CurationOutcome {
  std::string clip_id;
  std::size_t total_frames = 0;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<Track> tracks;
  std::vector<SubjectScore> scores;
  ClipVerdict verdict;
  std::optional<PoseAssignment> assignment;
  std::string person_boxes;  ///< "masks" or "tracks"
};

CurationOutcome curate_clip(const CurationInputs& inputs, const EngineConfig& config);

/// Pairs d/<clip>.jsonl with p/<clip>.jsonl and m/<clip>/ by clip name.
std::vector<CurationInputs> discover_curation_inputs(const std::filesystem::path& detections,
                                                     const std::optional<std::filesystem::path>& poses,
                                                     const std::optional<std::filesystem::path>& masks,
                                                     std::optional<int> frame_width, std::optional<int> frame_height,
                                                     double fps = 30.0);

std::string curation_manifest_json(const CurationOutcome& outcome, const std::string& poses_file);

/// Writes <out>/<clip>.json and, when poses were assigned, <clip>.poses.json.
void write_curation(const std::filesystem::path& out_dir, const CurationOutcome& outcome);

/// Throws kSchema unless `text` is a well-formed curation manifest.
void check_curation_manifest(std::string_view text, const std::string& origin);

}  // namespace tvbench
