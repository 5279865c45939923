#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tvbench/curation.hpp"
#include "tvbench/image.hpp"
#include "tvbench/io.hpp"
#include "tvbench/mask.hpp"
#include "tvbench/pose.hpp"
#include "tvbench/track_metrics.hpp"

namespace tvbench {

/// Seeded generator with fixed conversions, so a seed reproduces the same
/// numbers with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct FixtureOptions {
  std::uint64_t seed = 1;
  std::size_t clips = 10;
  std::size_t frames = 32;
  int width = 128;
  int height = 96;
  double fps = 30.0;
  bool perfect = true;  ///< prediction is an exact copy of the ground truth
  bool video = true;    ///< also write frames, masks and feature files
};

/// Everything one synthetic two-person clip holds in memory.
struct SyntheticClip {
  std::string clip_id;
  PoseSequence gt_poses;
  PoseSequence pred_poses;
  TrackSet gt_tracks;
  TrackSet pred_tracks;
  std::vector<MaskSequence> masks;  ///< empty without video
  FrameSequence gt_frames;
  FrameSequence pred_frames;
  /// Analytic values for the prediction's trajectories (only meaningful
  /// for perfect clips, where they are exact).
  double smooth_rms = 0.0;
  double time_dyn_rmse = 0.0;
};

/// Two persons translating rigidly along d(t) = v·t + a·t²/2 + j·t³/6 (frame
/// units), drawn as textured boxes over a textured background.
SyntheticClip make_synthetic_clip(const FixtureOptions& options, std::size_t index);

struct FixtureClipInfo {
  std::string clip_id;
  std::filesystem::path manifest;
  double smooth_rms = 0.0;
  double time_dyn_rmse = 0.0;
};

struct FixtureCorpus {
  std::filesystem::path corpus;
  std::vector<FixtureClipInfo> clips;
};

/// Writes <out>/corpus.json, <out>/expected.json and one directory per clip.
FixtureCorpus write_fixture_corpus(const std::filesystem::path& out, const FixtureOptions& options);

struct SubjectSpec {
  BoundingBox box;
  std::vector<bool> present;  ///< per frame
  int reid_axis = 0;          ///< embedding is the unit vector on this axis
};

struct CurationScenario {
  std::string name;
  int width = 200;
  int height = 100;
  std::size_t frames = 100;
  std::vector<SubjectSpec> subjects;
  bool expect_accepted = true;
  std::string expect_rule;  ///< the single rule expected to fire when rejected
};

/// Detection dump of a scenario; detections appear in subject order.
io::DetectionDump scenario_detections(const CurationScenario& scenario);
/// One pose per present subject, keypoints spread inside its box.
std::vector<std::vector<KeypointSet>> scenario_poses(const CurationScenario& scenario, std::uint64_t seed);
/// Box-shaped masks for the first two subjects.
std::vector<MaskSequence> scenario_masks(const CurationScenario& scenario);

/// Twelve clips exercising each clip filtering rule, including the exact
/// threshold boundaries.
std::vector<CurationScenario> filter_rule_scenarios();

/// Writes d/<name>.jsonl, p/<name>.jsonl and m/<name>/<k>/ for each scenario.
void write_curation_fixtures(const std::filesystem::path& out, const std::vector<CurationScenario>& scenarios,
                             std::uint64_t seed);

}  // namespace tvbench
