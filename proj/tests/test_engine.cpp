#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "support.hpp"
#include "tvbench/engine.hpp"
#include "tvbench/error.hpp"

using namespace tvbench;
namespace fs = std::filesystem;

namespace {

struct SmallCorpus {
  fs::path dir;
  FixtureCorpus corpus;
  std::vector<fs::path> manifests;
};

SmallCorpus make_corpus(const std::string& name, bool perfect, std::size_t clips = 2) {
  SmallCorpus c;
  c.dir = tvtest::scratch_dir(name);
  FixtureOptions o;
  o.seed = 17;
  o.clips = clips;
  o.frames = 32;
  o.width = 64;
  o.height = 48;
  o.perfect = perfect;
  c.corpus = write_fixture_corpus(c.dir, o);
  c.manifests = io::load_corpus(c.corpus.corpus);
  return c;
}

}  // namespace

TEST(Engine, PerfectCorpusAllTracks) {
  const SmallCorpus c = make_corpus("engine_perfect", true);
  const EvaluationResult r = evaluate_corpus(c.manifests, TrackSelection::kAll, EngineConfig{});
  ASSERT_TRUE(r.report.errors.empty());
  ASSERT_EQ(r.report.clips.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = r.report.clips[i].metrics;
    for (const char* k : {"HOTA", "DetA", "AssA", "LocA", "MOTA", "MOTP", "IDF1"}) EXPECT_DOUBLE_EQ(m.at(k), 100.0) << k;
    EXPECT_EQ(m.at("IDSW"), 0.0);
    EXPECT_NEAR(m.at("MPJPE_2D"), 0.0, 1e-9);
    EXPECT_DOUBLE_EQ(m.at("OKS"), 1.0);
    EXPECT_NEAR(m.at("PoseSSIM"), 1.0, 1e-12);
    EXPECT_NEAR(m.at("FVMD"), 0.0, 1e-9);
    EXPECT_NEAR(m.at("SmoothRMS"), c.corpus.clips[i].smooth_rms * 1e-6, 1e-9 * m.at("SmoothRMS"));
    EXPECT_NEAR(m.at("TimeDynRMSE"), c.corpus.clips[i].time_dyn_rmse * 1e-4, 1e-9 * m.at("TimeDynRMSE"));
    EXPECT_EQ(m.at("L1"), 0.0);
    EXPECT_EQ(m.at("PSNR"), 100.0);
    EXPECT_DOUBLE_EQ(m.at("SSIM"), 1.0);
    EXPECT_NEAR(m.at("FVD"), 0.0, 1e-4);
    EXPECT_NEAR(m.at("FID"), 0.0, 1e-4);
    EXPECT_NEAR(m.at("LPIPS"), 0.0, 1e-12);
    EXPECT_NEAR(m.at("DISTS"), 0.0, 1e-12);
    EXPECT_NEAR(m.at("CLIP"), 1.0, 1e-6);
    EXPECT_EQ(m.at("masked_L1"), 0.0);
    EXPECT_TRUE(r.report.clips[i].flags.empty());
  }
}

TEST(Engine, NoisyCorpusScoresBelowPerfect) {
  const SmallCorpus c = make_corpus("engine_noisy", false);
  const EvaluationResult r = evaluate_corpus(c.manifests, TrackSelection::kAll, EngineConfig{});
  ASSERT_TRUE(r.report.errors.empty());
  const auto& even = r.report.clips[0].metrics;
  const auto& odd = r.report.clips[1].metrics;
  EXPECT_LT(even.at("OKS"), 1.0);
  EXPECT_GT(even.at("MPJPE_2D"), 0.5);
  EXPECT_GT(even.at("L1"), 0.0);
  EXPECT_LT(even.at("PSNR"), 100.0);
  EXPECT_GT(even.at("FVD"), 0.0);
  EXPECT_EQ(even.at("IDSW"), 0.0);
  EXPECT_EQ(odd.at("IDSW"), 2.0);
  EXPECT_LT(odd.at("IDF1"), even.at("IDF1"));
}

TEST(Engine, ThreadCountDoesNotChangeReport) {
  const SmallCorpus c = make_corpus("engine_threads", false, 3);
  EngineConfig one, four;
  one.threads = 1;
  four.threads = 4;
  const std::string a = write_report_json(evaluate_corpus(c.manifests, TrackSelection::kAll, one).report);
  const std::string b = write_report_json(evaluate_corpus(c.manifests, TrackSelection::kAll, four).report);
  EXPECT_EQ(a, b);
}

TEST(Engine, ClipErrorsAreCollected) {
  SmallCorpus c = make_corpus("engine_errors", true, 3);
  io::write_text(c.manifests[1].parent_path() / "gt_tracks.json", "{\"frames\": 7}");
  const EvaluationResult r = evaluate_corpus(c.manifests, TrackSelection::kIdentity, EngineConfig{});
  ASSERT_EQ(r.report.clips.size(), 2u);
  ASSERT_EQ(r.report.errors.size(), 1u);
  EXPECT_EQ(r.report.errors[0].clip, "clip_001");
  EXPECT_EQ(r.report.errors[0].code, "schema");
  EXPECT_FALSE(r.internal_error);
  EXPECT_EQ(r.report.clips[1].clip_id, "clip_002");
}

TEST(Engine, MissingInputsForTrackIsAnError) {
  SmallCorpus c = make_corpus("engine_missing", true, 1);
  io::ClipManifest m = io::load_manifest(c.manifests[0]);
  m.gt_frames.reset();
  EXPECT_THROW(evaluate_clip(m, TrackSelection::kQuality, EngineConfig{}), Error);
  EXPECT_NO_THROW(evaluate_clip(m, TrackSelection::kIdentity, EngineConfig{}));
}

TEST(Engine, UndefinedMetricsBecomeFlaggedNaN) {
  SmallCorpus c = make_corpus("engine_nan", true, 1);
  io::ClipManifest m = io::load_manifest(c.manifests[0]);
  // Blank every prediction keypoint: pose metrics that need shared keypoints
  // are undefined but the clip still reports.
  PoseSequence pred = io::load_poses(*m.pred_poses);
  for (auto& f : pred.frames) {
    for (auto& ks : f) ks = KeypointSet::missing();
  }
  io::save_poses(*m.pred_poses, pred);
  const ClipReport r = evaluate_clip(m, TrackSelection::kInteraction, EngineConfig{});
  EXPECT_TRUE(std::isnan(r.metrics.at("OKS")));
  EXPECT_TRUE(std::isnan(r.metrics.at("MPJPE_2D")));
  EXPECT_FALSE(r.flags.empty());
}

TEST(Engine, ProfileTable) {
  const SmallCorpus c = make_corpus("engine_profile", true, 1);
  const EvaluationResult r = evaluate_corpus(c.manifests, TrackSelection::kIdentity, EngineConfig{});
  const std::string table = format_profile(r.timings);
  EXPECT_NE(table.find("clip_000"), std::string::npos);
}

TEST(Curation, ScenarioSuiteEndToEnd) {
  const fs::path dir = tvtest::scratch_dir("curation_e2e");
  const auto scenarios = filter_rule_scenarios();
  write_curation_fixtures(dir, scenarios, 5);
  const auto inputs = discover_curation_inputs(dir / "d", dir / "p", dir / "m", std::nullopt, std::nullopt, 30.0);
  ASSERT_EQ(inputs.size(), scenarios.size());
  for (const CurationInputs& in : inputs) {
    const auto s = std::find_if(scenarios.begin(), scenarios.end(), [&](const auto& x) { return x.name == in.clip_id; });
    ASSERT_NE(s, scenarios.end());
    const CurationOutcome out = curate_clip(in, EngineConfig{});
    EXPECT_EQ(out.verdict.accepted, s->expect_accepted) << in.clip_id;
    EXPECT_EQ(out.frame_width, 200);
    write_curation(dir / "out", out);
    const std::string text = io::read_text(dir / "out" / (in.clip_id + ".json"));
    EXPECT_NO_THROW(check_curation_manifest(text, in.clip_id));
    if (s->expect_accepted) {
      ASSERT_TRUE(out.assignment);
      EXPECT_EQ(out.assignment->poses.num_persons(), 2u);
      EXPECT_EQ(out.person_boxes, "masks");
      const PoseSequence poses = io::load_poses(dir / "out" / (in.clip_id + ".poses.json"));
      EXPECT_EQ(poses.num_persons(), 2u);
    }
  }
}

TEST(Curation, ManifestValidatorCatchesInconsistency) {
  const fs::path dir = tvtest::scratch_dir("curation_schema");
  auto scenarios = filter_rule_scenarios();
  scenarios.resize(1);
  write_curation_fixtures(dir, scenarios, 5);
  const auto inputs = discover_curation_inputs(dir / "d", std::nullopt, std::nullopt, std::nullopt, std::nullopt);
  const CurationOutcome out = curate_clip(inputs.at(0), EngineConfig{});
  nlohmann::json j = nlohmann::json::parse(curation_manifest_json(out, ""));
  j["verdict"]["accepted"] = false;
  EXPECT_THROW(check_curation_manifest(j.dump(), "x"), Error);
  j = nlohmann::json::parse(curation_manifest_json(out, ""));
  j["scores"][0]["quality"] = 0.1;
  EXPECT_THROW(check_curation_manifest(j.dump(), "x"), Error);
  EXPECT_THROW(check_curation_manifest("[]", "x"), Error);
}
