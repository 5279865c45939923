#include <gtest/gtest.h>

#include <fstream>
#include <functional>

#include "support.hpp"
#include "tvbench/error.hpp"
#include "tvbench/io.hpp"

using namespace tvbench;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Io, TracksRoundTrip) {
  const auto dir = tvtest::scratch_dir("tracks");
  TrackSet s;
  s.frames = {{{1, {0, 0, 10.5, 20}}, {7, {3, 4, 5, 6}}}, {}, {{7, {1, 1, 2, 2}}}};
  io::save_tracks(dir / "t.json", s);
  const TrackSet back = io::load_tracks(dir / "t.json");
  ASSERT_EQ(back.num_frames(), 3u);
  EXPECT_EQ(back.frames[0][1].id, 7);
  EXPECT_EQ(back.frames[0][0].box, (BoundingBox{0, 0, 10.5, 20}));
  EXPECT_TRUE(back.frames[1].empty());
}

TEST(Io, TrackSchemaErrorsNameTheField) {
  try {
    io::parse_tracks(R"({"frames":[{"t":0,"detections":[{"id":1,"bbox":[0,0,1]}]}]})", "x.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(std::string(e.what()).find("frames[0].detections[0].bbox"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { io::parse_tracks("{not json", "x"); }), ErrorCode::kSchema);
  EXPECT_EQ(code_of([] { io::load_tracks("/nonexistent/t.json"); }), ErrorCode::kIo);
}

TEST(Io, PosesRoundTripWithThreshold) {
  const auto dir = tvtest::scratch_dir("poses");
  Rng rng(301);
  PoseSequence s = tvtest::random_poses(rng, 3, 2, 100, 100, 0.2, 25.0);
  for (auto& f : s.frames) {
    for (auto& ks : f) {
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        ks.confidence[j] = ks.valid[j] ? 0.9 : 0.1;
        ks.points[j] = {std::round(ks.points[j].x * 4) / 4, std::round(ks.points[j].y * 4) / 4};
      }
    }
  }
  io::save_poses(dir / "p.json", s);
  const PoseSequence back = io::load_poses(dir / "p.json", 0.3);
  EXPECT_EQ(back.fps, 25.0);
  ASSERT_EQ(back.num_frames(), 3u);
  ASSERT_EQ(back.num_persons(), 2u);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        EXPECT_EQ(back.frames[t][p].valid[j], s.frames[t][p].valid[j]);
        if (s.frames[t][p].valid[j]) EXPECT_EQ(back.frames[t][p].points[j], s.frames[t][p].points[j]);
      }
    }
  }
}

TEST(Io, PoseFpsFallsBack) {
  const std::string text = R"({"persons":[{"id":0,"frames":[]}],"num_frames":2})";
  EXPECT_EQ(io::parse_poses(text, "p", 0.3, 12.0).fps, 12.0);
  EXPECT_EQ(code_of([&] { io::parse_poses(R"({"persons":[{"id":0,"frames":[{"t":0,"keypoints":[[1,2,3]]}]}]})", "p", 0.3, 30.0); }),
            ErrorCode::kSchema);
}

TEST(Io, MaskRoundTrip) {
  const auto dir = tvtest::scratch_dir("masks");
  const BinaryMask m = BinaryMask::from_box(9, 7, {1, 2, 5, 6});
  io::save_mask(dir / "seq" / "000000.json", m);
  io::save_mask(dir / "seq" / "000001.json", BinaryMask::filled(9, 7, false));
  EXPECT_EQ(io::parse_mask(io::read_text(dir / "seq" / "000000.json"), "m"), m);
  const MaskSequence seq = io::load_mask_sequence(dir / "seq");
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0], m);
  EXPECT_TRUE(seq[1].empty());
  EXPECT_EQ(code_of([] { io::parse_mask(R"({"size":[2,2],"counts":[1,1]})", "m"); }), ErrorCode::kSchema);
}

TEST(Io, FramesPngAndPpm) {
  const auto dir = tvtest::scratch_dir("frames");
  Rng rng(302);
  const Frame f = tvtest::random_frame(rng, 13, 7);
  io::save_png(dir / "a" / "000000.png", f);
  io::save_ppm(dir / "a" / "000001.ppm", f);
  const FrameSequence s = io::load_frames(dir / "a");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.frames[0].rgb, f.rgb);
  EXPECT_EQ(s.frames[1].rgb, f.rgb);
  io::write_text(dir / "bad.ppm", "P6\n2 2\n255\nabc");
  EXPECT_THROW(io::load_frame(dir / "bad.ppm"), Error);
}

TEST(Io, NumberedListingSortsNumerically) {
  const auto dir = tvtest::scratch_dir("numbered");
  for (const char* n : {"f10.json", "f2.json", "f1.json", "notes.txt"}) io::write_text(dir / n, "{}");
  const auto files = io::list_numbered(dir, {".json"});
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "f1.json");
  EXPECT_EQ(files[2].filename(), "f10.json");
}

TEST(Io, FeatureFilesRoundTrip) {
  const auto dir = tvtest::scratch_dir("features");
  FeatureSet f;
  f.tag = "i3d";
  f.vectors = Eigen::MatrixXd(3, 4);
  for (Eigen::Index i = 0; i < 12; ++i) f.vectors.data()[i] = static_cast<float>(0.1 * i - 0.4);
  io::save_features(dir / "f.tvbf", f);
  const FeatureSet back = io::load_features(dir / "f.tvbf");
  EXPECT_EQ(back.tag, "i3d");
  EXPECT_EQ(back.vectors, f.vectors);

  // Truncated payload.
  std::ifstream in(dir / "f.tvbf", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  bytes.resize(bytes.size() - 2);
  io::write_bytes(dir / "short.tvbf", bytes);
  EXPECT_EQ(code_of([&] { io::load_features(dir / "short.tvbf"); }), ErrorCode::kSchema);
  bytes[0] = 'X';
  io::write_bytes(dir / "magic.tvbf", bytes);
  EXPECT_EQ(code_of([&] { io::load_features(dir / "magic.tvbf"); }), ErrorCode::kSchema);

  LayerFeatureMaps maps;
  maps.layers.push_back(FeatureLayer{2, 1, 3, {0.5, 0.25}, {1, 2, 3, 4, 5, 6}});
  io::save_layer_features(dir / "l" / "000000.tvlf", maps);
  const auto seq = io::load_layer_feature_dir(dir / "l");
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq[0].layers[0].values, maps.layers[0].values);
  EXPECT_EQ(seq[0].layers[0].weights, maps.layers[0].weights);
}

TEST(Io, ManifestRoundTripAndMissingPaths) {
  const auto dir = tvtest::scratch_dir("manifest");
  io::write_text(dir / "gt.json", "{}");
  io::write_text(dir / "pred.json", "{}");
  io::ClipManifest m;
  m.clip_id = "c1";
  m.fps = 24;
  m.frame_width = 64;
  m.gt_tracks = dir / "gt.json";
  m.pred_tracks = dir / "pred.json";
  io::save_manifest(dir / "sub" / "manifest.json", m);
  const std::string text = io::read_text(dir / "sub" / "manifest.json");
  EXPECT_NE(text.find("\"../gt.json\""), std::string::npos) << text;
  const io::ClipManifest back = io::load_manifest(dir / "sub" / "manifest.json");
  EXPECT_EQ(back.clip_id, "c1");
  EXPECT_EQ(*back.gt_tracks, fs::absolute(dir / "gt.json").lexically_normal());
  EXPECT_EQ(back.frame_width, 64);
  EXPECT_FALSE(back.frame_height);

  EXPECT_EQ(code_of([&] { io::parse_manifest(R"({"schema_version":1,"clip_id":"x","fps":30,"gt_tracks":"nope.json"})", dir / "m.json"); }),
            ErrorCode::kIo);
  EXPECT_EQ(code_of([&] { io::parse_manifest(R"({"clip_id":"x","fps":30})", dir / "m.json"); }), ErrorCode::kSchema);
  EXPECT_EQ(code_of([&] { io::parse_manifest(R"({"schema_version":1,"clip_id":"x","fps":0})", dir / "m.json"); }),
            ErrorCode::kSchema);
}

TEST(Io, CorpusAndDumps) {
  const auto dir = tvtest::scratch_dir("dumps");
  io::save_corpus(dir / "corpus.json", {dir / "a" / "manifest.json", dir / "b" / "manifest.json"});
  const auto clips = io::load_corpus(dir / "corpus.json");
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[1], fs::absolute(dir / "b" / "manifest.json"));

  CurationScenario s = filter_rule_scenarios().front();
  s.frames = 5;
  for (auto& sub : s.subjects) sub.present.resize(5);
  const io::DetectionDump dump = scenario_detections(s);
  io::save_detection_dump(dir / "d.jsonl", dump);
  const io::DetectionDump back = io::load_detection_dump(dir / "d.jsonl");
  EXPECT_EQ(back.width, 200);
  ASSERT_EQ(back.frames.size(), 5u);
  EXPECT_EQ(back.frames[2][1].box, dump.frames[2][1].box);
  EXPECT_EQ(back.frames[2][1].reid, dump.frames[2][1].reid);

  const auto poses = scenario_poses(s, 3);
  io::save_pose_dump(dir / "p.jsonl", poses);
  const auto pb = io::load_pose_dump(dir / "p.jsonl", 0.3, 7);
  ASSERT_EQ(pb.size(), 7u);
  EXPECT_EQ(pb[0].size(), 2u);
  EXPECT_TRUE(pb[6].empty());
}
