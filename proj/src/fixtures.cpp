#include "tvbench/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "tvbench/error.hpp"

namespace tvbench {

namespace fs = std::filesystem;

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0;
  while (u == 0.0) u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  spare_ = r * std::sin(2.0 * M_PI * v);
  return r * std::cos(2.0 * M_PI * v);
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string clip_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%03zu", index);
  return buf;
}

std::string frame_name(std::size_t t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu%s", t, ext);
  return buf;
}

struct Motion {
  Point2D v, a, j;

  Point2D at(double t) const {
    return {v.x * t + a.x * t * t / 2.0 + j.x * t * t * t / 6.0, v.y * t + a.y * t * t / 2.0 + j.y * t * t * t / 6.0};
  }
};

double norm2(Point2D p) { return p.x * p.x + p.y * p.y; }

double dot(Point2D a, Point2D b) { return a.x * b.x + a.y * b.y; }

/// Σ_{s=1}^{n} ‖a + j·s‖².
double accel_sum(const Motion& m, double n) {
  return n * norm2(m.a) + dot(m.a, m.j) * n * (n + 1.0) + norm2(m.j) * n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
}

BoundingBox pose_box(const KeypointSet& ks, int width, int height) {
  const BoundingBox b = enclosing_box(ks.valid_points());
  return {std::max(0.0, std::floor(b.x_min) - 1.0), std::max(0.0, std::floor(b.y_min) - 1.0),
          std::min<double>(width, std::ceil(b.x_max) + 1.0), std::min<double>(height, std::ceil(b.y_max) + 1.0)};
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Frame render(int width, int height, const std::vector<BoundingBox>& boxes, const std::vector<Point2D>& shift,
             std::uint64_t seed) {
  Frame f;
  f.width = width;
  f.height = height;
  f.rgb.resize(static_cast<std::size_t>(width) * height * 3);
  static const double colors[2][3] = {{200, 60, 50}, {50, 90, 210}};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::uint64_t h = mix(seed ^ (static_cast<std::uint64_t>(y) << 32 | static_cast<std::uint32_t>(x)));
      double px[3] = {40.0 + 150.0 * x / width, 60.0 + 120.0 * y / height, 90.0 + static_cast<double>(h % 48)};
      for (std::size_t p = 0; p < boxes.size(); ++p) {
        const BoundingBox& b = boxes[p];
        if (x + 0.5 < b.x_min || x + 0.5 >= b.x_max || y + 0.5 < b.y_min || y + 0.5 >= b.y_max) continue;
        const long u = std::lround(x - shift[p].x), w = std::lround(y - shift[p].y);
        const double stripe = ((u / 3 + w / 4) % 2 == 0) ? 35.0 : -35.0;
        for (int c = 0; c < 3; ++c) px[c] = colors[p % 2][c] + stripe;
      }
      for (int c = 0; c < 3; ++c) f.rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c] = clamp8(px[c]);
    }
  }
  return f;
}

FeatureSet random_features(Rng& rng, std::size_t n, std::size_t dim, const std::string& tag) {
  FeatureSet fs_;
  fs_.tag = tag;
  fs_.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < fs_.vectors.size(); ++i) fs_.vectors.data()[i] = static_cast<float>(rng.normal());
  return fs_;
}

FeatureSet perturbed(const FeatureSet& in, Rng& rng, double scale) {
  FeatureSet out = in;
  for (Eigen::Index i = 0; i < out.vectors.size(); ++i) {
    out.vectors.data()[i] = static_cast<float>(out.vectors.data()[i] + scale * rng.normal());
  }
  return out;
}

LayerFeatureMaps random_layers(Rng& rng, const std::vector<double>& w0, const std::vector<double>& w1) {
  LayerFeatureMaps maps;
  const int shapes[2][3] = {{4, 6, 8}, {8, 3, 4}};
  for (int l = 0; l < 2; ++l) {
    FeatureLayer layer;
    layer.channels = shapes[l][0];
    layer.height = shapes[l][1];
    layer.width = shapes[l][2];
    layer.weights = l == 0 ? w0 : w1;
    layer.values.resize(static_cast<std::size_t>(layer.channels) * layer.height * layer.width);
    for (double& v : layer.values) v = static_cast<float>(rng.normal());
    maps.layers.push_back(std::move(layer));
  }
  return maps;
}

LayerFeatureMaps perturbed(const LayerFeatureMaps& in, Rng& rng, double scale) {
  LayerFeatureMaps out = in;
  for (FeatureLayer& l : out.layers) {
    for (double& v : l.values) v = static_cast<float>(v + scale * rng.normal());
  }
  return out;
}

/// Writes one family of synthetic features for a clip side pair and fills
/// in the manifest slots.
io::ClipFeatures write_features(const fs::path& dir, Rng& rng, std::size_t frames, bool perfect) {
  io::ClipFeatures out;
  auto pair = [&](const char* name, std::size_t n, std::size_t dim, const char* tag) {
    const FeatureSet gt = random_features(rng, n, dim, tag);
    const FeatureSet pred = perfect ? gt : perturbed(gt, rng, 0.2);
    io::FeaturePaths p{dir / (std::string(name) + "_gt.tvbf"), dir / (std::string(name) + "_pred.tvbf")};
    io::save_features(p.gt, gt);
    io::save_features(p.pred, pred);
    return p;
  };
  out.fvd = pair("fvd", std::max<std::size_t>(frames / 16, 1), 16, "i3d-synthetic");
  out.fid = pair("fid", frames, 32, "inception-synthetic");
  out.clip_fid = pair("clip", frames, 24, "clip-synthetic");
  out.clip = out.clip_fid;

  std::vector<double> w0(4), w1(8);
  for (double& w : w0) w = static_cast<float>(rng.uniform());
  for (double& w : w1) w = static_cast<float>(rng.uniform());
  io::FeaturePaths layers{dir / "layers_gt", dir / "layers_pred"};
  for (std::size_t t = 0; t < frames; ++t) {
    const LayerFeatureMaps gt = random_layers(rng, w0, w1);
    const LayerFeatureMaps pred = perfect ? gt : perturbed(gt, rng, 0.3);
    io::save_layer_features(layers.gt / frame_name(t, ".tvlf"), gt);
    io::save_layer_features(layers.pred / frame_name(t, ".tvlf"), pred);
  }
  out.lpips = layers;
  out.dists = layers;
  return out;
}

}  // namespace

SyntheticClip make_synthetic_clip(const FixtureOptions& o, std::size_t index) {
  if (o.frames < 4) throw Error(ErrorCode::kInvalidArgument, "fixtures need at least 4 frames");
  if (o.width < 32 || o.height < 32) throw Error(ErrorCode::kInvalidArgument, "fixture frames must be at least 32x32");
  Rng rng(mix(o.seed) ^ mix(index + 1));
  SyntheticClip clip;
  clip.clip_id = clip_name(index);
  const std::size_t T = o.frames;
  const double W = o.width, H = o.height, Td = static_cast<double>(T);
  const double amp = std::min(W, H) * 0.04;

  std::vector<Motion> motion(2);
  std::vector<std::array<Point2D, kNumKeypoints>> skeleton(2);
  std::vector<Point2D> centre(2);
  for (int p = 0; p < 2; ++p) {
    const double bw = W * 0.22, bh = H * 0.55;
    centre[p] = {W * (0.28 + 0.44 * p) + rng.uniform(-1.0, 1.0), H * 0.5 + rng.uniform(-1.0, 1.0)};
    for (auto& pt : skeleton[p]) pt = {rng.uniform(-bw / 2, bw / 2), rng.uniform(-bh / 2, bh / 2)};
    auto vec = [&](double s) { return Point2D{s * rng.uniform(-1, 1), s * rng.uniform(-1, 1)}; };
    motion[p] = {vec(amp / Td), vec(2.0 * amp / (Td * Td)), vec(6.0 * amp / (Td * Td * Td))};
  }

  for (PoseSequence* seq : {&clip.gt_poses, &clip.pred_poses}) {
    seq->fps = o.fps;
    seq->frames.assign(T, std::vector<KeypointSet>(2));
  }
  clip.gt_tracks.frames.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (int p = 0; p < 2; ++p) {
      const Point2D d = motion[p].at(static_cast<double>(t));
      KeypointSet ks;
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        ks.points[j] = centre[p] + skeleton[p][j] + d;
        ks.confidence[j] = 1.0;
        ks.valid[j] = true;
      }
      clip.gt_poses.frames[t][p] = ks;
      clip.gt_tracks.frames[t].push_back({p + 1, pose_box(ks, o.width, o.height)});
    }
  }

  if (o.perfect) {
    clip.pred_poses = clip.gt_poses;
    clip.pred_tracks = clip.gt_tracks;
  } else {
    clip.pred_tracks.frames.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      for (int p = 0; p < 2; ++p) {
        KeypointSet ks = clip.gt_poses.frames[t][p];
        for (std::size_t j = 0; j < kNumKeypoints; ++j) {
          ks.points[j] = ks.points[j] + Point2D{1.5 * rng.normal(), 1.5 * rng.normal()};
          if (rng.uniform() < 0.03) {
            ks.confidence[j] = 0.1;
            ks.valid[j] = false;
          }
        }
        clip.pred_poses.frames[t][p] = ks;
        BoundingBox b = clip.gt_tracks.frames[t][p].box;
        const double dx = static_cast<double>(rng.integer(-1, 1)), dy = static_cast<double>(rng.integer(-1, 1));
        b = {b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
        const bool swapped = index % 2 == 1 && t >= T / 2;
        clip.pred_tracks.frames[t].push_back({swapped ? 2 - p : p + 1, b});
      }
    }
  }

  // Exact finite differences of the cubic: jerk j·f³ and, at step t,
  // acceleration (a + j·(t + 1))·f².
  const double n = Td - 2.0;
  clip.smooth_rms = std::pow(o.fps, 3) * std::sqrt((norm2(motion[0].j) + norm2(motion[1].j)) / 2.0);
  clip.time_dyn_rmse = o.fps * o.fps * std::sqrt((accel_sum(motion[0], n) + accel_sum(motion[1], n)) / (2.0 * n));

  if (o.video) {
    clip.masks.assign(2, MaskSequence{});
    const std::uint64_t texture = mix(o.seed ^ 0xABCDEFULL) ^ index;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<BoundingBox> boxes;
      std::vector<Point2D> shift;
      for (int p = 0; p < 2; ++p) {
        boxes.push_back(clip.gt_tracks.frames[t][p].box);
        shift.push_back(motion[p].at(static_cast<double>(t)));
        clip.masks[p].push_back(BinaryMask::from_box(o.width, o.height, boxes.back()));
      }
      clip.gt_frames.frames.push_back(render(o.width, o.height, boxes, shift, texture));
    }
    clip.pred_frames = clip.gt_frames;
    if (!o.perfect) {
      for (Frame& f : clip.pred_frames.frames) {
        for (auto& v : f.rgb) v = clamp8(v + static_cast<double>(rng.integer(-6, 6)));
      }
    }
  }
  return clip;
}

FixtureCorpus write_fixture_corpus(const fs::path& out, const FixtureOptions& o) {
  FixtureCorpus corpus;
  corpus.corpus = out / "corpus.json";
  std::vector<fs::path> manifests;
  nlohmann::json expected = nlohmann::json::array();
  for (std::size_t i = 0; i < o.clips; ++i) {
    const SyntheticClip clip = make_synthetic_clip(o, i);
    const fs::path dir = out / clip.clip_id;
    io::ClipManifest m;
    m.clip_id = clip.clip_id;
    m.fps = o.fps;
    m.frame_width = o.width;
    m.frame_height = o.height;
    m.gt_poses = dir / "gt_poses.json";
    m.pred_poses = dir / "pred_poses.json";
    m.gt_tracks = dir / "gt_tracks.json";
    m.pred_tracks = dir / "pred_tracks.json";
    io::save_poses(*m.gt_poses, clip.gt_poses);
    io::save_poses(*m.pred_poses, clip.pred_poses);
    io::save_tracks(*m.gt_tracks, clip.gt_tracks);
    io::save_tracks(*m.pred_tracks, clip.pred_tracks);
    if (o.video) {
      m.gt_frames = dir / "gt_frames";
      m.pred_frames = dir / "pred_frames";
      for (std::size_t t = 0; t < clip.gt_frames.size(); ++t) {
        io::save_png(*m.gt_frames / frame_name(t, ".png"), clip.gt_frames.frames[t]);
        io::save_ppm(*m.pred_frames / frame_name(t, ".ppm"), clip.pred_frames.frames[t]);
      }
      for (std::size_t k = 0; k < clip.masks.size(); ++k) {
        const fs::path mdir = dir / "masks" / std::to_string(k);
        for (std::size_t t = 0; t < clip.masks[k].size(); ++t) io::save_mask(mdir / frame_name(t, ".json"), clip.masks[k][t]);
        m.masks.push_back(mdir);
      }
      Rng rng(mix(o.seed ^ 0x5EEDULL) ^ mix(i + 1));
      m.features = write_features(dir / "features", rng, o.frames, o.perfect);
      for (std::size_t k = 0; k < clip.masks.size(); ++k) {
        m.masked_features.push_back(
            write_features(dir / ("features_person" + std::to_string(k)), rng, o.frames, o.perfect));
      }
    }
    const fs::path manifest = dir / "manifest.json";
    io::save_manifest(manifest, m);
    manifests.push_back(manifest);
    corpus.clips.push_back({clip.clip_id, manifest, clip.smooth_rms, clip.time_dyn_rmse});
    if (o.perfect) {
      expected.push_back({{"clip_id", clip.clip_id},
                          {"SmoothRMS", clip.smooth_rms * 1e-6},
                          {"TimeDynRMSE", clip.time_dyn_rmse * 1e-4}});
    }
  }
  io::save_corpus(corpus.corpus, manifests);
  io::write_text(out / "expected.json",
                 nlohmann::json({{"schema_version", io::kSchemaVersion}, {"clips", expected}}).dump(2) + "\n");
  return corpus;
}

// ----------------------------------------------------------- curation

io::DetectionDump scenario_detections(const CurationScenario& s) {
  io::DetectionDump dump;
  dump.width = s.width;
  dump.height = s.height;
  dump.frames.resize(s.frames);
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (const SubjectSpec& sub : s.subjects) {
      if (!sub.present[t]) continue;
      Detection d;
      d.frame = t;
      d.box = sub.box;
      d.confidence = 0.9;
      d.reid = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kReidDim));
      d.reid[sub.reid_axis] = 1.0;
      dump.frames[t].push_back(std::move(d));
    }
  }
  return dump;
}

std::vector<std::vector<KeypointSet>> scenario_poses(const CurationScenario& s, std::uint64_t seed) {
  Rng rng(mix(seed));
  std::vector<std::vector<KeypointSet>> out(s.frames);
  for (std::size_t t = 0; t < s.frames; ++t) {
    // Reverse order so assignment has to do the work.
    for (auto it = s.subjects.rbegin(); it != s.subjects.rend(); ++it) {
      if (!it->present[t]) continue;
      KeypointSet ks;
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        ks.points[j] = {rng.uniform(it->box.x_min + 1, it->box.x_max - 1), rng.uniform(it->box.y_min + 1, it->box.y_max - 1)};
        ks.confidence[j] = 0.9;
        ks.valid[j] = true;
      }
      out[t].push_back(ks);
    }
  }
  return out;
}

std::vector<MaskSequence> scenario_masks(const CurationScenario& s) {
  std::vector<MaskSequence> out;
  for (std::size_t k = 0; k < std::min<std::size_t>(2, s.subjects.size()); ++k) {
    MaskSequence seq;
    for (std::size_t t = 0; t < s.frames; ++t) {
      seq.push_back(s.subjects[k].present[t] ? BinaryMask::from_box(s.width, s.height, s.subjects[k].box)
                                             : BinaryMask::filled(s.width, s.height, false));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<CurationScenario> filter_rule_scenarios() {
  const std::size_t T = 100;
  auto always = std::vector<bool>(T, true);
  auto present_for = [&](std::size_t n, std::size_t gap_start = SIZE_MAX) {
    // n frames present; absences start at gap_start (or at the end).
    std::vector<bool> v(T, true);
    const std::size_t missing = T - n;
    const std::size_t start = std::min(gap_start, T - missing);
    for (std::size_t t = start; t < start + missing; ++t) v[t] = false;
    return v;
  };
  const BoundingBox left{20, 20, 60, 80};     // 12% of a 200 x 100 frame
  const BoundingBox right{120, 20, 160, 80};  // 12%, disjoint from `left`
  auto subject = [](BoundingBox b, std::vector<bool> present, int axis) { return SubjectSpec{b, std::move(present), axis}; };
  auto scenario = [&](std::string name, std::vector<SubjectSpec> subs, bool ok, std::string rule) {
    CurationScenario s;
    s.name = std::move(name);
    s.frames = T;
    s.subjects = std::move(subs);
    s.expect_accepted = ok;
    s.expect_rule = std::move(rule);
    return s;
  };
  return {
      scenario("clean", {subject(left, always, 0), subject(right, always, 1)}, true, ""),
      scenario("clean_distractor",
               {subject(left, always, 0), subject(right, always, 1), subject({85, 10, 100, 40}, present_for(20, 0), 2)},
               true, ""),
      scenario("overlap_high", {subject(left, always, 0), subject({50, 20, 90, 80}, always, 1)}, false, "overlap"),
      scenario("overlap_boundary", {subject({20, 20, 64, 60}, always, 0), subject({56, 20, 100, 60}, always, 1)}, false,
               "overlap"),
      scenario("area_large", {subject({0, 0, 170, 100}, always, 0), subject({175, 30, 195, 80}, always, 1)}, false, "area"),
      scenario("area_small", {subject({20, 20, 35, 35}, always, 0), subject(right, always, 1)}, false, "area"),
      scenario("single_subject", {subject(left, always, 0)}, false, "subjects"),
      scenario("three_subjects",
               {subject(left, always, 0), subject(right, always, 1), subject({80, 20, 100, 80}, always, 2)}, false,
               "subjects"),
      scenario("low_coverage", {subject(left, always, 0), subject(right, present_for(35, 0), 1)}, false, "subjects"),
      scenario("tracking_low", {subject(left, always, 0), subject(right, present_for(85, 40), 1)}, false, "tracking"),
      scenario("tracking_boundary", {subject(left, always, 0), subject(right, present_for(90, 40), 1)}, false,
               "tracking"),
      scenario("tracking_ok", {subject(left, always, 0), subject(right, present_for(95, 40), 1)}, true, ""),
  };
}

void write_curation_fixtures(const fs::path& out, const std::vector<CurationScenario>& scenarios, std::uint64_t seed) {
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const CurationScenario& s = scenarios[i];
    io::save_detection_dump(out / "d" / (s.name + ".jsonl"), scenario_detections(s));
    io::save_pose_dump(out / "p" / (s.name + ".jsonl"), scenario_poses(s, seed + i));
    const auto masks = scenario_masks(s);
    for (std::size_t k = 0; k < masks.size(); ++k) {
      for (std::size_t t = 0; t < masks[k].size(); ++t) {
        io::save_mask(out / "m" / s.name / std::to_string(k) / frame_name(t, ".json"), masks[k][t]);
      }
    }
  }
}

}  // namespace tvbench
