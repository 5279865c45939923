#include "tvbench/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "json.hpp"
#include "tvbench/error.hpp"
#include "tvbench/pose_metrics.hpp"
#include "tvbench/quality_metrics.hpp"
#include "tvbench/track_metrics.hpp"

namespace tvbench {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class StageClock {
 public:
  explicit StageClock(ClipTiming* timing) : timing_(timing), start_(Clock::now()), lap_(start_) {}

  void lap(const char* stage) {
    const auto now = Clock::now();
    if (timing_ != nullptr) timing_->stages.push_back({stage, seconds(lap_, now)});
    lap_ = now;
  }
  void finish() {
    if (timing_ != nullptr) timing_->seconds = seconds(start_, Clock::now());
  }

 private:
  using Clock = std::chrono::steady_clock;
  static double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  }
  ClipTiming* timing_;
  Clock::time_point start_;
  Clock::time_point lap_;
};

bool undefined_for_data(ErrorCode code) {
  return code == ErrorCode::kNoValidKeypoints || code == ErrorCode::kInsufficientData;
}

/// Stores fn() under `name`; data-dependent undefined results become NaN
/// plus a flag, everything else propagates.
template <typename Fn>
void record(ClipReport& r, const std::string& name, Fn&& fn) {
  try {
    r.metrics[name] = fn();
  } catch (const Error& e) {
    if (!undefined_for_data(e.code())) throw;
    r.metrics[name] = kNaN;
    r.flags.push_back(name + ": " + e.what());
  }
}

/// Per-person values averaged; persons that yield nothing are flagged.
template <typename Fn>
void record_masked(ClipReport& r, const std::string& name, std::size_t persons, Fn&& fn) {
  std::vector<std::optional<double>> values(persons);
  for (std::size_t k = 0; k < persons; ++k) {
    try {
      values[k] = fn(k);
    } catch (const Error& e) {
      if (!undefined_for_data(e.code())) throw;
    }
    if (!values[k]) r.flags.push_back(name + ": person " + std::to_string(k) + " skipped");
  }
  const auto avg = average_over_persons(values);
  r.metrics[name] = avg ? avg->value : kNaN;
}

[[noreturn]] void missing_input(const io::ClipManifest& m, const char* what) {
  throw Error(ErrorCode::kSchema, m.source.string() + ": \"" + what + "\" is required for this track");
}

struct ClipData {
  const io::ClipManifest& manifest;
  std::optional<std::vector<MaskSequence>> masks;

  const std::vector<MaskSequence>& load_masks() {
    if (!masks) {
      masks.emplace();
      for (const fs::path& p : manifest.masks) masks->push_back(io::load_mask_sequence(p));
    }
    return *masks;
  }
};

void evaluate_identity(ClipData& data, const EngineConfig& config, ClipReport& r) {
  const io::ClipManifest& m = data.manifest;
  if (!m.gt_tracks) missing_input(m, "gt_tracks");
  if (!m.pred_tracks) missing_input(m, "pred_tracks");
  const TrackSet gt = io::load_tracks(*m.gt_tracks);
  const TrackSet pred = io::load_tracks(*m.pred_tracks);
  const HotaScores h = compute_hota(gt, pred);
  const ClearScores clear = compute_clear(gt, pred, config.clear_iou);
  const IdentityScores id = compute_identity(gt, pred, config.clear_iou);
  r.metrics["HOTA"] = 100.0 * h.hota;
  r.metrics["DetA"] = 100.0 * h.deta;
  r.metrics["AssA"] = 100.0 * h.assa;
  r.metrics["LocA"] = 100.0 * h.loca;
  r.metrics["MOTA"] = 100.0 * clear.mota;
  if (clear.gt_dets == 0) r.flags.push_back("MOTA: no ground-truth detections");
  r.metrics["MOTP"] = 100.0 * clear.motp;
  if (clear.motp_undefined) r.flags.push_back("MOTP: no true positives");
  r.metrics["IDF1"] = 100.0 * id.idf1;
  r.metrics["IDP"] = 100.0 * id.idp;
  r.metrics["IDR"] = 100.0 * id.idr;
  if (id.idp_undefined) r.flags.push_back("IDP: no predicted detections");
  if (id.idr_undefined) r.flags.push_back("IDR: no ground-truth detections");
  r.metrics["IDSW"] = static_cast<double>(clear.idsw);
  r.metrics["FP"] = static_cast<double>(clear.fp);
  r.metrics["FN"] = static_cast<double>(clear.fn);
}

std::pair<int, int> raster_size(const io::ClipManifest& m, const EngineConfig& config) {
  if (m.frame_width && m.frame_height) return {*m.frame_width, *m.frame_height};
  if (m.gt_frames) {
    const auto files = io::list_numbered(*m.gt_frames, {".png", ".ppm"});
    if (!files.empty()) {
      const Frame f = io::load_frame(files.front());
      return {f.width, f.height};
    }
  }
  return {config.heatmap_size, config.heatmap_size};
}

PersonAreas person_areas(const PoseSequence& gt, const std::vector<MaskSequence>& masks) {
  const bool use_masks = !masks.empty();
  if (use_masks && masks.size() != gt.num_persons()) {
    throw Error(ErrorCode::kSchema, "manifest lists " + std::to_string(masks.size()) + " masks for " +
                                        std::to_string(gt.num_persons()) + " persons");
  }
  PersonAreas areas(gt.num_frames(), std::vector<double>(gt.num_persons(), 0.0));
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    for (std::size_t p = 0; p < gt.num_persons(); ++p) {
      std::optional<double> mask_area;
      if (use_masks) {
        if (masks[p].size() != gt.num_frames()) {
          throw Error(ErrorCode::kShapeMismatch, "mask sequence of person " + std::to_string(p) + " has " +
                                                     std::to_string(masks[p].size()) + " frames, poses have " +
                                                     std::to_string(gt.num_frames()));
        }
        mask_area = static_cast<double>(masks[p][t].area());
      }
      const auto pts = gt.frames[t][p].valid_points();
      std::optional<BoundingBox> box;
      if (!pts.empty()) box = enclosing_box(pts);
      if (mask_area || box) areas[t][p] = resolve_person_area(mask_area, box);
    }
  }
  return areas;
}

void evaluate_interaction(ClipData& data, const EngineConfig& config, ClipReport& r) {
  const io::ClipManifest& m = data.manifest;
  if (!m.gt_poses) missing_input(m, "gt_poses");
  if (!m.pred_poses) missing_input(m, "pred_poses");
  const PoseSequence gt = io::load_poses(*m.gt_poses, config.keypoint_confidence, m.fps);
  const PoseSequence pred = io::load_poses(*m.pred_poses, config.keypoint_confidence, m.fps);
  validate(gt);
  validate(pred);

  record(r, "MPJPE_2D", [&] {
    const MpjpeResult res = mpjpe_2d(gt, pred);
    if (res.unaligned_frames > 0) {
      r.flags.push_back("MPJPE_2D: " + std::to_string(res.unaligned_frames) + " frames left unaligned");
    }
    return res.error_px;
  });
  record(r, "OKS", [&] { return oks(gt, pred, person_areas(gt, data.load_masks())); });
  const auto [w, h] = raster_size(m, config);
  record(r, "PoseSSIM", [&] { return pose_heat_ssim(gt, pred, w, h); });
  record(r, "SmoothRMS", [&] { return smooth_rms(pred) * 1e-6; });
  record(r, "TimeDynRMSE", [&] { return time_dyn_rmse(pred, gt, config.time_dyn) * 1e-4; });
  record(r, "FVMD", [&] { return fvmd(gt, pred) * 1e-5; });
}

DenseMaskSequence dense_masks(const MaskSequence& seq, const FrameSequence& frames, std::size_t person) {
  if (seq.size() != frames.size()) {
    throw Error(ErrorCode::kShapeMismatch, "mask sequence of person " + std::to_string(person) + " has " +
                                               std::to_string(seq.size()) + " frames, video has " +
                                               std::to_string(frames.size()));
  }
  DenseMaskSequence out;
  out.reserve(seq.size());
  for (const BinaryMask& mask : seq) {
    if (mask.width() != frames.width() || mask.height() != frames.height()) {
      throw Error(ErrorCode::kShapeMismatch, "mask of person " + std::to_string(person) + " does not match the frame size");
    }
    out.push_back(mask.to_dense());
  }
  return out;
}

double mean_over_frames(const std::vector<LayerFeatureMaps>& gt, const std::vector<LayerFeatureMaps>& pred,
                        double (*fn)(const LayerFeatureMaps&, const LayerFeatureMaps&), const char* what) {
  if (gt.size() != pred.size()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": " + std::to_string(gt.size()) +
                                               " GT feature frames vs " + std::to_string(pred.size()));
  }
  if (gt.empty()) throw Error(ErrorCode::kInsufficientData, std::string(what) + ": no feature frames");
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) sum += fn(gt[t], pred[t]);
  return sum / static_cast<double>(gt.size());
}

double frechet_pair(const io::FeaturePaths& p) {
  return frechet_distance(io::load_features(p.gt), io::load_features(p.pred));
}

double clip_pair(const io::FeaturePaths& p) { return clip_score(io::load_features(p.gt), io::load_features(p.pred)); }

double lpips_pair(const io::FeaturePaths& p) {
  return mean_over_frames(io::load_layer_feature_dir(p.gt), io::load_layer_feature_dir(p.pred), lpips_from_features,
                          "lpips");
}

double dists_pair(const io::FeaturePaths& p) {
  return mean_over_frames(io::load_layer_feature_dir(p.gt), io::load_layer_feature_dir(p.pred), dists_from_features,
                          "dists");
}

struct FeatureMetric {
  const char* column;
  std::optional<io::FeaturePaths> io::ClipFeatures::*slot;
  double (*compute)(const io::FeaturePaths&);
};

const FeatureMetric kFeatureMetrics[] = {
    {"LPIPS", &io::ClipFeatures::lpips, lpips_pair}, {"DISTS_raw", &io::ClipFeatures::dists, dists_pair},
    {"CLIP", &io::ClipFeatures::clip, clip_pair},    {"FVD", &io::ClipFeatures::fvd, frechet_pair},
    {"FID", &io::ClipFeatures::fid, frechet_pair},   {"C_FID", &io::ClipFeatures::clip_fid, frechet_pair},
};

void orient_dists(ClipReport& r, const std::string& prefix) {
  auto it = r.metrics.find(prefix + "DISTS_raw");
  if (it != r.metrics.end()) r.metrics[prefix + "DISTS"] = 1.0 - it->second;
}

void evaluate_quality(ClipData& data, ClipReport& r) {
  const io::ClipManifest& m = data.manifest;
  if (!m.gt_frames) missing_input(m, "gt_frames");
  if (!m.pred_frames) missing_input(m, "pred_frames");
  const FrameSequence gt = io::load_frames(*m.gt_frames);
  const FrameSequence pred = io::load_frames(*m.pred_frames);
  if (gt.size() != pred.size() || gt.width() != pred.width() || gt.height() != pred.height()) {
    throw Error(ErrorCode::kShapeMismatch, m.clip_id + ": GT and predicted videos differ in shape");
  }

  record(r, "L1", [&] { return l1(gt, pred); });
  record(r, "PSNR", [&] { return psnr(gt, pred); });
  record(r, "SSIM", [&] { return ssim(gt, pred); });
  record(r, "ST_SSIM", [&] { return st_ssim(gt, pred); });
  record(r, "GMSD_T", [&] { return gmsd_temporal(gt, pred); });

  const auto& masks = data.load_masks();
  if (!masks.empty()) {
    std::vector<DenseMaskSequence> dense;
    for (std::size_t k = 0; k < masks.size(); ++k) dense.push_back(dense_masks(masks[k], gt, k));
    const std::size_t P = dense.size();
    record_masked(r, "masked_L1", P, [&](std::size_t k) { return masked_l1(gt, pred, dense[k]); });
    record_masked(r, "masked_PSNR", P, [&](std::size_t k) { return masked_psnr(gt, pred, dense[k]); });
    record_masked(r, "masked_SSIM", P, [&](std::size_t k) { return masked_ssim(gt, pred, dense[k]); });
    record_masked(r, "masked_ST_SSIM", P, [&](std::size_t k) { return masked_st_ssim(gt, pred, dense[k]); });
    record_masked(r, "masked_GMSD_T", P, [&](std::size_t k) { return masked_gmsd_temporal(gt, pred, dense[k]); });
  }

  for (const FeatureMetric& fm : kFeatureMetrics) {
    if (const auto& paths = m.features.*fm.slot) record(r, fm.column, [&] { return fm.compute(*paths); });
  }
  orient_dists(r, "");

  for (const FeatureMetric& fm : kFeatureMetrics) {
    const bool any = std::any_of(m.masked_features.begin(), m.masked_features.end(),
                                 [&](const io::ClipFeatures& f) { return (f.*fm.slot).has_value(); });
    if (!any) continue;
    record_masked(r, std::string("masked_") + fm.column, m.masked_features.size(),
                  [&](std::size_t k) -> std::optional<double> {
                    const auto& paths = m.masked_features[k].*fm.slot;
                    if (!paths) return std::nullopt;
                    return fm.compute(*paths);
                  });
  }
  orient_dists(r, "masked_");
}

}  // namespace

ClipReport evaluate_clip(const io::ClipManifest& manifest, TrackSelection track, const EngineConfig& config,
                         ClipTiming* timing) {
  StageClock clock(timing);
  if (timing != nullptr) timing->clip_id = manifest.clip_id;
  ClipReport r;
  r.clip_id = manifest.clip_id;
  ClipData data{manifest, std::nullopt};
  if (track == TrackSelection::kAll || track == TrackSelection::kIdentity) {
    evaluate_identity(data, config, r);
    clock.lap("track1");
  }
  if (track == TrackSelection::kAll || track == TrackSelection::kInteraction) {
    evaluate_interaction(data, config, r);
    clock.lap("track2");
  }
  if (track == TrackSelection::kAll || track == TrackSelection::kQuality) {
    evaluate_quality(data, r);
    clock.lap("track3");
  }
  clock.finish();
  return r;
}

EvaluationResult evaluate_corpus(const std::vector<fs::path>& manifests, TrackSelection track,
                                 const EngineConfig& config) {
  const std::size_t n = manifests.size();
  std::vector<std::optional<ClipReport>> reports(n);
  std::vector<std::optional<ClipError>> errors(n);
  std::vector<ClipTiming> timings(n);
  std::vector<char> internal(n, 0);

  auto work = [&](std::size_t i) {
    std::string label = manifests[i].generic_string();
    try {
      const io::ClipManifest m = io::load_manifest(manifests[i]);
      label = m.clip_id;
      reports[i] = evaluate_clip(m, track, config, &timings[i]);
    } catch (const Error& e) {
      errors[i] = ClipError{label, to_string(e.code()), e.what()};
    } catch (const std::exception& e) {
      errors[i] = ClipError{label, "internal", e.what()};
      internal[i] = 1;
    }
    if (timings[i].clip_id.empty()) timings[i].clip_id = label;
  };

  const std::size_t threads =
      config.threads > 0 ? config.threads : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  {
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism, threads);
    tbb::task_arena arena(static_cast<int>(threads));
    arena.execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 1), [&](const tbb::blocked_range<std::size_t>& range) {
        for (std::size_t i = range.begin(); i != range.end(); ++i) work(i);
      });
    });
  }

  EvaluationResult out;
  out.report.track = track;
  out.report.config_hash = config_hash(config);
  for (std::size_t i = 0; i < n; ++i) {
    if (reports[i]) out.report.clips.push_back(std::move(*reports[i]));
    if (errors[i]) out.report.errors.push_back(std::move(*errors[i]));
    if (internal[i]) out.internal_error = true;
  }
  out.timings = std::move(timings);
  return out;
}

std::string format_profile(const std::vector<ClipTiming>& timings) {
  const char* stages[] = {"track1", "track2", "track3"};
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %10s %10s %10s %10s\n", "clip", "track1_s", "track2_s", "track3_s", "total_s");
  out += line;
  double total = 0.0;
  for (const ClipTiming& t : timings) {
    double cols[3] = {0, 0, 0};
    for (const StageTime& s : t.stages) {
      for (int k = 0; k < 3; ++k) {
        if (s.stage == stages[k]) cols[k] += s.seconds;
      }
    }
    std::snprintf(line, sizeof line, "%-24.24s %10.3f %10.3f %10.3f %10.3f\n", t.clip_id.c_str(), cols[0], cols[1],
                  cols[2], t.seconds);
    out += line;
    total += t.seconds;
  }
  std::snprintf(line, sizeof line, "%-24s %10s %10s %10s %10.3f\n", "sum", "", "", "", total);
  out += line;
  return out;
}

// ------------------------------------------------------------- curation

CurationOutcome curate_clip(const CurationInputs& in, const EngineConfig& config) {
  CurationOutcome out;
  out.clip_id = in.clip_id;
  io::DetectionDump dump = io::load_detection_dump(in.detections);
  std::vector<std::vector<KeypointSet>> poses;
  if (in.poses) poses = io::load_pose_dump(*in.poses, config.keypoint_confidence);
  out.total_frames = std::max(dump.frames.size(), poses.size());
  if (out.total_frames == 0) throw Error(ErrorCode::kSchema, in.detections.string() + ": no frames");
  dump.frames.resize(out.total_frames);
  poses.resize(out.total_frames);

  const std::optional<int> w = in.frame_width ? in.frame_width : dump.width;
  const std::optional<int> h = in.frame_height ? in.frame_height : dump.height;
  if (!w || !h) {
    throw Error(ErrorCode::kSchema, in.detections.string() + ": frame size unknown (add width/height or pass it)");
  }
  out.frame_width = *w;
  out.frame_height = *h;

  out.tracks = associate(dump.frames, config.association);
  out.scores = score_subjects(out.tracks, out.total_frames);
  out.verdict = filter_clip(out.tracks, out.scores, out.total_frames, out.frame_width, out.frame_height, config.filter);

  if (out.verdict.selected && in.poses) {
    PersonBoxes boxes;
    const bool have_masks = in.masks && fs::is_directory(*in.masks / "0") && fs::is_directory(*in.masks / "1");
    if (have_masks) {
      std::vector<MaskSequence> masks;
      for (const char* k : {"0", "1"}) {
        MaskSequence seq = io::load_mask_sequence(*in.masks / k);
        if (seq.size() != out.total_frames) {
          throw Error(ErrorCode::kShapeMismatch, (*in.masks / k).string() + ": " + std::to_string(seq.size()) +
                                                     " masks for " + std::to_string(out.total_frames) + " frames");
        }
        masks.push_back(std::move(seq));
      }
      boxes = boxes_from_masks(masks);
      out.person_boxes = "masks";
    } else {
      boxes.assign(2, std::vector<std::optional<BoundingBox>>(out.total_frames));
      for (int k = 0; k < 2; ++k) {
        for (const Track& tr : out.tracks) {
          if (tr.id != (*out.verdict.selected)[k]) continue;
          for (const Detection& d : tr.members) boxes[k][d.frame] = d.box;
        }
      }
      out.person_boxes = "tracks";
    }
    out.assignment = assign_poses(poses, boxes, in.fps);
  }
  return out;
}

std::vector<CurationInputs> discover_curation_inputs(const fs::path& detections, const std::optional<fs::path>& poses,
                                                     const std::optional<fs::path>& masks,
                                                     std::optional<int> frame_width, std::optional<int> frame_height,
                                                     double fps) {
  if (!fs::is_directory(detections)) throw Error(ErrorCode::kIo, detections.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(detections)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CurationInputs> out;
  for (const fs::path& f : files) {
    CurationInputs in;
    in.clip_id = f.stem().string();
    in.detections = f;
    if (poses && fs::is_regular_file(*poses / (in.clip_id + ".jsonl"))) in.poses = *poses / (in.clip_id + ".jsonl");
    if (masks && fs::is_directory(*masks / in.clip_id)) in.masks = *masks / in.clip_id;
    in.frame_width = frame_width;
    in.frame_height = frame_height;
    in.fps = fps;
    out.push_back(std::move(in));
  }
  return out;
}

std::string curation_manifest_json(const CurationOutcome& o, const std::string& poses_file) {
  json tracks = json::array();
  for (const Track& tr : o.tracks) {
    json frames = json::array(), boxes = json::array();
    for (const Detection& d : tr.members) {
      frames.push_back(d.frame);
      boxes.push_back({d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max});
    }
    tracks.push_back({{"id", tr.id}, {"frames", std::move(frames)}, {"boxes", std::move(boxes)}});
  }
  json scores = json::array();
  for (const SubjectScore& s : o.scores) {
    scores.push_back({{"track_id", s.track_id}, {"coverage", s.coverage}, {"consistency", s.consistency},
                      {"quality", s.quality}});
  }
  const ClipVerdict& v = o.verdict;
  json reasons = json::array();
  for (const FilterReason& fr : v.reasons) reasons.push_back({{"rule", fr.rule}, {"value", fr.value}, {"message", fr.message}});
  json overlap = json::array();
  for (double x : v.frame_overlap) overlap.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  json verdict = {{"accepted", v.accepted},
                  {"reasons", std::move(reasons)},
                  {"eligible_subjects", v.eligible_subjects},
                  {"max_overlap", v.max_overlap},
                  {"frame_overlap", std::move(overlap)},
                  {"min_area_fraction", std::isfinite(v.min_area_fraction) ? json(v.min_area_fraction) : json(nullptr)},
                  {"max_area_fraction", v.max_area_fraction},
                  {"tracking", {v.tracking[0], v.tracking[1]}}};
  json selected = v.selected ? json::array({(*v.selected)[0], (*v.selected)[1]}) : json(nullptr);
  json assignments = nullptr;
  if (o.assignment) {
    assignments = {{"person_boxes", o.person_boxes},
                   {"poses", poses_file},
                   {"persons", json::array({(*v.selected)[0], (*v.selected)[1]})},
                   {"dropped_poses", o.assignment->dropped_poses},
                   {"unmatched_slots", o.assignment->unmatched_slots}};
  }
  const json root = {{"schema_version", io::kSchemaVersion},
                     {"clip_id", o.clip_id},
                     {"total_frames", o.total_frames},
                     {"frame_width", o.frame_width},
                     {"frame_height", o.frame_height},
                     {"tracks", std::move(tracks)},
                     {"scores", std::move(scores)},
                     {"selected", std::move(selected)},
                     {"verdict", std::move(verdict)},
                     {"assignments", std::move(assignments)}};
  return root.dump(2) + "\n";
}

void write_curation(const fs::path& out_dir, const CurationOutcome& outcome) {
  const std::string poses_file = outcome.clip_id + ".poses.json";
  if (outcome.assignment) io::save_poses(out_dir / poses_file, outcome.assignment->poses);
  io::write_text(out_dir / (outcome.clip_id + ".json"), curation_manifest_json(outcome, poses_file));
}

void check_curation_manifest(std::string_view text, const std::string& origin) {
  auto fail = [&](const std::string& what) { throw Error(ErrorCode::kSchema, origin + ": " + what); };
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  auto need = [&](const json& obj, const char* key, json::value_t type, const std::string& where) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) fail("\"" + where + key + "\" is missing");
    const json& v = obj.at(key);
    const bool ok = type == json::value_t::number_float ? v.is_number()
                    : type == json::value_t::number_unsigned ? v.is_number_integer() && v.get<std::int64_t>() >= 0
                                                              : v.type() == type;
    if (!ok) fail("\"" + where + key + "\" has the wrong type");
    return v;
  };
  if (need(root, "schema_version", json::value_t::number_unsigned, "") != io::kSchemaVersion) {
    fail("unsupported schema_version");
  }
  need(root, "clip_id", json::value_t::string, "");
  const auto total = need(root, "total_frames", json::value_t::number_unsigned, "").get<std::size_t>();
  if (total == 0) fail("\"total_frames\" must be positive");
  need(root, "frame_width", json::value_t::number_unsigned, "");
  need(root, "frame_height", json::value_t::number_unsigned, "");
  std::vector<std::int64_t> ids;
  for (const json& tr : need(root, "tracks", json::value_t::array, "")) {
    ids.push_back(need(tr, "id", json::value_t::number_unsigned, "tracks[].").get<std::int64_t>());
    const json& frames = need(tr, "frames", json::value_t::array, "tracks[].");
    const json& boxes = need(tr, "boxes", json::value_t::array, "tracks[].");
    if (frames.empty() || frames.size() != boxes.size()) fail("track frames and boxes must be non-empty and aligned");
  }
  for (const json& s : need(root, "scores", json::value_t::array, "")) {
    need(s, "track_id", json::value_t::number_unsigned, "scores[].");
    const double c = need(s, "coverage", json::value_t::number_float, "scores[].").get<double>();
    const double k = need(s, "consistency", json::value_t::number_float, "scores[].").get<double>();
    const double q = need(s, "quality", json::value_t::number_float, "scores[].").get<double>();
    if (c < 0 || c > 1 || k < 0 || k > 1) fail("scores must lie in [0, 1]");
    if (std::abs(q - (kCoverageWeight * c + kConsistencyWeight * k)) > 1e-12) fail("quality disagrees with its terms");
  }
  const json& v = need(root, "verdict", json::value_t::object, "");
  const bool accepted = need(v, "accepted", json::value_t::boolean, "verdict.").get<bool>();
  const json& reasons = need(v, "reasons", json::value_t::array, "verdict.");
  for (const json& r : reasons) {
    const std::string rule = need(r, "rule", json::value_t::string, "verdict.reasons[].").get<std::string>();
    if (rule != "overlap" && rule != "area" && rule != "subjects" && rule != "tracking") fail("unknown rule " + rule);
    need(r, "value", json::value_t::number_float, "verdict.reasons[].");
    need(r, "message", json::value_t::string, "verdict.reasons[].");
  }
  if (accepted != reasons.empty()) fail("accepted must hold exactly when there are no reasons");
  const json& selected = root.contains("selected") ? root.at("selected") : json();
  if (!selected.is_null()) {
    if (!selected.is_array() || selected.size() != 2) fail("\"selected\" must be null or two track ids");
    for (const json& id : selected) {
      if (!id.is_number_integer() || std::find(ids.begin(), ids.end(), id.get<std::int64_t>()) == ids.end()) {
        fail("\"selected\" names an unknown track");
      }
    }
  } else if (accepted) {
    fail("an accepted clip must select two subjects");
  }
  if (!root.contains("assignments")) fail("\"assignments\" is missing");
  const json& a = root.at("assignments");
  if (!a.is_null()) {
    need(a, "person_boxes", json::value_t::string, "assignments.");
    need(a, "poses", json::value_t::string, "assignments.");
    need(a, "dropped_poses", json::value_t::number_unsigned, "assignments.");
  }
}

}  // namespace tvbench
