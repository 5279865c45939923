#include "tvbench/pose_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvbench/error.hpp"

namespace tvbench {
namespace {

void check_same_shape(const PoseSequence& gt, const PoseSequence& pred, const char* what) {
  if (gt.num_frames() != pred.num_frames() || gt.num_persons() != pred.num_persons()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + ": GT has " + std::to_string(gt.num_frames()) + " frames x " +
                    std::to_string(gt.num_persons()) + " persons, prediction " +
                    std::to_string(pred.num_frames()) + " x " + std::to_string(pred.num_persons()));
  }
}

void check_length(const PoseSequence& seq, std::size_t min_frames, const char* what) {
  if (seq.num_frames() < min_frames) {
    throw Error(ErrorCode::kInsufficientData, std::string(what) + ": needs at least " +
                                                  std::to_string(min_frames) + " frames, got " +
                                                  std::to_string(seq.num_frames()));
  }
}

bool valid_span(const PoseSequence& seq, std::size_t t, std::size_t p, std::size_t j,
                std::size_t len) {
  for (std::size_t k = 0; k < len; ++k) {
    if (!seq.frames[t + k][p].valid[j]) return false;
  }
  return true;
}

Point2D at(const PoseSequence& seq, std::size_t t, std::size_t p, std::size_t j) {
  return seq.frames[t][p].points[j];
}

Point2D second_difference(const PoseSequence& s, std::size_t t, std::size_t p, std::size_t j) {
  const double f2 = s.fps * s.fps;
  const Point2D a = at(s, t, p, j), b = at(s, t + 1, p, j), c = at(s, t + 2, p, j);
  return {(c.x - 2.0 * b.x + a.x) * f2, (c.y - 2.0 * b.y + a.y) * f2};
}

}  // namespace

MpjpeResult mpjpe_2d(const PoseSequence& gt, const PoseSequence& pred) {
  check_same_shape(gt, pred, "mpjpe_2d");
  MpjpeResult out;
  double sum = 0.0;
  std::vector<Point2D> src, dst;
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    src.clear();
    dst.clear();
    for (std::size_t p = 0; p < gt.num_persons(); ++p) {
      const KeypointSet& g = gt.frames[t][p];
      const KeypointSet& q = pred.frames[t][p];
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        if (g.valid[j] && q.valid[j]) {
          src.push_back(q.points[j]);
          dst.push_back(g.points[j]);
        }
      }
    }
    if (src.empty()) continue;
    SimilarityTransform align;
    bool aligned = false;
    if (src.size() >= 2) {
      try {
        align = estimate_similarity(src, dst);
        aligned = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientData) throw;
      }
    }
    if (!aligned) ++out.unaligned_frames;
    for (std::size_t k = 0; k < src.size(); ++k) sum += distance(align.apply(src[k]), dst[k]);
    out.keypoints += src.size();
  }
  if (out.keypoints == 0) {
    throw Error(ErrorCode::kNoValidKeypoints, "mpjpe_2d: no keypoint is valid in both sequences");
  }
  out.error_px = sum / static_cast<double>(out.keypoints);
  return out;
}

double resolve_person_area(std::optional<double> mask_area, std::optional<BoundingBox> box) {
  if (mask_area && *mask_area > 0.0) return *mask_area;
  if (box) return kBoxAreaToPersonArea * box->area();
  throw Error(ErrorCode::kInsufficientData, "person area: neither mask nor box available");
}

double oks(const PoseSequence& gt, const PoseSequence& pred, const PersonAreas& areas) {
  check_same_shape(gt, pred, "oks");
  if (areas.size() != gt.num_frames()) {
    throw Error(ErrorCode::kShapeMismatch, "oks: areas cover " + std::to_string(areas.size()) +
                                               " frames, expected " + std::to_string(gt.num_frames()));
  }
  const auto& sigmas = coco_wholebody_sigmas();
  double total = 0.0;
  std::size_t frames_used = 0;
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    double frame_sum = 0.0;
    std::size_t k = 0;
    for (std::size_t p = 0; p < gt.num_persons(); ++p) {
      const KeypointSet& g = gt.frames[t][p];
      const KeypointSet& q = pred.frames[t][p];
      bool any = false;
      for (std::size_t j = 0; j < kNumKeypoints && !any; ++j) any = g.valid[j] && q.valid[j];
      if (!any) continue;
      if (p >= areas[t].size()) {
        throw Error(ErrorCode::kShapeMismatch, "oks: missing area for frame " + std::to_string(t));
      }
      const double area = areas[t][p];
      if (!(area >= 0.0) || !std::isfinite(area)) {
        throw Error(ErrorCode::kInvalidArgument, "oks: invalid person area at frame " + std::to_string(t));
      }
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        if (!(g.valid[j] && q.valid[j])) continue;
        const double d2 = squared_distance(g.points[j], q.points[j]);
        frame_sum += std::exp(-d2 / (2.0 * sigmas[j] * sigmas[j] * (area + 1e-6)));
        ++k;
      }
    }
    if (k == 0) continue;
    total += frame_sum / static_cast<double>(k);
    ++frames_used;
  }
  if (frames_used == 0) {
    throw Error(ErrorCode::kNoValidKeypoints, "oks: no keypoint is valid in both sequences");
  }
  return total / static_cast<double>(frames_used);
}

namespace {

/// Integer pixel rectangle [x0, x1) × [y0, y1).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

/// Pixels that any valid keypoint's truncated bump reaches.
Rect support(std::span<const KeypointSet> persons, int width, int height, int radius, Rect acc) {
  for (const KeypointSet& ks : persons) {
    for (std::size_t j = 0; j < kNumKeypoints; ++j) {
      if (!ks.valid[j]) continue;
      const long cx = std::lround(ks.points[j].x), cy = std::lround(ks.points[j].y);
      const int x0 = static_cast<int>(std::clamp<long>(cx - radius, 0, width));
      const int x1 = static_cast<int>(std::clamp<long>(cx + radius + 1, 0, width));
      const int y0 = static_cast<int>(std::clamp<long>(cy - radius, 0, height));
      const int y1 = static_cast<int>(std::clamp<long>(cy + radius + 1, 0, height));
      if (x1 <= x0 || y1 <= y0) continue;
      if (acc.empty()) {
        acc = {x0, y0, x1, y1};
      } else {
        acc = {std::min(acc.x0, x0), std::min(acc.y0, y0), std::max(acc.x1, x1), std::max(acc.y1, y1)};
      }
    }
  }
  return acc;
}

/// Rasterises into `heat`, whose pixel (0, 0) is image pixel (ox, oy).
void rasterize_into(Plane& heat, int ox, int oy, std::span<const KeypointSet> persons, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const double limit = 16.0 * sigma * sigma;
  std::vector<double> gx(2 * radius + 1), gy(2 * radius + 1);
  for (const KeypointSet& ks : persons) {
    for (std::size_t j = 0; j < kNumKeypoints; ++j) {
      if (!ks.valid[j]) continue;
      const Point2D c = ks.points[j];
      const long cx = std::lround(c.x), cy = std::lround(c.y);
      const long x0 = std::max<long>(ox, cx - radius), x1 = std::min<long>(ox + heat.width - 1, cx + radius);
      const long y0 = std::max<long>(oy, cy - radius), y1 = std::min<long>(oy + heat.height - 1, cy + radius);
      if (x1 < x0 || y1 < y0) continue;
      for (long x = x0; x <= x1; ++x) gx[x - x0] = std::exp(-(x - c.x) * (x - c.x) * inv);
      for (long y = y0; y <= y1; ++y) {
        const double dy = y - c.y;
        const double ey = std::exp(-dy * dy * inv);
        double* row = &heat.at(0, static_cast<int>(y - oy));
        for (long x = x0; x <= x1; ++x) {
          const double dx = x - c.x;
          if (dx * dx + dy * dy > limit) continue;
          double& v = row[x - ox];
          v = std::max(v, gx[x - x0] * ey);
        }
      }
    }
  }
}

}  // namespace

Plane rasterize_keypoints(std::span<const KeypointSet> persons, int width, int height, double sigma) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "rasterize_keypoints: zero-size raster");
  }
  Plane heat(width, height, 0.0);
  rasterize_into(heat, 0, 0, persons, sigma);
  return heat;
}

double pose_heat_ssim(const PoseSequence& gt, const PoseSequence& pred, int width, int height) {
  if (gt.num_frames() != pred.num_frames()) {
    throw Error(ErrorCode::kShapeMismatch, "pose_heat_ssim: frame counts differ");
  }
  if (gt.num_frames() == 0) throw Error(ErrorCode::kInsufficientData, "pose_heat_ssim: no frames");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "pose_heat_ssim: zero-size raster");
  SsimParams params;
  params.dynamic_range = 1.0;
  const int win = params.window;
  if (width < win || height < win) {
    throw Error(ErrorCode::kInvalidArgument, "pose_heat_ssim: raster smaller than the SSIM window");
  }
  const int radius = static_cast<int>(std::ceil(4.0 * kHeatmapSigma));
  const double entries = static_cast<double>(width - win + 1) * (height - win + 1);
  double total = 0.0;
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    // Where both rasters are zero the local SSIM is exactly 1, so only the
    // windows touching a bump are evaluated.
    Rect r = support(gt.frames[t], width, height, radius, {});
    r = support(pred.frames[t], width, height, radius, r);
    if (r.empty()) {
      total += 1.0;
      continue;
    }
    r = {std::max(0, r.x0 - (win - 1)), std::max(0, r.y0 - (win - 1)), std::min(width, r.x1 + win - 1),
         std::min(height, r.y1 + win - 1)};
    if (r.x1 - r.x0 < win) {
      r.x0 = std::min(r.x0, width - win);
      r.x1 = r.x0 + win;
    }
    if (r.y1 - r.y0 < win) {
      r.y0 = std::min(r.y0, height - win);
      r.y1 = r.y0 + win;
    }
    Plane hg(r.x1 - r.x0, r.y1 - r.y0, 0.0), hp(r.x1 - r.x0, r.y1 - r.y0, 0.0);
    rasterize_into(hg, r.x0, r.y0, gt.frames[t], kHeatmapSigma);
    rasterize_into(hp, r.x0, r.y0, pred.frames[t], kHeatmapSigma);
    const Plane map = ssim_map(hp, hg, params);
    double sum = 0.0;
    for (double v : map.data) sum += v;
    const double outside = entries - static_cast<double>(map.data.size());
    total += (sum + outside) / entries;
  }
  return total / static_cast<double>(gt.num_frames());
}

double smooth_rms(const PoseSequence& seq) {
  check_length(seq, 4, "smooth_rms");
  const double f3 = seq.fps * seq.fps * seq.fps;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < seq.num_persons(); ++p) {
    for (std::size_t j = 0; j < kNumKeypoints; ++j) {
      for (std::size_t t = 0; t + 3 < seq.num_frames(); ++t) {
        if (!valid_span(seq, t, p, j, 4)) continue;
        const Point2D a = at(seq, t, p, j), b = at(seq, t + 1, p, j);
        const Point2D c = at(seq, t + 2, p, j), d = at(seq, t + 3, p, j);
        const double jx = (d.x - 3.0 * c.x + 3.0 * b.x - a.x) * f3;
        const double jy = (d.y - 3.0 * c.y + 3.0 * b.y - a.y) * f3;
        sum += jx * jx + jy * jy;
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorCode::kNoValidKeypoints, "smooth_rms: no fully valid 4-frame stencil");
  return std::sqrt(sum / static_cast<double>(n));
}

double time_dyn_rmse(const PoseSequence& pred, const PoseSequence& gt, TimeDynMode mode) {
  check_length(pred, 3, "time_dyn_rmse");
  check_length(gt, 3, "time_dyn_rmse");
  if (mode == TimeDynMode::kDifference) check_same_shape(gt, pred, "time_dyn_rmse");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < pred.num_persons(); ++p) {
    for (std::size_t j = 0; j < kNumKeypoints; ++j) {
      for (std::size_t t = 0; t + 2 < pred.num_frames(); ++t) {
        if (!valid_span(pred, t, p, j, 3)) continue;
        Point2D acc = second_difference(pred, t, p, j);
        if (mode == TimeDynMode::kDifference) {
          if (!valid_span(gt, t, p, j, 3)) continue;
          acc = acc - second_difference(gt, t, p, j);
        }
        sum += acc.x * acc.x + acc.y * acc.y;
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorCode::kNoValidKeypoints, "time_dyn_rmse: no fully valid 3-frame stencil");
  return std::sqrt(sum / static_cast<double>(n));
}

GaussianSummary velocity_summary(const PoseSequence& seq) {
  check_length(seq, 2, "fvmd");
  GaussianAccumulator acc(2);
  for (std::size_t t = 0; t + 1 < seq.num_frames(); ++t) {
    for (std::size_t p = 0; p < seq.num_persons(); ++p) {
      for (std::size_t j = 0; j < kNumKeypoints; ++j) {
        if (!valid_span(seq, t, p, j, 2)) continue;
        const Point2D a = at(seq, t, p, j), b = at(seq, t + 1, p, j);
        const double v[2] = {(b.x - a.x) * seq.fps, (b.y - a.y) * seq.fps};
        acc.add(std::span<const double>(v, 2));
      }
    }
  }
  return acc.summary();
}

double fvmd(const PoseSequence& gt, const PoseSequence& pred) {
  return frechet_distance_2d(velocity_summary(pred), velocity_summary(gt));
}

}  // namespace tvbench
