#include "tvbench/curation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "tvbench/assignment.hpp"
#include "tvbench/error.hpp"

namespace tvbench {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Eigen::VectorXd unit_reid(const Detection& d) {
  if (static_cast<std::size_t>(d.reid.size()) != kReidDim) {
    throw Error(ErrorCode::kInvalidArgument, "detection at frame " + std::to_string(d.frame) +
                                                 ": reid has " + std::to_string(d.reid.size()) +
                                                 " entries, expected " + std::to_string(kReidDim));
  }
  if (!d.reid.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "detection at frame " + std::to_string(d.frame) + ": non-finite reid");
  }
  const double n = d.reid.norm();
  if (n == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "detection at frame " + std::to_string(d.frame) + ": zero reid vector");
  }
  return d.reid / n;
}

const Track& find_track(const std::vector<Track>& tracks, std::int64_t id) {
  for (const Track& t : tracks) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown track id " + std::to_string(id));
}

/// Box of the member at `frame`, if any.
const Detection* member_at(const Track& track, std::size_t frame) {
  auto it = std::lower_bound(track.members.begin(), track.members.end(), frame,
                             [](const Detection& d, std::size_t f) { return d.frame < f; });
  if (it == track.members.end() || it->frame != frame) return nullptr;
  return &*it;
}

}  // namespace

Eigen::VectorXd Track::centroid() const {
  const double n = reid_sum.norm();
  if (n == 0.0) return Eigen::VectorXd::Zero(reid_sum.size());
  return reid_sum / n;
}

std::vector<Track> associate(const DetectionFrames& frames, const AssociationConfig& config) {
  std::vector<Track> tracks;
  std::vector<std::size_t> open;  // indices into tracks, ascending id
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& dets = frames[t];
    std::vector<Eigen::VectorXd> units;
    units.reserve(dets.size());
    for (const Detection& d : dets) {
      if (!d.box.valid()) {
        throw Error(ErrorCode::kInvalidArgument, "detection at frame " + std::to_string(t) + ": invalid box");
      }
      units.push_back(unit_reid(d));
    }

    open.erase(std::remove_if(open.begin(), open.end(),
                              [&](std::size_t i) { return t - tracks[i].last_frame() > config.max_gap + 1; }),
               open.end());

    std::vector<bool> taken(dets.size(), false);
    if (!open.empty() && !dets.empty()) {
      CostMatrix cost(open.size(), dets.size());
      for (std::size_t r = 0; r < open.size(); ++r) {
        const Track& tr = tracks[open[r]];
        const Eigen::VectorXd c = tr.centroid();
        const BoundingBox& last = tr.members.back().box;
        for (std::size_t k = 0; k < dets.size(); ++k) {
          const double iou = box_iou(last, dets[k].box);
          const double cosine = c.dot(units[k]);
          cost(r, k) = config.spatial_weight * (1.0 - iou) + config.reid_weight * (1.0 - cosine);
        }
      }
      const Matching m = threshold_match(cost, config.max_cost);
      for (const auto& [r, k] : m.pairs) {
        Track& tr = tracks[open[r]];
        Detection d = dets[k];
        d.frame = t;
        tr.members.push_back(std::move(d));
        tr.reid_sum += units[k];
        taken[k] = true;
      }
    }
    for (std::size_t k = 0; k < dets.size(); ++k) {
      if (taken[k]) continue;
      Track tr;
      tr.id = static_cast<std::int64_t>(tracks.size());
      Detection d = dets[k];
      d.frame = t;
      tr.members.push_back(std::move(d));
      tr.reid_sum = units[k];
      open.push_back(tracks.size());
      tracks.push_back(std::move(tr));
    }
  }
  return tracks;
}

std::vector<SubjectScore> score_subjects(const std::vector<Track>& tracks, std::size_t total_frames) {
  if (total_frames == 0) throw Error(ErrorCode::kInvalidArgument, "score_subjects: zero frames");
  std::vector<SubjectScore> out;
  out.reserve(tracks.size());
  for (const Track& tr : tracks) {
    if (tr.members.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "score_subjects: track " + std::to_string(tr.id) + " is empty");
    }
    const Eigen::VectorXd c = tr.centroid();
    double sum = 0.0;
    for (const Detection& d : tr.members) sum += (unit_reid(d).dot(c) + 1.0) / 2.0;
    SubjectScore s;
    s.track_id = tr.id;
    s.coverage = static_cast<double>(tr.members.size()) / static_cast<double>(total_frames);
    s.consistency = sum / static_cast<double>(tr.members.size());
    s.quality = kCoverageWeight * s.coverage + kConsistencyWeight * s.consistency;
    out.push_back(s);
  }
  return out;
}

std::optional<std::array<std::int64_t, 2>> select_primary(const std::vector<SubjectScore>& scores,
                                                          double min_coverage) {
  std::vector<SubjectScore> eligible;
  for (const SubjectScore& s : scores) {
    if (s.coverage >= min_coverage) eligible.push_back(s);
  }
  if (eligible.size() < 2) return std::nullopt;
  std::sort(eligible.begin(), eligible.end(), [](const SubjectScore& a, const SubjectScore& b) {
    if (a.quality != b.quality) return a.quality > b.quality;
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return a.track_id < b.track_id;
  });
  return std::array<std::int64_t, 2>{eligible[0].track_id, eligible[1].track_id};
}

PersonBoxes boxes_from_masks(const std::vector<MaskSequence>& masks) {
  PersonBoxes out(masks.size());
  for (std::size_t k = 0; k < masks.size(); ++k) {
    out[k].reserve(masks[k].size());
    for (const BinaryMask& m : masks[k]) {
      if (m.empty()) {
        out[k].push_back(std::nullopt);
      } else {
        out[k].push_back(bbox_from_mask(m));
      }
    }
  }
  return out;
}

PoseAssignment assign_poses(const std::vector<std::vector<KeypointSet>>& poses,
                            const PersonBoxes& persons, double fps) {
  const std::size_t T = poses.size();
  for (const auto& p : persons) {
    if (p.size() != T) {
      throw Error(ErrorCode::kShapeMismatch, "assign_poses: person boxes cover " + std::to_string(p.size()) +
                                                 " frames, poses " + std::to_string(T));
    }
  }
  PoseAssignment out;
  out.poses.fps = fps;
  out.poses.frames.assign(T, std::vector<KeypointSet>(persons.size(), KeypointSet::missing()));
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<std::size_t> cand;
    std::vector<BoundingBox> pose_boxes;
    for (std::size_t i = 0; i < poses[t].size(); ++i) {
      const auto pts = poses[t][i].valid_points();
      if (pts.empty()) continue;
      cand.push_back(i);
      pose_boxes.push_back(enclosing_box(pts));
    }
    std::vector<std::size_t> people;
    for (std::size_t k = 0; k < persons.size(); ++k) {
      if (persons[k][t]) people.push_back(k);
    }
    std::vector<bool> used(cand.size(), false);
    if (!cand.empty() && !people.empty()) {
      CostMatrix cost(cand.size(), people.size());
      for (std::size_t r = 0; r < cand.size(); ++r) {
        for (std::size_t c = 0; c < people.size(); ++c) {
          cost(r, c) = 1.0 - box_iou(pose_boxes[r], *persons[people[c]][t]);
        }
      }
      const Matching m = solve_assignment(cost);
      for (const auto& [r, c] : m.pairs) {
        if (cost(r, c) >= 1.0) continue;
        out.poses.frames[t][people[c]] = poses[t][cand[r]];
        used[r] = true;
      }
    }
    out.dropped_poses += static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
    for (std::size_t k = 0; k < persons.size(); ++k) {
      if (out.poses.frames[t][k].valid_count() == 0) ++out.unmatched_slots;
    }
  }
  return out;
}

ClipVerdict filter_clip(const std::vector<Track>& tracks, const std::vector<SubjectScore>& scores,
                        std::size_t total_frames, int frame_width, int frame_height,
                        const FilterConfig& config) {
  if (total_frames == 0) throw Error(ErrorCode::kInvalidArgument, "filter_clip: zero frames");
  if (frame_width <= 0 || frame_height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "filter_clip: frame dimensions must be positive");
  }
  ClipVerdict v;
  for (const SubjectScore& s : scores) {
    if (s.coverage >= config.min_coverage) ++v.eligible_subjects;
  }
  if (v.eligible_subjects != config.required_subjects) {
    v.reasons.push_back({"subjects", static_cast<double>(v.eligible_subjects),
                         "exact " + std::to_string(config.required_subjects) + " primary subjects: found " +
                             std::to_string(v.eligible_subjects) + " with coverage >= " +
                             fmt(config.min_coverage)});
  }
  v.selected = select_primary(scores, config.min_coverage);
  if (v.selected) {
    const Track& a = find_track(tracks, (*v.selected)[0]);
    const Track& b = find_track(tracks, (*v.selected)[1]);

    v.frame_overlap.assign(total_frames, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < total_frames; ++t) {
      const Detection* da = member_at(a, t);
      const Detection* db = member_at(b, t);
      if (da == nullptr || db == nullptr) continue;
      v.frame_overlap[t] = box_iou(da->box, db->box);
      v.max_overlap = std::max(v.max_overlap, v.frame_overlap[t]);
    }
    if (!(v.max_overlap < config.max_overlap_iou)) {
      v.reasons.push_back({"overlap", v.max_overlap,
                           "overlap " + fmt(v.max_overlap) + " >= " + fmt(config.max_overlap_iou)});
    }

    const double frame_area = static_cast<double>(frame_width) * frame_height;
    v.min_area_fraction = std::numeric_limits<double>::infinity();
    v.max_area_fraction = 0.0;
    for (const Track* tr : {&a, &b}) {
      for (const Detection& d : tr->members) {
        const double f = d.box.area() / frame_area;
        v.min_area_fraction = std::min(v.min_area_fraction, f);
        v.max_area_fraction = std::max(v.max_area_fraction, f);
      }
    }
    if (!(v.min_area_fraction > config.min_area_fraction)) {
      v.reasons.push_back({"area", v.min_area_fraction,
                           "area " + fmt(v.min_area_fraction) + " <= " + fmt(config.min_area_fraction)});
    }
    if (!(v.max_area_fraction < config.max_area_fraction)) {
      v.reasons.push_back({"area", v.max_area_fraction,
                           "area " + fmt(v.max_area_fraction) + " >= " + fmt(config.max_area_fraction)});
    }

    for (int i = 0; i < 2; ++i) {
      const Track& tr = i == 0 ? a : b;
      std::size_t hit = 0;
      for (const Detection& d : tr.members) hit += d.frame < total_frames ? 1 : 0;
      v.tracking[i] = static_cast<double>(hit) / static_cast<double>(total_frames);
    }
    const double worst = std::min(v.tracking[0], v.tracking[1]);
    if (!(worst > config.min_tracking)) {
      v.reasons.push_back({"tracking", worst,
                           "tracking " + fmt(worst) + " <= " + fmt(config.min_tracking)});
    }
  }
  v.accepted = v.reasons.empty();
  return v;
}

}  // namespace tvbench
