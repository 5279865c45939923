#include "tvbench/track_metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "tvbench/assignment.hpp"
#include "tvbench/error.hpp"

namespace tvbench {

std::size_t TrackSet::num_detections() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.size();
  return n;
}

void validate(const TrackSet& tracks) {
  for (std::size_t t = 0; t < tracks.frames.size(); ++t) {
    std::set<std::int64_t> seen;
    for (const TrackedBox& d : tracks.frames[t]) {
      if (!seen.insert(d.id).second) {
        throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(t) +
                                                     ": duplicate track id " + std::to_string(d.id));
      }
      if (!d.box.valid()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "frame " + std::to_string(t) + ": invalid box for id " + std::to_string(d.id));
      }
    }
  }
}

std::vector<double> hota_alphas() {
  std::vector<double> alphas;
  for (int k = 1; k <= 19; ++k) alphas.push_back(0.05 * k);
  return alphas;
}

namespace {

void check_frames(const TrackSet& gt, const TrackSet& pred) {
  if (gt.num_frames() != pred.num_frames()) {
    throw Error(ErrorCode::kShapeMismatch, "track sets differ in frame count: " +
                                               std::to_string(gt.num_frames()) + " vs " +
                                               std::to_string(pred.num_frames()));
  }
  validate(gt);
  validate(pred);
}

// Maps arbitrary ids onto 0..n-1 in ascending id order.
class IdIndex {
 public:
  explicit IdIndex(const TrackSet& tracks) {
    std::set<std::int64_t> ids;
    for (const auto& f : tracks.frames) {
      for (const auto& d : f) ids.insert(d.id);
    }
    for (std::int64_t id : ids) index_.emplace(id, index_.size());
  }
  std::size_t operator()(std::int64_t id) const { return index_.at(id); }
  std::size_t size() const { return index_.size(); }

 private:
  std::unordered_map<std::int64_t, std::size_t> index_;
};

std::vector<double> iou_matrix(const std::vector<TrackedBox>& gt, const std::vector<TrackedBox>& pred) {
  std::vector<double> iou(gt.size() * pred.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) iou[i * pred.size() + j] = box_iou(gt[i].box, pred[j].box);
  }
  return iou;
}

}  // namespace

ClearScores compute_clear(const TrackSet& gt, const TrackSet& pred, double iou_threshold) {
  check_frames(gt, pred);
  ClearScores s;
  double iou_sum = 0.0;
  std::unordered_map<std::int64_t, std::int64_t> last_match;
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    const auto& g = gt.frames[t];
    const auto& p = pred.frames[t];
    s.gt_dets += static_cast<std::int64_t>(g.size());
    const auto iou = iou_matrix(g, p);
    // Gated-out pairs get a cost above the admissible ceiling of 1.
    CostMatrix cost(g.size(), p.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double v = iou[i * p.size() + j];
        cost(i, j) = v >= iou_threshold ? 1.0 - v : 2.0;
      }
    }
    const Matching m = threshold_match(cost, 1.0);
    const auto matched = static_cast<std::int64_t>(m.pairs.size());
    s.tp += matched;
    s.fn += static_cast<std::int64_t>(g.size()) - matched;
    s.fp += static_cast<std::int64_t>(p.size()) - matched;
    for (const auto& [i, j] : m.pairs) {
      iou_sum += iou[i * p.size() + j];
      auto [it, inserted] = last_match.try_emplace(g[i].id, p[j].id);
      if (!inserted) {
        if (it->second != p[j].id) ++s.idsw;
        it->second = p[j].id;
      }
    }
  }
  s.mota = s.gt_dets > 0
               ? 1.0 - static_cast<double>(s.fp + s.fn + s.idsw) / static_cast<double>(s.gt_dets)
               : std::numeric_limits<double>::quiet_NaN();
  if (s.tp > 0) {
    s.motp = iou_sum / static_cast<double>(s.tp);
  } else {
    s.motp_undefined = true;
  }
  return s;
}

IdentityScores compute_identity(const TrackSet& gt, const TrackSet& pred, double iou_threshold) {
  check_frames(gt, pred);
  const IdIndex gid(gt);
  const IdIndex pid(pred);
  CostMatrix overlap(gid.size(), pid.size());
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    const auto& g = gt.frames[t];
    const auto& p = pred.frames[t];
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (box_iou(g[i].box, p[j].box) >= iou_threshold) overlap(gid(g[i].id), pid(p[j].id)) -= 1.0;
      }
    }
  }
  const Matching m = solve_assignment(overlap);
  IdentityScores s;
  s.idtp = static_cast<std::int64_t>(std::llround(-m.total_cost));
  const auto total_gt = static_cast<std::int64_t>(gt.num_detections());
  const auto total_pred = static_cast<std::int64_t>(pred.num_detections());
  s.idfn = total_gt - s.idtp;
  s.idfp = total_pred - s.idtp;
  if (total_pred > 0) {
    s.idp = static_cast<double>(s.idtp) / static_cast<double>(total_pred);
  } else {
    s.idp_undefined = true;
  }
  if (total_gt > 0) {
    s.idr = static_cast<double>(s.idtp) / static_cast<double>(total_gt);
  } else {
    s.idr_undefined = true;
  }
  if (total_gt + total_pred > 0) {
    s.idf1 = 2.0 * static_cast<double>(s.idtp) / static_cast<double>(total_gt + total_pred);
  }
  return s;
}

HotaScores compute_hota(const TrackSet& gt, const TrackSet& pred) {
  check_frames(gt, pred);
  const auto alphas = hota_alphas();
  const std::size_t na = alphas.size();
  const IdIndex gid(gt);
  const IdIndex pid(pred);
  const std::size_t ng = gid.size();
  const std::size_t np = pid.size();

  std::vector<double> tp(na, 0.0), fn(na, 0.0), fp(na, 0.0), loc(na, 0.0), assa(na, 0.0);
  HotaScores out;
  const bool no_pred = pred.num_detections() == 0;
  const bool no_gt = gt.num_detections() == 0;
  if (no_pred || no_gt) {
    for (std::size_t a = 0; a < na; ++a) {
      AlphaScores s;
      s.alpha = alphas[a];
      s.loca = 1.0;
      out.per_alpha.push_back(s);
    }
    out.loca = 1.0;
    return out;
  }

  // Pass 1: soft co-occurrence of every identity pair, giving a global
  // alignment score used to prefer consistent identities in pass 2.
  std::vector<double> potential(ng * np, 0.0);
  std::vector<double> gt_count(ng, 0.0), pred_count(np, 0.0);
  std::vector<std::vector<double>> frame_iou(gt.num_frames());
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    const auto& g = gt.frames[t];
    const auto& p = pred.frames[t];
    frame_iou[t] = iou_matrix(g, p);
    const auto& sim = frame_iou[t];
    std::vector<double> row_sum(g.size(), 0.0), col_sum(p.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        row_sum[i] += sim[i * p.size() + j];
        col_sum[j] += sim[i * p.size() + j];
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double s = sim[i * p.size() + j];
        const double denom = row_sum[i] + col_sum[j] - s;
        if (denom > eps) potential[gid(g[i].id) * np + pid(p[j].id)] += s / denom;
      }
    }
    for (const auto& d : g) gt_count[gid(d.id)] += 1.0;
    for (const auto& d : p) pred_count[pid(d.id)] += 1.0;
  }
  std::vector<double> alignment(ng * np, 0.0);
  for (std::size_t a = 0; a < ng; ++a) {
    for (std::size_t b = 0; b < np; ++b) {
      const double pm = potential[a * np + b];
      alignment[a * np + b] = pm / (gt_count[a] + pred_count[b] - pm);
    }
  }

  // Pass 2: one assignment per frame on alignment-weighted IoU, then each
  // alpha keeps the matched pairs whose IoU reaches it.
  std::vector<std::vector<double>> matches(na, std::vector<double>(ng * np, 0.0));
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    const auto& g = gt.frames[t];
    const auto& p = pred.frames[t];
    const auto& sim = frame_iou[t];
    CostMatrix cost(g.size(), p.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        cost(i, j) = -alignment[gid(g[i].id) * np + pid(p[j].id)] * sim[i * p.size() + j];
      }
    }
    const Matching m = solve_assignment(cost);
    for (std::size_t a = 0; a < na; ++a) {
      double matched = 0.0;
      for (const auto& [i, j] : m.pairs) {
        const double s = sim[i * p.size() + j];
        if (s >= alphas[a] - eps) {
          matched += 1.0;
          loc[a] += s;
          matches[a][gid(g[i].id) * np + pid(p[j].id)] += 1.0;
        }
      }
      tp[a] += matched;
      fn[a] += static_cast<double>(g.size()) - matched;
      fp[a] += static_cast<double>(p.size()) - matched;
    }
  }

  for (std::size_t a = 0; a < na; ++a) {
    double sum = 0.0;
    for (std::size_t x = 0; x < ng; ++x) {
      for (std::size_t y = 0; y < np; ++y) {
        const double mc = matches[a][x * np + y];
        if (mc == 0.0) continue;
        sum += mc * mc / std::max(1.0, gt_count[x] + pred_count[y] - mc);
      }
    }
    AlphaScores s;
    s.alpha = alphas[a];
    s.assa = sum / std::max(1.0, tp[a]);
    s.deta = tp[a] / std::max(1.0, tp[a] + fn[a] + fp[a]);
    s.hota = std::sqrt(s.deta * s.assa);
    // No true positives at this alpha: localisation is vacuously perfect.
    s.loca = std::max(1e-10, loc[a]) / std::max(1e-10, tp[a]);
    out.per_alpha.push_back(s);
  }
  for (const auto& s : out.per_alpha) {
    out.hota += s.hota;
    out.deta += s.deta;
    out.assa += s.assa;
    out.loca += s.loca;
  }
  const double n = static_cast<double>(na);
  out.hota /= n;
  out.deta /= n;
  out.assa /= n;
  out.loca /= n;
  return out;
}

}  // namespace tvbench
