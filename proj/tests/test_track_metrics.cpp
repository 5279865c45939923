#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "support.hpp"
#include "tvbench/error.hpp"
#include "tvbench/track_metrics.hpp"

using namespace tvbench;
using tvtest::box;

namespace {


// Random sequence with up to `objects` identities near fixed anchors.
TrackSet random_tracks(Rng& rng, std::size_t frames, int objects, double presence, double jitter, int id_pool) {
  TrackSet s;
  s.frames.resize(frames);
  std::vector<int> ids(objects);
  for (auto& id : ids) id = static_cast<int>(rng.integer(1, id_pool));
  for (std::size_t t = 0; t < frames; ++t) {
    if (rng.uniform() < 0.1) ids[rng.integer(0, objects - 1)] = static_cast<int>(rng.integer(1, id_pool));
    std::vector<int> seen;
    for (int k = 0; k < objects; ++k) {
      if (rng.uniform() >= presence) continue;
      if (std::find(seen.begin(), seen.end(), ids[k]) != seen.end()) continue;
      seen.push_back(ids[k]);
      const double x = 30.0 * k + rng.uniform(-jitter, jitter), y = rng.uniform(-jitter, jitter);
      s.frames[t].push_back({ids[k], box(x, y, x + 20 + rng.uniform(0, jitter), y + 20 + rng.uniform(0, jitter))});
    }
  }
  return s;
}

// ------------------------------------------------------------ HOTA oracle
//
// Matching is exhaustive over permutations of the alignment-weighted IoU;
// association accuracy is summed over true positives from their TPA, FNA and
// FPA sets.

struct OracleHota {
  double hota = 0, deta = 0, assa = 0, loca = 0;
};

double iou(const TrackedBox& a, const TrackedBox& b) { return box_iou(a.box, b.box); }

std::vector<std::pair<int, int>> best_pairs(const std::vector<std::vector<double>>& score) {
  const std::size_t r = score.size(), c = r ? score[0].size() : 0;
  std::vector<std::pair<int, int>> best;
  if (r == 0 || c == 0) return best;
  double best_total = -1;
  const bool wide = r <= c;
  std::vector<int> perm(std::max(r, c));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    double total = 0;
    std::vector<std::pair<int, int>> cur;
    for (std::size_t i = 0; i < std::min(r, c); ++i) {
      const int gi = wide ? static_cast<int>(i) : perm[i], pj = wide ? perm[i] : static_cast<int>(i);
      total += score[gi][pj];
      cur.emplace_back(gi, pj);
    }
    if (total > best_total + 1e-12) {
      best_total = total;
      best = cur;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

OracleHota hota_oracle(const TrackSet& gt, const TrackSet& pred) {
  std::map<std::pair<int, int>, double> potential;
  std::map<int, double> gcount, pcount;
  for (std::size_t t = 0; t < gt.num_frames(); ++t) {
    const auto& g = gt.frames[t];
    const auto& p = pred.frames[t];
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        double rs = 0, cs = 0;
        for (const auto& q : p) rs += iou(g[i], q);
        for (const auto& q : g) cs += iou(q, p[j]);
        const double s = iou(g[i], p[j]);
        if (rs + cs - s > 1e-15) potential[{int(g[i].id), int(p[j].id)}] += s / (rs + cs - s);
      }
    }
    for (const auto& d : g) gcount[int(d.id)] += 1;
    for (const auto& d : p) pcount[int(d.id)] += 1;
  }
  auto align = [&](int a, int b) {
    const double pm = potential.count({a, b}) ? potential[{a, b}] : 0.0;
    return pm / (gcount[a] + pcount[b] - pm);
  };

  OracleHota out;
  for (int k = 1; k <= 19; ++k) {
    const double alpha = 0.05 * k;
    std::vector<std::pair<int, int>> tps;  // (gt id, pred id) per true positive
    double fn = 0, fp = 0, loc = 0;
    for (std::size_t t = 0; t < gt.num_frames(); ++t) {
      const auto& g = gt.frames[t];
      const auto& p = pred.frames[t];
      std::vector<std::vector<double>> score(g.size(), std::vector<double>(p.size()));
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) score[i][j] = align(int(g[i].id), int(p[j].id)) * iou(g[i], p[j]);
      }
      std::size_t matched = 0;
      for (auto [i, j] : best_pairs(score)) {
        const double s = iou(g[i], p[j]);
        if (s < alpha - 1e-9) continue;
        ++matched;
        loc += s;
        tps.emplace_back(int(g[i].id), int(p[j].id));
      }
      fn += double(g.size() - matched);
      fp += double(p.size() - matched);
    }
    double ass = 0;
    for (const auto& c : tps) {
      const double tpa = double(std::count(tps.begin(), tps.end(), c));
      const double fna = gcount[c.first] - tpa, fpa = pcount[c.second] - tpa;
      ass += tpa / (tpa + fna + fpa);
    }
    const double n = double(tps.size());
    const double deta = n / std::max(1.0, n + fn + fp);
    const double assa = n > 0 ? ass / n : 0.0;
    out.deta += deta / 19;
    out.assa += assa / 19;
    out.hota += std::sqrt(deta * assa) / 19;
    out.loca += (n > 0 ? loc / n : 1.0) / 19;
  }
  return out;
}

}  // namespace

TEST(Hota, AlphaGrid) {
  const auto a = hota_alphas();
  ASSERT_EQ(a.size(), 19u);
  EXPECT_NEAR(a.front(), 0.05, 1e-15);
  EXPECT_NEAR(a.back(), 0.95, 1e-15);
}

TEST(Hota, PerfectPredictionScoresOne) {
  Rng rng(1);
  const TrackSet gt = random_tracks(rng, 30, 3, 0.8, 2.0, 5);
  const HotaScores h = compute_hota(gt, gt);
  EXPECT_DOUBLE_EQ(h.hota, 1.0);
  EXPECT_DOUBLE_EQ(h.deta, 1.0);
  EXPECT_DOUBLE_EQ(h.assa, 1.0);
  EXPECT_DOUBLE_EQ(h.loca, 1.0);
}

TEST(Hota, SingleBoxAtHalfOverlap) {
  // IoU exactly 0.5: alphas 0.05 ... 0.50 count the pair, the other nine do not.
  TrackSet gt, pred;
  gt.frames = {{{1, box(0, 0, 2, 1)}}};
  pred.frames = {{{7, box(0, 0, 1, 1)}}};
  const HotaScores h = compute_hota(gt, pred);
  EXPECT_NEAR(h.hota, 10.0 / 19.0, 1e-12);
  EXPECT_NEAR(h.deta, 10.0 / 19.0, 1e-12);
  EXPECT_NEAR(h.assa, 10.0 / 19.0, 1e-12);
  EXPECT_NEAR(h.loca, (10 * 0.5 + 9 * 1.0) / 19.0, 1e-12);
}

TEST(Hota, EmptyInputs) {
  TrackSet gt, pred;
  gt.frames = {{{1, box(0, 0, 2, 2)}}, {}};
  pred.frames = {{}, {}};
  const HotaScores h = compute_hota(gt, pred);
  EXPECT_EQ(h.hota, 0.0);
  EXPECT_EQ(h.deta, 0.0);
  EXPECT_EQ(h.loca, 1.0);
}

TEST(Hota, MatchesEnumerationOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t frames = static_cast<std::size_t>(rng.integer(1, 12));
    const TrackSet gt = random_tracks(rng, frames, 3, 0.8, 6.0, 4);
    const TrackSet pred = random_tracks(rng, frames, 4, 0.7, 9.0, 5);
    const HotaScores h = compute_hota(gt, pred);
    const OracleHota o = hota_oracle(gt, pred);
    EXPECT_NEAR(h.hota, o.hota, 1e-9) << "trial " << trial;
    EXPECT_NEAR(h.deta, o.deta, 1e-9);
    EXPECT_NEAR(h.assa, o.assa, 1e-9);
    EXPECT_NEAR(h.loca, o.loca, 1e-9);
    EXPECT_GE(h.hota, 0.0);
    EXPECT_LE(h.hota, 1.0);
  }
}

TEST(Clear, PerfectPrediction) {
  Rng rng(2);
  const TrackSet gt = random_tracks(rng, 40, 3, 0.9, 2.0, 6);
  const ClearScores c = compute_clear(gt, gt);
  EXPECT_DOUBLE_EQ(c.mota, 1.0);
  EXPECT_DOUBLE_EQ(c.motp, 1.0);
  EXPECT_EQ(c.fp + c.fn + c.idsw, 0);
}

TEST(Clear, NegativeMota) {
  // 4 GT detections, one track found twice, the other missed; five false
  // positives far away.
  TrackSet gt, pred;
  gt.frames = {{{1, box(0, 0, 10, 10)}, {2, box(20, 0, 30, 10)}}, {{1, box(0, 0, 10, 10)}, {2, box(20, 0, 30, 10)}}};
  pred.frames = {{{10, box(0, 0, 10, 10)}, {11, box(100, 0, 110, 10)}, {12, box(120, 0, 130, 10)}, {13, box(140, 0, 150, 10)}},
                 {{10, box(0, 0, 10, 10)}, {11, box(100, 0, 110, 10)}, {12, box(120, 0, 130, 10)}}};
  const ClearScores c = compute_clear(gt, pred);
  EXPECT_EQ(c.gt_dets, 4);
  EXPECT_EQ(c.fp, 5);
  EXPECT_EQ(c.fn, 2);
  EXPECT_EQ(c.idsw, 0);
  EXPECT_DOUBLE_EQ(c.mota, -0.75);
}

TEST(Clear, IdentitySwapCountsBothTracks) {
  TrackSet gt, pred;
  gt.frames.resize(100);
  pred.frames.resize(100);
  for (std::size_t t = 0; t < 100; ++t) {
    gt.frames[t] = {{1, box(0, 0, 10, 10)}, {2, box(50, 0, 60, 10)}};
    const bool swapped = t >= 50;
    pred.frames[t] = {{swapped ? 2 : 1, box(0, 0, 10, 10)}, {swapped ? 1 : 2, box(50, 0, 60, 10)}};
  }
  const ClearScores c = compute_clear(gt, pred);
  EXPECT_EQ(c.idsw, 2);
  EXPECT_NEAR(c.mota, 0.99, 1e-12);
  const IdentityScores id = compute_identity(gt, pred);
  EXPECT_NEAR(id.idf1, 0.5, 1e-12);
  EXPECT_EQ(id.idtp, 100);
}

TEST(Clear, GateAtHalfIou) {
  TrackSet gt, pred;
  gt.frames = {{{1, box(0, 0, 2, 1)}}, {{1, box(0, 0, 10, 1)}}};
  pred.frames = {{{1, box(0, 0, 1, 1)}}, {{1, box(0, 0, 4, 1)}}};
  const ClearScores c = compute_clear(gt, pred);
  EXPECT_EQ(c.tp, 1);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.fn, 1);
  EXPECT_DOUBLE_EQ(c.motp, 0.5);
  EXPECT_EQ(compute_clear(gt, pred, 0.3).tp, 2);
}

TEST(Clear, IdSwitchIgnoresGaps) {
  TrackSet gt, pred;
  gt.frames = {{{1, box(0, 0, 4, 4)}}, {{1, box(0, 0, 4, 4)}}, {{1, box(0, 0, 4, 4)}}};
  pred.frames = {{{5, box(0, 0, 4, 4)}}, {}, {{5, box(0, 0, 4, 4)}}};
  EXPECT_EQ(compute_clear(gt, pred).idsw, 0);
  pred.frames[2] = {{6, box(0, 0, 4, 4)}};
  EXPECT_EQ(compute_clear(gt, pred).idsw, 1);
}

TEST(Clear, CountIdentities) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const TrackSet gt = random_tracks(rng, 15, 3, 0.8, 6.0, 4);
    const TrackSet pred = random_tracks(rng, 15, 4, 0.7, 9.0, 5);
    const ClearScores c = compute_clear(gt, pred);
    EXPECT_EQ(c.tp + c.fn, static_cast<std::int64_t>(gt.num_detections()));
    EXPECT_EQ(c.tp + c.fp, static_cast<std::int64_t>(pred.num_detections()));
    if (c.gt_dets > 0) EXPECT_NEAR(c.mota, 1.0 - double(c.fn + c.fp + c.idsw) / c.gt_dets, 1e-12);
    const IdentityScores id = compute_identity(gt, pred);
    EXPECT_EQ(id.idtp + id.idfn, static_cast<std::int64_t>(gt.num_detections()));
    EXPECT_EQ(id.idtp + id.idfp, static_cast<std::int64_t>(pred.num_detections()));
  }
}

TEST(Identity, HandValues) {
  // GT track 1 over 4 frames; the prediction follows it with id 3 for three
  // frames and id 4 for one.
  TrackSet gt, pred;
  for (int t = 0; t < 4; ++t) {
    gt.frames.push_back({{1, box(0, 0, 4, 4)}});
    pred.frames.push_back({{t < 3 ? 3 : 4, box(0, 0, 4, 4)}});
  }
  const IdentityScores id = compute_identity(gt, pred);
  EXPECT_EQ(id.idtp, 3);
  EXPECT_EQ(id.idfp, 1);
  EXPECT_EQ(id.idfn, 1);
  EXPECT_DOUBLE_EQ(id.idf1, 0.75);
  EXPECT_DOUBLE_EQ(id.idp, 0.75);
  EXPECT_DOUBLE_EQ(id.idr, 0.75);
}

TEST(TrackSet, Validation) {
  TrackSet dup;
  dup.frames = {{{1, box(0, 0, 1, 1)}, {1, box(2, 2, 3, 3)}}};
  EXPECT_THROW(validate(dup), Error);
  TrackSet bad;
  bad.frames = {{{1, box(3, 0, 1, 1)}}};
  EXPECT_THROW(validate(bad), Error);
  TrackSet one_empty;
  one_empty.frames.resize(1);
  EXPECT_THROW(compute_clear(dup, one_empty), Error);
}
