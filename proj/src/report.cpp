#include "tvbench/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "tvbench/error.hpp"

namespace tvbench {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kIdentityColumns = {"HOTA", "DetA", "AssA", "LocA", "MOTA", "MOTP",
                                                   "IDF1", "IDP",  "IDR",  "IDSW", "FP",   "FN"};
const std::vector<std::string> kInteractionColumns = {"MPJPE_2D", "OKS", "PoseSSIM", "SmoothRMS", "TimeDynRMSE", "FVMD"};
const std::vector<std::string> kQualityColumns = {"L1",      "PSNR",   "SSIM", "LPIPS", "DISTS", "CLIP",
                                                  "ST_SSIM", "GMSD_T", "FVD",  "FID",   "C_FID"};

json value_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double value_from(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw Error(ErrorCode::kSchema, "report: metric values must be numbers or null");
  return v.get<double>();
}

std::string csv_value(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return "";
  if (std::isnan(it->second)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", it->second);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool same_metrics(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (std::isnan(ia->second) != std::isnan(ib->second)) return false;
    if (!std::isnan(ia->second) && ia->second != ib->second) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> report_columns(TrackSelection track) {
  std::vector<std::string> out;
  auto add = [&](const std::vector<std::string>& cols) { out.insert(out.end(), cols.begin(), cols.end()); };
  if (track == TrackSelection::kAll || track == TrackSelection::kIdentity) add(kIdentityColumns);
  if (track == TrackSelection::kAll || track == TrackSelection::kInteraction) add(kInteractionColumns);
  if (track == TrackSelection::kAll || track == TrackSelection::kQuality) {
    add(kQualityColumns);
    for (const std::string& c : kQualityColumns) out.push_back("masked_" + c);
  }
  return out;
}

std::string track_name(TrackSelection track) {
  switch (track) {
    case TrackSelection::kIdentity: return "1";
    case TrackSelection::kInteraction: return "2";
    case TrackSelection::kQuality: return "3";
    case TrackSelection::kAll: return "all";
  }
  return "all";
}

std::map<std::string, double> CorpusReport::corpus_means() const {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const ClipReport& c : clips) {
    for (const auto& [k, v] : c.metrics) {
      if (!std::isfinite(v)) continue;
      auto& [sum, n] = acc[k];
      sum += v;
      ++n;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [k, sn] : acc) out[k] = sn.first / static_cast<double>(sn.second);
  return out;
}

std::string write_report_json(const CorpusReport& report) {
  json clips = json::array();
  for (const ClipReport& c : report.clips) {
    json metrics = json::object();
    for (const auto& [k, v] : c.metrics) metrics[k] = value_json(v);
    clips.push_back({{"clip_id", c.clip_id}, {"metrics", std::move(metrics)}, {"flags", c.flags}});
  }
  json means = json::object();
  for (const auto& [k, v] : report.corpus_means()) means[k] = value_json(v);
  json errors = json::array();
  for (const ClipError& e : report.errors) errors.push_back({{"clip", e.clip}, {"code", e.code}, {"message", e.message}});
  const json root = {{"schema_version", 1},
                     {"engine_version", report.engine_version},
                     {"config_hash", report.config_hash},
                     {"track", track_name(report.track)},
                     {"columns", report_columns(report.track)},
                     {"clips", std::move(clips)},
                     {"corpus_mean", std::move(means)},
                     {"errors", std::move(errors)}};
  return root.dump(2) + "\n";
}

std::string write_report_csv(const CorpusReport& report) {
  const std::vector<std::string> cols = report_columns(report.track);
  std::string out = "clip_id";
  for (const std::string& c : cols) out += "," + c;
  out += "\n";
  for (const ClipReport& clip : report.clips) {
    out += csv_field(clip.clip_id);
    for (const std::string& c : cols) out += "," + csv_value(clip.metrics, c);
    out += "\n";
  }
  if (!report.clips.empty()) {
    const auto means = report.corpus_means();
    out += "corpus_mean";
    for (const std::string& c : cols) out += "," + csv_value(means, c);
    out += "\n";
  }
  return out;
}

std::string write_report(const CorpusReport& report, std::string_view format) {
  if (format == "json") return write_report_json(report);
  if (format == "csv") return write_report_csv(report);
  throw Error(ErrorCode::kInvalidArgument, "unknown report format '" + std::string(format) + "'");
}

CorpusReport parse_report_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
    CorpusReport r;
    const std::string track = root.at("track").get<std::string>();
    if (track == "1") {
      r.track = TrackSelection::kIdentity;
    } else if (track == "2") {
      r.track = TrackSelection::kInteraction;
    } else if (track == "3") {
      r.track = TrackSelection::kQuality;
    } else if (track == "all") {
      r.track = TrackSelection::kAll;
    } else {
      throw Error(ErrorCode::kSchema, "report: unknown track '" + track + "'");
    }
    r.engine_version = root.at("engine_version").get<std::string>();
    r.config_hash = root.at("config_hash").get<std::string>();
    for (const json& c : root.at("clips")) {
      ClipReport clip;
      clip.clip_id = c.at("clip_id").get<std::string>();
      for (const auto& [k, v] : c.at("metrics").items()) clip.metrics[k] = value_from(v);
      clip.flags = c.at("flags").get<std::vector<std::string>>();
      r.clips.push_back(std::move(clip));
    }
    for (const json& e : root.at("errors")) {
      r.errors.push_back({e.at("clip").get<std::string>(), e.at("code").get<std::string>(),
                          e.at("message").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("report: ") + e.what());
  }
}

bool same_report(const CorpusReport& a, const CorpusReport& b) {
  if (a.track != b.track || a.engine_version != b.engine_version || a.config_hash != b.config_hash) return false;
  if (a.clips.size() != b.clips.size() || a.errors.size() != b.errors.size()) return false;
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    const ClipReport& x = a.clips[i];
    const ClipReport& y = b.clips[i];
    if (x.clip_id != y.clip_id || x.flags != y.flags || !same_metrics(x.metrics, y.metrics)) return false;
  }
  for (std::size_t i = 0; i < a.errors.size(); ++i) {
    const ClipError& x = a.errors[i];
    const ClipError& y = b.errors[i];
    if (x.clip != y.clip || x.code != y.code || x.message != y.message) return false;
  }
  return true;
}

}  // namespace tvbench
