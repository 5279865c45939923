#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tvbench {

inline constexpr const char* kEngineVersion = "1.0.0";

enum class TrackSelection { kIdentity = 1, kInteraction = 2, kQuality = 3, kAll = 0 };

/// Report columns of a track, in table order (clip_id excluded).
std::vector<std::string> report_columns(TrackSelection track);

/// Scores on report scale, keyed by column name. Undefined values are NaN;
/// metrics that were not computed are absent. Extra keys (e.g. DISTS_raw)
/// appear in JSON only.
struct ClipReport {
  std::string clip_id;
  std::map<std::string, double> metrics;
  std::vector<std::string> flags;
};

struct ClipError {
  std::string clip;
  std::string code;
  std::string message;
};

struct CorpusReport {
  TrackSelection track = TrackSelection::kAll;
  std::string engine_version = kEngineVersion;
  std::string config_hash;
  std::vector<ClipReport> clips;
  std::vector<ClipError> errors;

  /// Arithmetic mean over clips with a finite value, per metric key.
  std::map<std::string, double> corpus_means() const;
};

std::string track_name(TrackSelection track);

/// Stable-key JSON with full precision; NaN is written as null.
std::string write_report_json(const CorpusReport& report);
/// Header plus one row per clip and a corpus_mean row; 6 significant digits.
std::string write_report_csv(const CorpusReport& report);
std::string write_report(const CorpusReport& report, std::string_view format);

CorpusReport parse_report_json(std::string_view text);

/// Field-wise equality treating NaN as equal to NaN.
bool same_report(const CorpusReport& a, const CorpusReport& b);

}  // namespace tvbench
