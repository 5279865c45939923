#include "tvbench/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>

#include "tvbench/error.hpp"
#include "tvbench/io.hpp"

namespace tvbench {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno != 0 || !std::isfinite(d)) {
    throw Error(ErrorCode::kSchema, "config: " + key + " expects a number, got '" + v + "'");
  }
  return d;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d) || d > 1e9) {
    throw Error(ErrorCode::kSchema, "config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(d);
}

std::string to_string_value(const std::string& key, const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (v.find_first_of(" \t\"=") == std::string::npos && !v.empty()) return v;
  throw Error(ErrorCode::kSchema, "config: " + key + " expects a string, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Key {
  std::function<void(EngineConfig&, const std::string&)> set;
  std::function<std::string(const EngineConfig&)> get;  ///< null: not part of the hash
};

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> k;
    auto real = [&](const char* name, double EngineConfig::*outer) {
      k[name] = {[=](EngineConfig& c, const std::string& v) { c.*outer = to_double(name, v); },
                 [=](const EngineConfig& c) { return fmt(c.*outer); }};
    };
    auto assoc = [&](const char* name, double AssociationConfig::*field) {
      k[name] = {[=](EngineConfig& c, const std::string& v) { c.association.*field = to_double(name, v); },
                 [=](const EngineConfig& c) { return fmt(c.association.*field); }};
    };
    auto filter = [&](const char* name, double FilterConfig::*field) {
      k[name] = {[=](EngineConfig& c, const std::string& v) { c.filter.*field = to_double(name, v); },
                 [=](const EngineConfig& c) { return fmt(c.filter.*field); }};
    };
    real("tracking.clear_iou", &EngineConfig::clear_iou);
    real("pose.keypoint_confidence", &EngineConfig::keypoint_confidence);
    k["pose.time_dyn"] = {
        [](EngineConfig& c, const std::string& v) {
          const std::string s = to_string_value("pose.time_dyn", v);
          if (s == "prediction") {
            c.time_dyn = TimeDynMode::kPrediction;
          } else if (s == "difference") {
            c.time_dyn = TimeDynMode::kDifference;
          } else {
            throw Error(ErrorCode::kSchema, "config: pose.time_dyn must be \"prediction\" or \"difference\"");
          }
        },
        [](const EngineConfig& c) {
          return std::string(c.time_dyn == TimeDynMode::kPrediction ? "prediction" : "difference");
        }};
    k["pose.heatmap_size"] = {
        [](EngineConfig& c, const std::string& v) { c.heatmap_size = static_cast<int>(to_count("pose.heatmap_size", v)); },
        [](const EngineConfig& c) { return std::to_string(c.heatmap_size); }};
    assoc("association.spatial_weight", &AssociationConfig::spatial_weight);
    assoc("association.reid_weight", &AssociationConfig::reid_weight);
    assoc("association.max_cost", &AssociationConfig::max_cost);
    k["association.max_gap"] = {
        [](EngineConfig& c, const std::string& v) { c.association.max_gap = to_count("association.max_gap", v); },
        [](const EngineConfig& c) { return std::to_string(c.association.max_gap); }};
    filter("filter.max_overlap_iou", &FilterConfig::max_overlap_iou);
    filter("filter.min_area_fraction", &FilterConfig::min_area_fraction);
    filter("filter.max_area_fraction", &FilterConfig::max_area_fraction);
    filter("filter.min_coverage", &FilterConfig::min_coverage);
    filter("filter.min_tracking", &FilterConfig::min_tracking);
    k["filter.required_subjects"] = {
        [](EngineConfig& c, const std::string& v) { c.filter.required_subjects = to_count("filter.required_subjects", v); },
        [](const EngineConfig& c) { return std::to_string(c.filter.required_subjects); }};
    k["engine.threads"] = {
        [](EngineConfig& c, const std::string& v) { c.threads = to_count("engine.threads", v); }, nullptr};
    k["engine.format"] = {
        [](EngineConfig& c, const std::string& v) { c.format = to_string_value("engine.format", v); }, nullptr};
    return k;
  }();
  return table;
}

void in_range(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kSchema, "config: " + what);
}

}  // namespace

void set_config_value(EngineConfig& config, const std::string& key, const std::string& value) {
  const auto it = keys().find(key);
  if (it == keys().end()) throw Error(ErrorCode::kSchema, "config: unknown key '" + key + "'");
  std::string v = trim(value);
  if (v == "true" || v == "false") {
    throw Error(ErrorCode::kSchema, "config: " + key + " does not take a boolean");
  }
  it->second.set(config, v);
}

void check_config(const EngineConfig& c) {
  in_range(c.clear_iou > 0.0 && c.clear_iou <= 1.0, "tracking.clear_iou must be in (0, 1]");
  in_range(c.keypoint_confidence >= 0.0 && c.keypoint_confidence <= 1.0, "pose.keypoint_confidence must be in [0, 1]");
  in_range(c.heatmap_size >= 11, "pose.heatmap_size must be at least 11");
  in_range(c.association.spatial_weight >= 0.0 && c.association.reid_weight >= 0.0,
           "association weights must be non-negative");
  in_range(c.association.max_cost >= 0.0, "association.max_cost must be non-negative");
  const FilterConfig& f = c.filter;
  in_range(f.max_overlap_iou >= 0.0 && f.max_overlap_iou <= 1.0, "filter.max_overlap_iou must be in [0, 1]");
  in_range(f.min_area_fraction >= 0.0 && f.min_area_fraction < f.max_area_fraction && f.max_area_fraction <= 1.0,
           "filter area fractions must satisfy 0 <= min < max <= 1");
  in_range(f.min_coverage >= 0.0 && f.min_coverage <= 1.0, "filter.min_coverage must be in [0, 1]");
  in_range(f.min_tracking >= 0.0 && f.min_tracking <= 1.0, "filter.min_tracking must be in [0, 1]");
  in_range(f.required_subjects == 2, "filter.required_subjects must be 2");
  in_range(c.format == "json" || c.format == "csv", "engine.format must be \"json\" or \"csv\"");
}

EngineConfig parse_config(std::string_view text, const std::string& origin) {
  EngineConfig config;
  std::string section;
  std::size_t start = 0, line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string line(text.substr(start, end - start));
    start = end + 1;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::kSchema, where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kSchema, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      set_config_value(config, full, line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, where + ": " + e.what());
    }
  }
  check_config(config);
  return config;
}

EngineConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_text(path), path.string());
}

std::string canonical_config(const EngineConfig& config) {
  std::string out;
  for (const auto& [name, key] : keys()) {
    if (!key.get) continue;
    out += name + " = " + key.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const EngineConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical_config(config)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tvbench
