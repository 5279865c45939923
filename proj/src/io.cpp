#include "tvbench/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <png.h>

#include "json.hpp"
#include "tvbench/error.hpp"

namespace tvbench::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& origin, const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kSchema, origin + ": " + (where.empty() ? "" : "\"" + where + "\" ") + what);
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, origin + ": malformed JSON: " + e.what());
  }
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

std::string index(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

const json& require(const json& obj, const char* key, const std::string& where, const std::string& origin) {
  if (!obj.is_object()) schema_error(origin, where, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(origin, join(where, key), "is missing");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

double number(const json& v, const std::string& where, const std::string& origin) {
  if (!v.is_number()) schema_error(origin, where, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(origin, where, "must be finite");
  return d;
}

std::int64_t integer(const json& v, const std::string& where, const std::string& origin) {
  if (!v.is_number_integer()) schema_error(origin, where, "must be an integer");
  return v.get<std::int64_t>();
}

std::size_t frame_index(const json& v, const std::string& where, const std::string& origin) {
  const std::int64_t t = integer(v, where, origin);
  if (t < 0) schema_error(origin, where, "must be non-negative");
  return static_cast<std::size_t>(t);
}

const json& array(const json& v, const std::string& where, const std::string& origin) {
  if (!v.is_array()) schema_error(origin, where, "must be an array");
  return v;
}

std::string string_field(const json& v, const std::string& where, const std::string& origin) {
  if (!v.is_string()) schema_error(origin, where, "must be a string");
  return v.get<std::string>();
}

void check_version(const json& root, const std::string& origin, bool required) {
  const json* v = optional_field(root, "schema_version");
  if (v == nullptr) {
    if (required) schema_error(origin, "schema_version", "is missing");
    return;
  }
  if (integer(*v, "schema_version", origin) != kSchemaVersion) {
    schema_error(origin, "schema_version", "must be " + std::to_string(kSchemaVersion));
  }
}

BoundingBox parse_box(const json& v, const std::string& where, const std::string& origin) {
  array(v, where, origin);
  if (v.size() != 4) schema_error(origin, where, "must hold 4 numbers");
  BoundingBox b{number(v[0], index(where, 0), origin), number(v[1], index(where, 1), origin),
                number(v[2], index(where, 2), origin), number(v[3], index(where, 3), origin)};
  if (!b.valid()) schema_error(origin, where, "must satisfy x0 <= x1 and y0 <= y1");
  return b;
}

json box_json(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

KeypointSet parse_keypoints(const json& v, const std::string& where, const std::string& origin,
                            double threshold) {
  array(v, where, origin);
  if (v.size() != kNumKeypoints) {
    schema_error(origin, where, "must hold " + std::to_string(kNumKeypoints) + " keypoints, got " +
                                    std::to_string(v.size()));
  }
  KeypointSet ks;
  for (std::size_t j = 0; j < kNumKeypoints; ++j) {
    const json& kp = v[j];
    const std::string w = index(where, j);
    array(kp, w, origin);
    if (kp.size() != 3) schema_error(origin, w, "must be [x, y, confidence]");
    ks.points[j] = {number(kp[0], w, origin), number(kp[1], w, origin)};
    ks.confidence[j] = number(kp[2], w, origin);
  }
  ks.apply_confidence_threshold(threshold);
  return ks;
}

json keypoints_json(const KeypointSet& ks) {
  json arr = json::array();
  for (std::size_t j = 0; j < kNumKeypoints; ++j) {
    arr.push_back(json::array({ks.points[j].x, ks.points[j].y, ks.confidence[j]}));
  }
  return arr;
}

std::string dump(const json& j) { return j.dump() + "\n"; }

fs::path resolve(const fs::path& base, const std::string& p) {
  return fs::absolute(base / p).lexically_normal();
}

std::string relative_to(const fs::path& p, const fs::path& dir) {
  const fs::path abs = fs::absolute(p).lexically_normal();
  const fs::path rel = abs.lexically_relative(dir);
  return (rel.empty() ? abs : rel).generic_string();
}

// Little-endian primitive codec.
struct Reader {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;
  std::string origin;

  void need(std::size_t n) {
    if (bytes.size() - pos < n) throw Error(ErrorCode::kSchema, origin + ": truncated binary file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f)) throw Error(ErrorCode::kSchema, origin + ": non-finite value");
    return f;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return s;
  }
};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f32(std::vector<unsigned char>& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Value of the last run of digits in `stem`, or -1.
long long stem_number(const std::string& stem) {
  std::size_t end = stem.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end) return -1;
  return std::stoll(stem.substr(begin, std::min<std::size_t>(end - begin, 18)));
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  write_text(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<fs::path> list_numbered(const fs::path& dir, const std::vector<std::string>& extensions) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower(entry.path().extension().string());
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    const long long na = stem_number(a.stem().string()), nb = stem_number(b.stem().string());
    if (na != nb) return na < nb;
    return a.filename().string() < b.filename().string();
  });
  return files;
}

// ---------------------------------------------------------------- tracks

TrackSet parse_tracks(std::string_view text, const std::string& origin) {
  const json root = parse_json(text, origin);
  check_version(root, origin, false);
  const json& frames = array(require(root, "frames", "", origin), "frames", origin);
  std::size_t count = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    count = std::max(count, frame_index(require(frames[i], "t", index("frames", i), origin), index("frames", i) + ".t", origin) + 1);
  }
  if (const json* n = optional_field(root, "num_frames")) {
    const std::size_t declared = frame_index(*n, "num_frames", origin);
    if (declared < count) schema_error(origin, "num_frames", "is smaller than the largest frame index + 1");
    count = declared;
  }
  TrackSet out;
  out.frames.resize(count);
  std::vector<bool> seen(count, false);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string w = index("frames", i);
    const std::size_t t = frame_index(frames[i]["t"], w + ".t", origin);
    if (seen[t]) schema_error(origin, w + ".t", "repeats frame " + std::to_string(t));
    seen[t] = true;
    const json& dets = array(require(frames[i], "detections", w, origin), w + ".detections", origin);
    for (std::size_t k = 0; k < dets.size(); ++k) {
      const std::string wd = index(w + ".detections", k);
      TrackedBox tb;
      tb.id = integer(require(dets[k], "id", wd, origin), wd + ".id", origin);
      tb.box = parse_box(require(dets[k], "bbox", wd, origin), wd + ".bbox", origin);
      out.frames[t].push_back(tb);
    }
  }
  try {
    validate(out);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, origin + ": " + e.what());
  }
  return out;
}

TrackSet load_tracks(const fs::path& path) { return parse_tracks(read_text(path), path.string()); }

void save_tracks(const fs::path& path, const TrackSet& tracks) {
  json frames = json::array();
  for (std::size_t t = 0; t < tracks.frames.size(); ++t) {
    json dets = json::array();
    for (const TrackedBox& tb : tracks.frames[t]) dets.push_back({{"id", tb.id}, {"bbox", box_json(tb.box)}});
    frames.push_back({{"t", t}, {"detections", std::move(dets)}});
  }
  write_text(path, dump({{"schema_version", kSchemaVersion}, {"num_frames", tracks.frames.size()}, {"frames", std::move(frames)}}));
}

// ----------------------------------------------------------------- poses

PoseSequence parse_poses(std::string_view text, const std::string& origin, double threshold,
                         std::optional<double> default_fps) {
  const json root = parse_json(text, origin);
  check_version(root, origin, false);
  PoseSequence seq;
  if (const json* f = optional_field(root, "fps")) {
    seq.fps = number(*f, "fps", origin);
  } else if (default_fps) {
    seq.fps = *default_fps;
  } else {
    schema_error(origin, "fps", "is missing");
  }
  if (!(seq.fps > 0.0)) schema_error(origin, "fps", "must be positive");

  const json& persons = array(require(root, "persons", "", origin), "persons", origin);
  std::size_t count = 0;
  for (std::size_t p = 0; p < persons.size(); ++p) {
    const std::string wp = index("persons", p);
    const json& frames = array(require(persons[p], "frames", wp, origin), wp + ".frames", origin);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string w = index(wp + ".frames", i);
      count = std::max(count, frame_index(require(frames[i], "t", w, origin), w + ".t", origin) + 1);
    }
  }
  if (const json* n = optional_field(root, "num_frames")) {
    const std::size_t declared = frame_index(*n, "num_frames", origin);
    if (declared < count) schema_error(origin, "num_frames", "is smaller than the largest frame index + 1");
    count = declared;
  }
  seq.frames.assign(count, std::vector<KeypointSet>(persons.size(), KeypointSet::missing()));
  for (std::size_t p = 0; p < persons.size(); ++p) {
    const std::string wp = index("persons", p);
    const json& frames = persons[p]["frames"];
    std::vector<bool> seen(count, false);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string w = index(wp + ".frames", i);
      const std::size_t t = frame_index(frames[i]["t"], w + ".t", origin);
      if (seen[t]) schema_error(origin, w + ".t", "repeats frame " + std::to_string(t));
      seen[t] = true;
      seq.frames[t][p] = parse_keypoints(require(frames[i], "keypoints", w, origin), w + ".keypoints", origin, threshold);
    }
  }
  return seq;
}

PoseSequence load_poses(const fs::path& path, double threshold, std::optional<double> default_fps) {
  return parse_poses(read_text(path), path.string(), threshold, default_fps);
}

void save_poses(const fs::path& path, const PoseSequence& poses) {
  json persons = json::array();
  for (std::size_t p = 0; p < poses.num_persons(); ++p) {
    json frames = json::array();
    for (std::size_t t = 0; t < poses.num_frames(); ++t) {
      const KeypointSet& ks = poses.frames[t][p];
      const bool blank = ks.valid_count() == 0 &&
                         std::all_of(ks.confidence.begin(), ks.confidence.end(), [](double c) { return c == 0.0; });
      if (blank) continue;
      frames.push_back({{"t", t}, {"keypoints", keypoints_json(ks)}});
    }
    persons.push_back({{"id", p}, {"frames", std::move(frames)}});
  }
  write_text(path, dump({{"schema_version", kSchemaVersion},
                         {"fps", poses.fps},
                         {"num_frames", poses.num_frames()},
                         {"persons", std::move(persons)}}));
}

// ----------------------------------------------------------------- masks

namespace {

BinaryMask mask_from_json(const json& v, const std::string& where, const std::string& origin) {
  const std::int64_t w = integer(require(v, "width", where, origin), join(where, "width"), origin);
  const std::int64_t h = integer(require(v, "height", where, origin), join(where, "height"), origin);
  const json& counts = array(require(v, "counts", where, origin), join(where, "counts"), origin);
  std::vector<std::uint32_t> c;
  c.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::int64_t n = integer(counts[i], index(join(where, "counts"), i), origin);
    if (n < 0 || n > 0xFFFFFFFFLL) schema_error(origin, index(join(where, "counts"), i), "out of range");
    c.push_back(static_cast<std::uint32_t>(n));
  }
  if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20) schema_error(origin, where, "has invalid dimensions");
  try {
    return BinaryMask(static_cast<int>(w), static_cast<int>(h), std::move(c));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, origin + ": " + e.what());
  }
}

json mask_json(const BinaryMask& m) {
  return {{"width", m.width()}, {"height", m.height()}, {"counts", m.counts()}};
}

}  // namespace

BinaryMask parse_mask(std::string_view text, const std::string& origin) {
  return mask_from_json(parse_json(text, origin), "", origin);
}

MaskSequence load_mask_sequence(const fs::path& path) {
  MaskSequence out;
  if (fs::is_directory(path)) {
    for (const fs::path& f : list_numbered(path, {".json"})) out.push_back(parse_mask(read_text(f), f.string()));
    return out;
  }
  const std::string origin = path.string();
  const json root = parse_json(read_text(path), origin);
  check_version(root, origin, false);
  const json& frames = array(require(root, "frames", "", origin), "frames", origin);
  for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(mask_from_json(frames[i], index("frames", i), origin));
  return out;
}

void save_mask(const fs::path& path, const BinaryMask& mask) { write_text(path, dump(mask_json(mask))); }

// ---------------------------------------------------------------- frames

namespace {

Frame load_ppm(const fs::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::kSchema, path.string() + ": " + what);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && pos - start < 9) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start) fail("malformed PPM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') fail("not a binary PPM (P6)");
  pos = 2;
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (maxval != 255) fail("only maxval 255 is supported");
  if (w <= 0 || h <= 0) fail("invalid dimensions");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("malformed PPM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - pos < n) fail("truncated pixel data");
  Frame f;
  f.width = static_cast<int>(w);
  f.height = static_cast<int>(h);
  f.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return f;
}

Frame load_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Frame f;
  f.width = static_cast<int>(image.width);
  f.height = static_cast<int>(image.height);
  f.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, f.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kSchema, path.string() + ": " + msg);
  }
  return f;
}

}  // namespace

Frame load_frame(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".ppm") return load_ppm(path);
  if (ext == ".png") return load_png(path);
  throw Error(ErrorCode::kSchema, path.string() + ": unsupported frame format");
}

FrameSequence load_frames(const fs::path& dir) {
  FrameSequence seq;
  for (const fs::path& f : list_numbered(dir, {".png", ".ppm"})) seq.frames.push_back(load_frame(f));
  if (seq.frames.empty()) throw Error(ErrorCode::kSchema, dir.string() + ": no frames");
  try {
    validate(seq);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, dir.string() + ": " + e.what());
  }
  return seq;
}

void save_ppm(const fs::path& path, const Frame& frame) {
  std::string header = "P6\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), frame.rgb.begin(), frame.rgb.end());
  write_bytes(path, bytes);
}

void save_png(const fs::path& path, const Frame& frame) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, frame.rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, path.string() + ": " + image.message);
  }
}

// -------------------------------------------------------------- features

FeatureSet load_features(const fs::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  Reader r{bytes, 0, path.string()};
  if (r.str(4) != "TVBF") throw Error(ErrorCode::kSchema, path.string() + ": bad magic");
  r.need(1);
  if (bytes[r.pos++] != 1) throw Error(ErrorCode::kSchema, path.string() + ": unsupported version");
  const std::uint32_t n = r.u32(), dim = r.u32(), tag_len = r.u32();
  FeatureSet fs_;
  fs_.tag = r.str(tag_len);
  if (static_cast<std::uint64_t>(n) * dim * 4 != bytes.size() - r.pos) {
    throw Error(ErrorCode::kSchema, path.string() + ": payload size does not match N x dim");
  }
  fs_.vectors.resize(n, dim);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t d = 0; d < dim; ++d) fs_.vectors(i, d) = r.f32();
  }
  return fs_;
}

void save_features(const fs::path& path, const FeatureSet& features) {
  std::vector<unsigned char> out = {'T', 'V', 'B', 'F', 1};
  put_u32(out, static_cast<std::uint32_t>(features.size()));
  put_u32(out, static_cast<std::uint32_t>(features.dim()));
  put_u32(out, static_cast<std::uint32_t>(features.tag.size()));
  out.insert(out.end(), features.tag.begin(), features.tag.end());
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    for (Eigen::Index d = 0; d < features.dim(); ++d) put_f32(out, features.vectors(i, d));
  }
  write_bytes(path, out);
}

LayerFeatureMaps load_layer_features(const fs::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  Reader r{bytes, 0, path.string()};
  if (r.str(5) != "TVLF1") throw Error(ErrorCode::kSchema, path.string() + ": bad magic");
  const std::uint32_t layers = r.u32();
  if (layers == 0) throw Error(ErrorCode::kSchema, path.string() + ": no layers");
  LayerFeatureMaps out;
  for (std::uint32_t l = 0; l < layers; ++l) {
    FeatureLayer layer;
    const std::uint32_t c = r.u32(), h = r.u32(), w = r.u32();
    const std::uint64_t values = static_cast<std::uint64_t>(c) * h * w;
    if (c == 0 || h == 0 || w == 0 || (values + c) * 4 > bytes.size() - r.pos) {
      throw Error(ErrorCode::kSchema, path.string() + ": layer " + std::to_string(l) + " has a bad shape");
    }
    layer.channels = static_cast<int>(c);
    layer.height = static_cast<int>(h);
    layer.width = static_cast<int>(w);
    layer.weights.resize(c);
    for (double& v : layer.weights) {
      v = r.f32();
      if (v < 0.0) throw Error(ErrorCode::kSchema, path.string() + ": negative layer weight");
    }
    layer.values.resize(static_cast<std::size_t>(values));
    for (double& v : layer.values) v = r.f32();
    out.layers.push_back(std::move(layer));
  }
  if (r.pos != bytes.size()) throw Error(ErrorCode::kSchema, path.string() + ": trailing bytes");
  return out;
}

void save_layer_features(const fs::path& path, const LayerFeatureMaps& maps) {
  std::vector<unsigned char> out = {'T', 'V', 'L', 'F', '1'};
  put_u32(out, static_cast<std::uint32_t>(maps.layers.size()));
  for (const FeatureLayer& l : maps.layers) {
    put_u32(out, static_cast<std::uint32_t>(l.channels));
    put_u32(out, static_cast<std::uint32_t>(l.height));
    put_u32(out, static_cast<std::uint32_t>(l.width));
    for (double v : l.weights) put_f32(out, v);
    for (double v : l.values) put_f32(out, v);
  }
  write_bytes(path, out);
}

std::vector<LayerFeatureMaps> load_layer_feature_dir(const fs::path& dir) {
  std::vector<LayerFeatureMaps> out;
  for (const fs::path& f : list_numbered(dir, {".tvlf"})) out.push_back(load_layer_features(f));
  return out;
}

// -------------------------------------------------------------- manifest

namespace {

const char* const kFeatureKeys[] = {"fvd", "fid", "clip_fid", "clip", "lpips", "dists"};

std::optional<FeaturePaths>& feature_slot(ClipFeatures& f, std::string_view key) {
  if (key == "fvd") return f.fvd;
  if (key == "fid") return f.fid;
  if (key == "clip_fid") return f.clip_fid;
  if (key == "clip") return f.clip;
  if (key == "lpips") return f.lpips;
  return f.dists;
}

fs::path existing_path(const json& v, const std::string& where, const std::string& origin, const fs::path& base) {
  const fs::path p = resolve(base, string_field(v, where, origin));
  if (!fs::exists(p)) throw Error(ErrorCode::kIo, origin + ": \"" + where + "\" refers to missing " + p.string());
  return p;
}

ClipFeatures parse_features(const json& v, const std::string& where, const std::string& origin, const fs::path& base) {
  if (!v.is_object()) schema_error(origin, where, "must be an object");
  ClipFeatures out;
  for (const auto& [key, value] : v.items()) {
    if (std::find(std::begin(kFeatureKeys), std::end(kFeatureKeys), key) == std::end(kFeatureKeys)) {
      schema_error(origin, join(where, key), "is not a known feature kind");
    }
    const std::string w = join(where, key);
    FeaturePaths fp;
    fp.gt = existing_path(require(value, "gt", w, origin), join(w, "gt"), origin, base);
    fp.pred = existing_path(require(value, "pred", w, origin), join(w, "pred"), origin, base);
    feature_slot(out, key) = fp;
  }
  return out;
}

json features_json(const ClipFeatures& f, const fs::path& dir) {
  json out = json::object();
  ClipFeatures copy = f;
  for (const char* key : kFeatureKeys) {
    const auto& slot = feature_slot(copy, key);
    if (slot) out[key] = {{"gt", relative_to(slot->gt, dir)}, {"pred", relative_to(slot->pred, dir)}};
  }
  return out;
}

}  // namespace

ClipManifest parse_manifest(std::string_view text, const fs::path& source) {
  const std::string origin = source.string();
  const json root = parse_json(text, origin);
  if (!root.is_object()) schema_error(origin, "", "manifest must be a JSON object");
  check_version(root, origin, true);
  const fs::path base = fs::absolute(source).parent_path();
  ClipManifest m;
  m.source = fs::absolute(source).lexically_normal();
  m.clip_id = string_field(require(root, "clip_id", "", origin), "clip_id", origin);
  if (m.clip_id.empty()) schema_error(origin, "clip_id", "must not be empty");
  m.fps = number(require(root, "fps", "", origin), "fps", origin);
  if (!(m.fps > 0.0)) schema_error(origin, "fps", "must be positive");
  for (const char* key : {"frame_width", "frame_height"}) {
    if (const json* v = optional_field(root, key)) {
      const std::int64_t n = integer(*v, key, origin);
      if (n <= 0 || n > 1 << 16) schema_error(origin, key, "must be a positive pixel count");
      (std::string_view(key) == "frame_width" ? m.frame_width : m.frame_height) = static_cast<int>(n);
    }
  }
  const std::pair<const char*, std::optional<fs::path>*> paths[] = {
      {"gt_frames", &m.gt_frames},   {"pred_frames", &m.pred_frames}, {"gt_poses", &m.gt_poses},
      {"pred_poses", &m.pred_poses}, {"gt_tracks", &m.gt_tracks},     {"pred_tracks", &m.pred_tracks}};
  for (const auto& [key, slot] : paths) {
    if (const json* v = optional_field(root, key)) *slot = existing_path(*v, key, origin, base);
  }
  if (const json* v = optional_field(root, "masks")) {
    array(*v, "masks", origin);
    for (std::size_t k = 0; k < v->size(); ++k) m.masks.push_back(existing_path((*v)[k], index("masks", k), origin, base));
  }
  if (const json* v = optional_field(root, "features")) m.features = parse_features(*v, "features", origin, base);
  if (const json* v = optional_field(root, "masked_features")) {
    array(*v, "masked_features", origin);
    for (std::size_t k = 0; k < v->size(); ++k) {
      m.masked_features.push_back(parse_features((*v)[k], index("masked_features", k), origin, base));
    }
  }
  return m;
}

ClipManifest load_manifest(const fs::path& path) { return parse_manifest(read_text(path), path); }

void save_manifest(const fs::path& path, const ClipManifest& m) {
  const fs::path dir = fs::absolute(path).parent_path();
  json root = {{"schema_version", kSchemaVersion}, {"clip_id", m.clip_id}, {"fps", m.fps}};
  if (m.frame_width) root["frame_width"] = *m.frame_width;
  if (m.frame_height) root["frame_height"] = *m.frame_height;
  const std::pair<const char*, const std::optional<fs::path>*> paths[] = {
      {"gt_frames", &m.gt_frames},   {"pred_frames", &m.pred_frames}, {"gt_poses", &m.gt_poses},
      {"pred_poses", &m.pred_poses}, {"gt_tracks", &m.gt_tracks},     {"pred_tracks", &m.pred_tracks}};
  for (const auto& [key, slot] : paths) {
    if (*slot) root[key] = relative_to(**slot, dir);
  }
  if (!m.masks.empty()) {
    json masks = json::array();
    for (const fs::path& p : m.masks) masks.push_back(relative_to(p, dir));
    root["masks"] = std::move(masks);
  }
  const json feats = features_json(m.features, dir);
  if (!feats.empty()) root["features"] = feats;
  if (!m.masked_features.empty()) {
    json arr = json::array();
    for (const ClipFeatures& f : m.masked_features) arr.push_back(features_json(f, dir));
    root["masked_features"] = std::move(arr);
  }
  write_text(path, root.dump(2) + "\n");
}

std::vector<fs::path> load_corpus(const fs::path& path) {
  const std::string origin = path.string();
  const json root = parse_json(read_text(path), origin);
  check_version(root, origin, true);
  const json& clips = array(require(root, "clips", "", origin), "clips", origin);
  const fs::path base = fs::absolute(path).parent_path();
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < clips.size(); ++i) out.push_back(resolve(base, string_field(clips[i], index("clips", i), origin)));
  return out;
}

void save_corpus(const fs::path& path, const std::vector<fs::path>& manifests) {
  const fs::path dir = fs::absolute(path).parent_path();
  json clips = json::array();
  for (const fs::path& p : manifests) clips.push_back(relative_to(fs::absolute(p), dir));
  write_text(path, json({{"schema_version", kSchemaVersion}, {"clips", std::move(clips)}}).dump(2) + "\n");
}

// ------------------------------------------------------- curation dumps

namespace {

template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  const std::string text = read_text(path);
  std::size_t start = 0, line = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line;
    const std::string_view sv(text.data() + start, end - start);
    if (sv.find_first_not_of(" \t\r") != std::string_view::npos) {
      const std::string origin = path.string() + ":" + std::to_string(line);
      fn(parse_json(sv, origin), origin);
    }
    start = end + 1;
  }
}

}  // namespace

DetectionDump load_detection_dump(const fs::path& path) {
  DetectionDump dump;
  std::set<std::size_t> seen;
  for_each_line(path, [&](const json& j, const std::string& origin) {
    const std::size_t t = frame_index(require(j, "t", "", origin), "t", origin);
    if (!seen.insert(t).second) schema_error(origin, "t", "repeats frame " + std::to_string(t));
    for (const char* key : {"width", "height"}) {
      if (const json* v = optional_field(j, key)) {
        const std::int64_t n = integer(*v, key, origin);
        if (n <= 0) schema_error(origin, key, "must be positive");
        auto& slot = std::string_view(key) == "width" ? dump.width : dump.height;
        if (slot && *slot != n) schema_error(origin, key, "conflicts with an earlier line");
        slot = static_cast<int>(n);
      }
    }
    if (dump.frames.size() <= t) dump.frames.resize(t + 1);
    const json& dets = array(require(j, "detections", "", origin), "detections", origin);
    for (std::size_t k = 0; k < dets.size(); ++k) {
      const std::string w = index("detections", k);
      Detection d;
      d.frame = t;
      d.box = parse_box(require(dets[k], "bbox", w, origin), w + ".bbox", origin);
      if (const json* c = optional_field(dets[k], "confidence")) d.confidence = number(*c, w + ".confidence", origin);
      const json& reid = array(require(dets[k], "reid", w, origin), w + ".reid", origin);
      if (reid.size() != kReidDim) {
        schema_error(origin, w + ".reid", "must hold " + std::to_string(kReidDim) + " values, got " + std::to_string(reid.size()));
      }
      d.reid.resize(static_cast<Eigen::Index>(kReidDim));
      for (std::size_t i = 0; i < kReidDim; ++i) d.reid[static_cast<Eigen::Index>(i)] = number(reid[i], w + ".reid", origin);
      if (d.reid.norm() == 0.0) schema_error(origin, w + ".reid", "must not be all zeros");
      dump.frames[t].push_back(std::move(d));
    }
  });
  return dump;
}

void save_detection_dump(const fs::path& path, const DetectionDump& dump) {
  std::string out;
  for (std::size_t t = 0; t < dump.frames.size(); ++t) {
    json dets = json::array();
    for (const Detection& d : dump.frames[t]) {
      std::vector<double> reid(d.reid.data(), d.reid.data() + d.reid.size());
      dets.push_back({{"bbox", box_json(d.box)}, {"confidence", d.confidence}, {"reid", reid}});
    }
    json line = {{"t", t}, {"detections", std::move(dets)}};
    if (t == 0 && dump.width) line["width"] = *dump.width;
    if (t == 0 && dump.height) line["height"] = *dump.height;
    out += line.dump() + "\n";
  }
  write_text(path, out);
}

std::vector<std::vector<KeypointSet>> load_pose_dump(const fs::path& path, double threshold,
                                                     std::optional<std::size_t> frames) {
  std::vector<std::vector<KeypointSet>> out(frames.value_or(0));
  std::set<std::size_t> seen;
  for_each_line(path, [&](const json& j, const std::string& origin) {
    const std::size_t t = frame_index(require(j, "t", "", origin), "t", origin);
    if (!seen.insert(t).second) schema_error(origin, "t", "repeats frame " + std::to_string(t));
    if (frames && t >= *frames) schema_error(origin, "t", "exceeds the clip length");
    if (out.size() <= t) out.resize(t + 1);
    const json& poses = array(require(j, "poses", "", origin), "poses", origin);
    for (std::size_t i = 0; i < poses.size(); ++i) out[t].push_back(parse_keypoints(poses[i], index("poses", i), origin, threshold));
  });
  return out;
}

void save_pose_dump(const fs::path& path, const std::vector<std::vector<KeypointSet>>& poses) {
  std::string out;
  for (std::size_t t = 0; t < poses.size(); ++t) {
    json arr = json::array();
    for (const KeypointSet& ks : poses[t]) arr.push_back(keypoints_json(ks));
    out += json({{"t", t}, {"poses", std::move(arr)}}).dump() + "\n";
  }
  write_text(path, out);
}

}  // namespace tvbench::io
