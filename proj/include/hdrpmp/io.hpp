#pragma once

// File formats:
//   P5 portable graymap   8-bit (or 16-bit) frames and integer rasters
//   Pf portable float map real-valued maps, float32; invalid pixels are NaN
//   key = value text      configs, manifests and metadata sidecars
//   comma-separated text  RMSE tables; two-column text for residual profiles

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fringe_model.hpp"
#include "grid.hpp"
#include "hdr_retrieval.hpp"
#include "metrics.hpp"

namespace hdrpmp::io {

namespace fs = std::filesystem;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_short(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw Error(ErrorCode::invalid_argument, "cannot parse " + what + " '" + text + "'");
  return v;
}

/// Angles in radians: plain numbers ("2.0943951") or multiples of pi
/// ("pi", "-pi/6", "5pi/2", "4*pi/5").
inline double parse_angle(const std::string& text) {
  std::string t = trim(text);
  const std::string original = t;
  auto fail = [&] { return Error(ErrorCode::invalid_argument, "cannot parse angle '" + original + "'"); };
  if (t.empty()) throw fail();

  double sign = 1.0;
  if (t[0] == '+' || t[0] == '-') {
    if (t[0] == '-') sign = -1.0;
    t.erase(0, 1);
  }
  double coef = 1.0;
  bool has_coef = false;
  std::size_t pos = 0;
  if (!t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '.')) {
    char* end = nullptr;
    coef = std::strtod(t.c_str(), &end);
    pos = static_cast<std::size_t>(end - t.c_str());
    has_coef = true;
  }
  if (pos < t.size() && t[pos] == '*') ++pos;
  bool has_pi = false;
  if (t.compare(pos, 2, "pi") == 0) {
    has_pi = true;
    pos += 2;
  }
  if (!has_coef && !has_pi) throw fail();
  double den = 1.0;
  if (pos < t.size() && t[pos] == '/') {
    const std::string rest = t.substr(pos + 1);
    char* end = nullptr;
    den = std::strtod(rest.c_str(), &end);
    if (rest.empty() || end != rest.c_str() + rest.size() || den == 0.0) throw fail();
    pos = t.size();
  }
  if (pos != t.size()) throw fail();
  return sign * coef * (has_pi ? pi : 1.0) / den;
}

inline std::vector<double> parse_angle_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_angle(item));
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

// ---------------------------------------------------------------------------
// key = value files

/// Ordered key-value pairs. '#' starts a comment line; later keys override
/// earlier ones.
class KeyValueFile {
 public:
  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_)
      if (k == key) {
        v = std::move(value);
        return;
      }
    entries_.emplace_back(key, std::move(value));
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  void merge(const KeyValueFile& other) {
    for (const auto& [k, v] : other.entries_) set(k, v);
  }

  bool contains(const std::string& key) const { return get(key).has_value(); }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return v;
    return std::nullopt;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorCode::invalid_argument, "missing key '" + key + "'" + (origin_.empty() ? "" : " in " + origin_));
    return *v;
  }

  double number(const std::string& key) const { return parse_number(require(key), key); }

  bool flag(const std::string& key) const {
    const std::string v = require(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::invalid_argument, "key '" + key + "' is not a boolean: '" + v + "'");
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  std::string str(const std::string& prefix = "") const {
    std::string out;
    for (const auto& [k, v] : entries_) out += prefix + k + " = " + v + "\n";
    return out;
  }

  static KeyValueFile parse(std::istream& in, const std::string& origin = {}) {
    KeyValueFile kv;
    kv.origin_ = origin;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::invalid_argument,
                    (origin.empty() ? std::string("line ") : origin + ":") + std::to_string(lineno) + ": expected key = value");
      kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
  }

  static KeyValueFile read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::load_error, "cannot open " + path.string());
    return parse(in, path.string());
  }

  void write(const fs::path& path, const std::string& header = {}) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    if (!header.empty()) out << "# " << header << "\n";
    out << str();
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string origin_;
};

// ---------------------------------------------------------------------------
// PGM / PFM

struct GrayImage {
  Grid<double> pixels;
  int maxval = 255;
};

namespace detail {

inline std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok += c;
  }
  return tok;
}

inline std::size_t parse_dim(const std::string& tok, const fs::path& path) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0' || v <= 0)
    throw Error(ErrorCode::load_error, path.string() + ": malformed image header");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline void write_pgm(const fs::path& path, const Grid<double>& image, int maxval = 255) {
  if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::invalid_argument, "PGM maxval must be in [1, 65535]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "P5\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(image.size() * (maxval > 255 ? 2 : 1));
  for (double v : image) {
    const double c = std::isfinite(v) ? std::clamp(std::round(v), 0.0, static_cast<double>(maxval)) : 0.0;
    const auto u = static_cast<std::uint16_t>(c);
    if (maxval > 255) bytes.push_back(static_cast<unsigned char>(u >> 8));
    bytes.push_back(static_cast<unsigned char>(u & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

inline GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::load_error, "cannot open " + path.string());
  if (detail::next_token(in) != "P5") throw Error(ErrorCode::load_error, path.string() + ": not a binary PGM (P5)");
  const std::size_t w = detail::parse_dim(detail::next_token(in), path);
  const std::size_t h = detail::parse_dim(detail::next_token(in), path);
  const std::size_t maxval = detail::parse_dim(detail::next_token(in), path);
  if (maxval > 65535) throw Error(ErrorCode::load_error, path.string() + ": PGM maxval out of range");

  const std::size_t bpp = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> bytes(w * h * bpp);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw Error(ErrorCode::load_error, path.string() + ": truncated pixel data");

  GrayImage img{Grid<double>(w, h), static_cast<int>(maxval)};
  for (std::size_t i = 0; i < w * h; ++i)
    img.pixels[i] = bpp == 2 ? static_cast<double>((bytes[2 * i] << 8) | bytes[2 * i + 1]) : bytes[i];
  return img;
}

/// Grayscale PFM, little-endian, bottom row first.
inline void write_pfm(const fs::path& path, const Grid<double>& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "Pf\n" << image.width() << " " << image.height() << "\n-1.0\n";
  std::vector<unsigned char> bytes(image.size() * 4);
  std::size_t o = 0;
  for (std::size_t r = image.height(); r-- > 0;)
    for (std::size_t x = 0; x < image.width(); ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(image(x, r)));
      for (int b = 0; b < 4; ++b) bytes[o++] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
    }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

inline Grid<double> read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::load_error, "cannot open " + path.string());
  const std::string magic = detail::next_token(in);
  if (magic != "Pf") throw Error(ErrorCode::load_error, path.string() + ": not a grayscale PFM (Pf)");
  const std::size_t w = detail::parse_dim(detail::next_token(in), path);
  const std::size_t h = detail::parse_dim(detail::next_token(in), path);
  const std::string scale_tok = detail::next_token(in);
  char* end = nullptr;
  const double scale = std::strtod(scale_tok.c_str(), &end);
  if (scale_tok.empty() || *end != '\0' || scale == 0.0)
    throw Error(ErrorCode::load_error, path.string() + ": malformed PFM scale");
  const bool little = scale < 0.0;

  std::vector<unsigned char> bytes(w * h * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw Error(ErrorCode::load_error, path.string() + ": truncated pixel data");

  Grid<double> img(w, h);
  std::size_t o = 0;
  for (std::size_t r = h; r-- > 0;)
    for (std::size_t x = 0; x < w; ++x, o += 4) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const std::uint32_t byte = bytes[o + static_cast<std::size_t>(b)];
        bits |= little ? byte << (8 * b) : byte << (8 * (3 - b));
      }
      img(x, r) = static_cast<double>(std::bit_cast<float>(bits));
    }
  return img;
}

/// Invalid pixels are written as NaN and read back as invalid.
inline void save_phase_map(const fs::path& path, const PhaseMap& map) {
  Grid<double> v = map.values;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!map.mask[i]) v[i] = std::numeric_limits<double>::quiet_NaN();
  write_pfm(path, v);
}

inline PhaseMap load_phase_map(const fs::path& path) {
  Grid<double> v = read_pfm(path);
  Mask m(v.width(), v.height(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    m[i] = std::isfinite(v[i]) ? 1 : 0;
    if (!m[i]) v[i] = 0.0;
  }
  return PhaseMap(std::move(v), std::move(m));
}

// ---------------------------------------------------------------------------
// Stacks

enum class FrameFormat { pgm, pfm };

/// Frame lists are explicit and ordered; paths are relative to the manifest.
struct StackManifest {
  std::vector<fs::path> regular;
  std::vector<fs::path> inverted;
  PhaseShiftSchedule schedule;
  int bit_depth = 8;
  double saturation_threshold = 250.0;
  std::optional<fs::path> ground_truth;
  KeyValueFile metadata;  // everything else found in the file
};

inline StackManifest read_manifest(const fs::path& path) {
  const KeyValueFile kv = KeyValueFile::read(path);
  const fs::path base = path.parent_path();
  StackManifest m;
  m.schedule.steps = parse_angle_list(kv.require("steps"));
  m.bit_depth = static_cast<int>(kv.get("bit_depth") ? kv.number("bit_depth") : 8);
  if (auto t = kv.get("saturation_threshold")) m.saturation_threshold = parse_number(*t, "saturation_threshold");
  for (const auto& p : split_list(kv.require("regular"))) m.regular.push_back(base / p);
  for (const auto& p : split_list(kv.require("inverted"))) m.inverted.push_back(base / p);
  if (auto gt = kv.get("ground_truth"); gt && !gt->empty()) m.ground_truth = base / *gt;
  static const char* known[] = {"steps", "bit_depth", "saturation_threshold", "regular", "inverted", "ground_truth"};
  for (const auto& [k, v] : kv.entries())
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) m.metadata.set(k, v);
  return m;
}

namespace detail {

inline Grid<double> load_frame(const fs::path& path, int bit_depth) {
  if (!fs::exists(path)) throw Error(ErrorCode::load_error, "frame " + path.string() + " does not exist");
  const std::string ext = path.extension().string();
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".pgm") {
    GrayImage img = read_pgm(path);
    const int limit = (1 << bit_depth) - 1;
    if (img.maxval > limit)
      throw Error(ErrorCode::load_error, "frame " + path.string() + " has maxval " + std::to_string(img.maxval) +
                                             ", beyond the manifest's " + std::to_string(bit_depth) + "-bit depth");
    return std::move(img.pixels);
  }
  throw Error(ErrorCode::load_error, "frame " + path.string() + ": unsupported extension '" + ext + "'");
}

inline FringeStack load_one(const std::vector<fs::path>& paths, const StackManifest& m, PatternKind kind) {
  if (paths.size() != m.schedule.count())
    throw Error(ErrorCode::load_error, std::string(to_string(kind)) + " stack lists " + std::to_string(paths.size()) +
                                           " frames for a " + std::to_string(m.schedule.count()) + "-step schedule");
  FringeStack s;
  s.kind = kind;
  s.schedule = m.schedule;
  s.bit_depth = m.bit_depth;
  s.saturation_level = static_cast<double>((1 << m.bit_depth) - 1);
  for (const auto& p : paths) {
    s.frames.push_back(load_frame(p, m.bit_depth));
    if (!s.frames.back().same_shape(s.frames.front()))
      throw Error(ErrorCode::load_error, "frame " + p.string() + " differs in dimensions from " + paths.front().string());
  }
  for (const auto& f : s.frames) s.saturated.push_back(hdrpmp::detail::threshold_layer(f, m.saturation_threshold));
  return s;
}

}  // namespace detail

/// Regular and inverted stacks with saturation flags from the manifest threshold.
inline std::pair<FringeStack, FringeStack> load_stack(const StackManifest& m) {
  if (m.bit_depth < 1 || m.bit_depth > 16) throw Error(ErrorCode::load_error, "manifest bit depth must be in [1, 16]");
  if (m.schedule.count() == 0) throw Error(ErrorCode::load_error, "manifest lists no phase steps");
  FringeStack reg = detail::load_one(m.regular, m, PatternKind::regular);
  FringeStack inv = detail::load_one(m.inverted, m, PatternKind::inverted);
  if (!reg.frames.front().same_shape(inv.frames.front()))
    throw Error(ErrorCode::load_error, "inverted frames differ in dimensions from regular frames");
  return {std::move(reg), std::move(inv)};
}

inline std::pair<FringeStack, FringeStack> load_stack(const fs::path& manifest_path) {
  return load_stack(read_manifest(manifest_path));
}

/// Writes both stacks plus `stack.txt`. Frames go out as P5 when `format` is
/// pgm, otherwise as float maps with P5 previews alongside.
inline fs::path save_stack(const fs::path& dir, const FringeStack& regular, const FringeStack& inverted,
                           FrameFormat format, double saturation_threshold, const KeyValueFile& metadata = {},
                           const std::optional<std::string>& ground_truth = std::nullopt) {
  fs::create_directories(dir);
  KeyValueFile kv;
  kv.set("steps", join_doubles(regular.schedule.steps));
  kv.set("bit_depth", std::to_string(regular.bit_depth));
  kv.set("saturation_threshold", saturation_threshold);
  const int maxval = (1 << regular.bit_depth) - 1;
  for (const FringeStack* s : {&regular, &inverted}) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < s->count(); ++k) {
      const std::string stem = std::string(to_string(s->kind)) + "_" + std::to_string(k);
      write_pgm(dir / (stem + ".pgm"), s->frames[k], maxval);
      if (format == FrameFormat::pfm) write_pfm(dir / (stem + ".pfm"), s->frames[k]);
      names.push_back(stem + (format == FrameFormat::pgm ? ".pgm" : ".pfm"));
    }
    kv.set(to_string(s->kind), join(names));
  }
  if (ground_truth) kv.set("ground_truth", *ground_truth);
  kv.merge(metadata);
  const fs::path manifest = dir / "stack.txt";
  kv.write(manifest, "fringe stack manifest");
  return manifest;
}

// ---------------------------------------------------------------------------
// Retrieval maps

inline KeyValueFile result_summary(const RetrievalResult& r) {
  KeyValueFile kv;
  kv.set("method", r.method);
  kv.set("width", r.width());
  kv.set("height", r.height());
  kv.set("valid_pixels", r.count(InvalidReason::none));
  kv.set("too_few_samples", r.count(InvalidReason::too_few_samples));
  kv.set("ill_conditioned", r.count(InvalidReason::ill_conditioned));
  kv.set("zero_modulation", r.count(InvalidReason::zero_modulation));
  kv.set("closed_form_checks", r.closed_form_checks);
  kv.set("closed_form_disagreements", r.closed_form_disagreements);
  return kv;
}

/// wrapped_phase.pfm, background.pfm, modulation.pfm, reason.pgm,
/// samples_used.pgm and maps.txt in `dir`.
inline void save_maps(const fs::path& dir, const RetrievalResult& r, const KeyValueFile& metadata = {}) {
  fs::create_directories(dir);
  save_phase_map(dir / "wrapped_phase.pfm", r.wrapped);
  write_pfm(dir / "background.pfm", r.background);
  write_pfm(dir / "modulation.pfm", r.modulation);
  Grid<double> reason(r.width(), r.height()), used(r.width(), r.height());
  for (std::size_t i = 0; i < reason.size(); ++i) {
    reason[i] = static_cast<double>(static_cast<std::uint8_t>(r.reason[i]));
    used[i] = r.samples_used[i];
  }
  write_pgm(dir / "reason.pgm", reason);
  write_pgm(dir / "samples_used.pgm", used);
  KeyValueFile kv = result_summary(r);
  kv.merge(metadata);
  kv.write(dir / "maps.txt", "retrieval maps; reason codes 0=none 1=too-few-samples 2=ill-conditioned 3=zero-modulation");
}

inline RetrievalResult load_maps(const fs::path& dir) {
  const KeyValueFile kv = KeyValueFile::read(dir / "maps.txt");
  PhaseMap wrapped = load_phase_map(dir / "wrapped_phase.pfm");
  RetrievalResult r(kv.require("method"), wrapped.width(), wrapped.height());
  r.wrapped = std::move(wrapped);
  r.background = read_pfm(dir / "background.pfm");
  r.modulation = read_pfm(dir / "modulation.pfm");
  const GrayImage reason = read_pgm(dir / "reason.pgm");
  const GrayImage used = read_pgm(dir / "samples_used.pgm");
  if (!reason.pixels.same_shape(r.wrapped.values) || !used.pixels.same_shape(r.wrapped.values) ||
      !r.background.same_shape(r.wrapped.values) || !r.modulation.same_shape(r.wrapped.values))
    throw Error(ErrorCode::load_error, dir.string() + ": map dimensions disagree");
  for (std::size_t i = 0; i < reason.pixels.size(); ++i) {
    const int code = static_cast<int>(reason.pixels[i]);
    if (code > 3) throw Error(ErrorCode::load_error, dir.string() + "/reason.pgm: unknown reason code");
    r.reason[i] = static_cast<InvalidReason>(code);
    r.samples_used[i] = static_cast<std::uint8_t>(used.pixels[i]);
  }
  r.closed_form_checks = static_cast<std::size_t>(kv.number("closed_form_checks"));
  r.closed_form_disagreements = static_cast<std::size_t>(kv.number("closed_form_disagreements"));
  return r;
}

// ---------------------------------------------------------------------------
// Experiment configs, tables, profiles

inline KeyValueFile to_key_values(const ExperimentConfig& c) {
  KeyValueFile kv;
  kv.set("width", c.width);
  kv.set("height", c.height);
  kv.set("extent", c.extent);
  kv.set("steps", join_doubles(c.schedule.steps));
  kv.set("scale_factors", join_doubles(c.scale_factors));
  kv.set("period", c.period);
  kv.set("noise_mean", c.noise_mean);
  kv.set("noise_variance", c.noise_variance);
  kv.set("quantize", c.quantize);
  kv.set("saturation_level", c.saturation_level);
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  kv.set("methods", join(methods));
  kv.set("seed", std::to_string(c.seed));
  return kv;
}

/// Overlays every recognised key of `kv` onto `base`.
inline ExperimentConfig apply_key_values(ExperimentConfig c, const KeyValueFile& kv) {
  if (kv.contains("width")) c.width = static_cast<std::size_t>(kv.number("width"));
  if (kv.contains("height")) c.height = static_cast<std::size_t>(kv.number("height"));
  if (kv.contains("extent")) c.extent = kv.number("extent");
  if (auto v = kv.get("steps")) c.schedule.steps = parse_angle_list(*v);
  if (auto v = kv.get("scale_factors")) {
    c.scale_factors.clear();
    for (const auto& s : split_list(*v)) c.scale_factors.push_back(parse_number(s, "scale factor"));
  }
  if (kv.contains("period")) c.period = kv.number("period");
  if (kv.contains("noise_mean")) c.noise_mean = kv.number("noise_mean");
  if (kv.contains("noise_variance")) c.noise_variance = kv.number("noise_variance");
  if (kv.contains("quantize")) c.quantize = kv.flag("quantize");
  if (kv.contains("saturation_level")) c.saturation_level = kv.number("saturation_level");
  if (auto v = kv.get("methods")) {
    c.methods.clear();
    for (const auto& s : split_list(*v)) c.methods.push_back(parse_method(s));
  }
  if (auto v = kv.get("seed")) c.seed = std::stoull(*v);
  return c;
}

/// Long format: one line per (scale factor, method), config echoed as comments.
inline void write_table(const fs::path& path, const RmseTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "# RMSE (rad) of wrapped phase vs ground truth over the pixels valid for every applicable method\n";
  out << to_key_values(t.config).str("# ");
  out << "scale_factor,method,rmse_rad,compared_pixels,invalid_pixels,note\n";
  for (std::size_t s = 0; s < t.cells.size(); ++s)
    for (std::size_t m = 0; m < t.cells[s].size(); ++m) {
      const RmseCell& c = t.cells[s][m];
      out << format_double(t.config.scale_factors[s]) << "," << to_string(t.config.methods[m]) << ","
          << (c.rmse ? format_short(*c.rmse) : std::string("NA")) << "," << c.pixels << "," << c.invalid << ","
          << (c.note.empty() ? "" : "\"" + c.note + "\"") << "\n";
    }
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

inline void write_profile(const fs::path& path, const ResidualProfile& p, const KeyValueFile& metadata = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "# wrapped residual along row " << p.row << "\n";
  out << metadata.str("# ");
  out << "# column residual_rad\n";
  for (std::size_t x = 0; x < p.residual.size(); ++x) out << x << " " << format_double(p.residual[x]) << "\n";
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace hdrpmp::io
