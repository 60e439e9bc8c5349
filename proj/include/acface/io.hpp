#pragma once

// File formats.
//
// ACH heatmap stacks, all integers little-endian u32:
//   "ACHM" | version=1 | width | height | channels
//   channels x (u32 byte length, UTF-8 name)
//   channels x height x width float32 LE, channel-major, row-major
//
// JSON documents (annotation, traces, evaluation report) are written with
// sorted keys, two-space indent and reals rounded to 9 significant digits.
// PGM exports are 16-bit binary ("P5\n<w> <h>\n65535\n", big-endian samples)
// with min -> 0 and max -> 65535; a constant raster exports as all zeros.

#include <acface/annotation.hpp>
#include <acface/extraction.hpp>

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// ---- raw files -------------------------------------------------------------

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  const auto b = read_file_bytes(path);
  return {b.begin(), b.end()};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// ---- ACH -------------------------------------------------------------------

inline constexpr std::uint32_t ach_version = 1;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& b) : b_(b) {}
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw FormatError(std::string("truncated ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32("payload")); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_ach(const HeatmapStack& s) {
  std::vector<std::uint8_t> out{'A', 'C', 'H', 'M'};
  detail::put_u32(out, ach_version);
  detail::put_u32(out, static_cast<std::uint32_t>(s.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(s.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(s.size()));
  for (const auto& n : s.names()) {
    detail::put_u32(out, static_cast<std::uint32_t>(n.size()));
    out.insert(out.end(), n.begin(), n.end());
  }
  for (const auto& ch : s.channels())
    for (float v : ch.data()) detail::put_f32(out, v);
  return out;
}

inline HeatmapStack decode_ach(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  if (r.str(4, "magic") != "ACHM") throw FormatError("bad magic", 0);
  const std::size_t version_at = r.offset();
  if (const auto v = r.u32("header"); v != ach_version)
    throw FormatError("unsupported version " + std::to_string(v), version_at);
  const std::size_t dims_at = r.offset();
  const std::uint32_t w = r.u32("header"), h = r.u32("header"), c = r.u32("header");
  if (c > 0 && (w == 0 || h == 0)) throw FormatError("zero raster dimension", dims_at);
  if (w > (1u << 16) || h > (1u << 16)) throw FormatError("raster dimension too large", dims_at);
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < c; ++i) {
    const std::uint32_t len = r.u32("channel name");
    names.push_back(r.str(len, "channel name"));
  }
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  r.need(plane * c * 4, "payload");
  HeatmapStack s;
  for (std::uint32_t i = 0; i < c; ++i) {
    std::vector<float> data(plane);
    for (auto& v : data) v = r.f32();
    s.add(names[i], Heatmap(static_cast<int>(w), static_cast<int>(h), std::move(data)));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after payload", r.offset());
  return s;
}

inline void write_ach(const std::string& path, const HeatmapStack& s) { write_file_bytes(path, encode_ach(s)); }
inline HeatmapStack read_ach(const std::string& path) { return decode_ach(read_file_bytes(path)); }

// ---- PGM -------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_pgm(const Heatmap& h) {
  const auto [lo, hi] = std::minmax_element(h.data().begin(), h.data().end());
  const double mn = *lo, mx = *hi;
  const std::string header = "P5\n" + std::to_string(h.width()) + " " + std::to_string(h.height()) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (float v : h.data()) {
    const std::uint16_t q =
        mx > mn ? static_cast<std::uint16_t>(std::lround((static_cast<double>(v) - mn) / (mx - mn) * 65535.0)) : 0;
    out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xFF));
  }
  return out;
}

inline void export_pgm(const Heatmap& h, const std::string& path) { write_file_bytes(path, encode_pgm(h)); }

// ---- JSON helpers ----------------------------------------------------------

/// Nearest double to the 9-significant-digit decimal of v.
inline double round9(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("cannot serialise a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline json point_json(Point2 p) { return json::array({round9(p.x), round9(p.y)}); }

inline Point2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("point must be a [x, y] pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json points_json(const std::vector<Point2>& pts) {
  json a = json::array();
  for (auto p : pts) a.push_back(point_json(p));
  return a;
}

inline std::vector<Point2> points_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("points must be an array");
  std::vector<Point2> out;
  for (const auto& p : j) out.push_back(point_from_json(p));
  return out;
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
}

// ---- annotation ------------------------------------------------------------

inline json annotation_to_json(const Annotation& a) {
  json j;
  j["image_size"] = {a.image_size.width, a.image_size.height};
  j["anchors"] = json::array();
  for (const auto& n : a.anchors) j["anchors"].push_back({{"name", n.name}, {"x", round9(n.point.x)}, {"y", round9(n.point.y)}});
  j["contours"] = json::array();
  for (const auto& c : a.contours)
    j["contours"].push_back({{"name", c.name}, {"closed", c.contour.closed()}, {"points", points_json(c.contour.points())}});
  if (!a.landmarks.empty()) {
    j["landmarks"] = json::array();
    for (const auto& g : a.landmarks) j["landmarks"].push_back({{"contour", g.name}, {"points", points_json(g.points)}});
  }
  j["normalization_pair"] = {a.normalization_pair.first, a.normalization_pair.second};
  j["parts"] = a.parts;
  return j;
}

inline Annotation annotation_from_json(const json& j) {
  try {
    Annotation a;
    const auto& size = j.at("image_size");
    if (!size.is_array() || size.size() != 2) throw std::invalid_argument("image_size must be [w, h]");
    a.image_size = {size[0].get<int>(), size[1].get<int>()};
    for (const auto& n : j.at("anchors"))
      a.anchors.push_back({n.at("name").get<std::string>(), {n.at("x").get<double>(), n.at("y").get<double>()}});
    for (const auto& c : j.at("contours"))
      a.contours.push_back({c.at("name").get<std::string>(),
                            Polyline(points_from_json(c.at("points")), c.value("closed", false))});
    if (j.contains("landmarks"))
      for (const auto& g : j.at("landmarks"))
        a.landmarks.push_back({g.at("contour").get<std::string>(), points_from_json(g.at("points"))});
    if (j.contains("normalization_pair")) {
      const auto& np = j.at("normalization_pair");
      if (!np.is_array() || np.size() != 2) throw std::invalid_argument("normalization_pair must name two anchors");
      a.normalization_pair = {np[0].get<std::string>(), np[1].get<std::string>()};
    }
    if (j.contains("parts")) a.parts = j.at("parts").get<std::map<std::string, std::string>>();
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed annotation: ") + e.what());
  }
}

inline Annotation read_annotation(const std::string& path) { return annotation_from_json(parse_json(read_text_file(path))); }
inline void write_annotation(const std::string& path, const Annotation& a) {
  write_text_file(path, dump_json(annotation_to_json(a)));
}

// ---- traces ----------------------------------------------------------------

struct ChannelTraces {
  std::string name;
  std::vector<ContourTrace> traces;
};

struct TraceDoc {
  ExtractionParams params;
  double anchor_sigma = 2.0;
  std::vector<NamedPoint> anchors;
  std::vector<ChannelTraces> channels;

  /// Anchors and contour traces as an evaluation prediction.
  Prediction to_prediction() const {
    Prediction p;
    for (const auto& a : anchors) p.anchors[a.name] = a.point;
    for (const auto& c : channels) p.contours[c.name] = traces_to_polylines(c.traces);
    return p;
  }
};

inline json trace_doc_to_json(const TraceDoc& d) {
  json j;
  j["params"] = {{"sigma", round9(d.params.sigma)},
                 {"high", round9(d.params.high_threshold)},
                 {"low", round9(d.params.low_threshold)},
                 {"min_trace_length", d.params.min_trace_length},
                 {"anchor_sigma", round9(d.anchor_sigma)}};
  j["anchors"] = json::array();
  for (const auto& a : d.anchors) j["anchors"].push_back({{"name", a.name}, {"x", round9(a.point.x)}, {"y", round9(a.point.y)}});
  j["channels"] = json::array();
  for (const auto& c : d.channels) {
    json traces = json::array();
    for (const auto& t : c.traces) {
      json scores = json::array();
      for (double s : t.scores) scores.push_back(round9(s));
      traces.push_back({{"points", points_json(t.points)}, {"scores", scores}});
    }
    j["channels"].push_back({{"name", c.name}, {"traces", traces}});
  }
  return j;
}

inline TraceDoc trace_doc_from_json(const json& j) {
  try {
    TraceDoc d;
    const auto& p = j.at("params");
    d.params = {p.at("sigma").get<double>(), p.at("high").get<double>(), p.at("low").get<double>(),
                p.at("min_trace_length").get<int>()};
    d.anchor_sigma = p.value("anchor_sigma", 2.0);
    for (const auto& a : j.at("anchors"))
      d.anchors.push_back({a.at("name").get<std::string>(), {a.at("x").get<double>(), a.at("y").get<double>()}});
    for (const auto& c : j.at("channels")) {
      ChannelTraces ch{c.at("name").get<std::string>(), {}};
      for (const auto& t : c.at("traces")) {
        ContourTrace tr{points_from_json(t.at("points")), t.at("scores").get<std::vector<double>>()};
        if (tr.points.size() != tr.scores.size()) throw std::invalid_argument("trace points/scores length mismatch");
        ch.traces.push_back(std::move(tr));
      }
      d.channels.push_back(std::move(ch));
    }
    return d;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed trace document: ") + e.what());
  }
}

/// Accepts either a trace document or an annotation as a prediction.
inline Prediction prediction_from_json(const json& j) {
  if (j.contains("channels")) return trace_doc_from_json(j).to_prediction();
  return to_prediction(annotation_from_json(j));
}

// ---- evaluation report -----------------------------------------------------

inline json eval_report_to_json(const EvalReport& r) {
  json j;
  j["nme_overall"] = round9(r.nme_overall);
  j["nme_per_part"] = json::object();
  for (const auto& [k, v] : r.nme_per_part) j["nme_per_part"][k] = round9(v);
  j["auc"] = round9(r.curve.auc);
  j["cutoff"] = round9(r.cutoff);
  j["ced"] = json::array();
  for (const auto& c : r.curve.ced) j["ced"].push_back({round9(c.nme), round9(c.fraction)});
  j["faces"] = json::array();
  for (const auto& f : r.faces) {
    json errs = json::array();
    for (const auto& e : f.errors)
      errs.push_back({{"owner", e.owner}, {"part", e.part}, {"x", round9(e.landmark.x)}, {"y", round9(e.landmark.y)},
                      {"error", round9(e.error)}, {"missing", e.missing}});
    json parts = json::object();
    for (const auto& [k, v] : f.nme_per_part) parts[k] = round9(v);
    j["faces"].push_back({{"nme", round9(f.nme)}, {"normalization", round9(f.normalization)}, {"nme_per_part", parts},
                          {"missing", f.missing}, {"per_landmark_errors", errs}});
  }
  return j;
}

inline std::string ced_csv(const CedAuc& c) {
  std::string out = "nme,fraction\n";
  char buf[64];
  for (const auto& p : c.ced) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p.nme, p.fraction);
    out += buf;
  }
  return out;
}

}  // namespace acface
