#pragma once

// Procedural face-like scenes with exact ground truth: 12 anchors and 13
// contours built from ellipse arcs, circular arcs and quadratic Bezier
// pieces, placed by a random similarity transform. All randomness comes from
// SplitMix64 so a seed reproduces the same scene on any platform.

#include <acface/annotation.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface {

/// SplitMix64 (Steele, Lea, Flood 2014). uniform() uses the top 53 bits.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::uint64_t state_;
};

namespace schema {

inline const std::vector<std::string>& anchor_names() {
  static const std::vector<std::string> names{
      "right_eye_inner_corner",  "right_eye_outer_corner",  "left_eye_inner_corner",   "left_eye_outer_corner",
      "right_iris_center",       "left_iris_center",        "nose_tip",                "nose_bottom_center",
      "mouth_right_outer_corner", "mouth_left_outer_corner", "mouth_right_inner_corner", "mouth_left_inner_corner"};
  return names;
}

inline const std::vector<std::string>& contour_names() {
  static const std::vector<std::string> names{
      "right_eyebrow_center_line", "left_eyebrow_center_line", "right_eye_upper_lid",   "right_eye_lower_lid",
      "left_eye_upper_lid",        "left_eye_lower_lid",       "nose_ridge",            "nose_bottom_boundary",
      "mouth_upper_lip_outer",     "mouth_lower_lip_outer",    "mouth_upper_lip_inner", "mouth_lower_lip_inner",
      "chin_boundary"};
  return names;
}

inline std::string part_of(const std::string& name) {
  if (name.find("eyebrow") != std::string::npos) return "eyebrows";
  if (name.find("eye") != std::string::npos || name.find("iris") != std::string::npos) return "eyes";
  if (name.find("nose") != std::string::npos) return "nose";
  if (name.find("mouth") != std::string::npos) return "mouth";
  return "chin";
}

}  // namespace schema

struct SceneJitter {
  double translation = 8.0;   // px, each axis
  double scale_min = 0.9;
  double scale_max = 1.1;
  double rotation = 10.0;     // degrees, symmetric
  double shape = 0.1;         // relative perturbation of face proportions
  double detail = 0.5;        // ripple amplitude in px at scale 1
  double wavelength_min = 14.0;  // ripple wavelength along the curve, px at scale 1
  double wavelength_max = 20.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  Size2 image_size{256, 256};
  std::vector<std::string> parts;  // anchor/contour names to emit; empty means all
  SceneJitter jitter;
  double margin = 6.0;             // 2 * sigma_max with sigma_max = 3
  int landmarks_per_contour = 16;

  void validate() const {
    if (image_size.width < 1 || image_size.height < 1) throw std::invalid_argument("image size must be positive");
    if (jitter.scale_min <= 0.0 || jitter.scale_max < jitter.scale_min) throw std::invalid_argument("bad scale range");
    if (jitter.translation < 0.0 || jitter.rotation < 0.0 || jitter.shape < 0.0 || jitter.shape >= 0.5 ||
        jitter.detail < 0.0 || !(jitter.wavelength_min > 0.0) || jitter.wavelength_max < jitter.wavelength_min)
      throw std::invalid_argument("jitter parameters out of range");
    if (margin < 0.0) throw std::invalid_argument("margin must be >= 0");
    if (landmarks_per_contour < 2) throw std::invalid_argument("landmarks_per_contour must be >= 2");
    const auto& a = schema::anchor_names();
    const auto& c = schema::contour_names();
    for (const auto& p : parts)
      if (std::find(a.begin(), a.end(), p) == a.end() && std::find(c.begin(), c.end(), p) == c.end())
        throw std::invalid_argument("unknown part '" + p + "'");
  }
};

struct SceneGT {
  Annotation annotation;  // landmarks holds the sparse samplings
  // The analytic curve pieces behind each emitted contour, in image
  // coordinates, each parameterised over [0, 1].
  std::map<std::string, std::vector<std::function<Point2(double)>>> curves;
};

/// k points at uniform arc length: both endpoints included on open contours,
/// k evenly spaced points from the first vertex on closed ones.
inline LandmarkChain sample_landmarks(const Polyline& c, int k) {
  if (k < 2) throw std::invalid_argument("sample_landmarks needs k >= 2");
  const double len = c.length();
  std::vector<Point2> pts;
  for (int i = 0; i < k; ++i) {
    const double s = c.closed() ? len * i / k : len * i / (k - 1);
    pts.push_back(i == k - 1 && !c.closed() ? c.points().back() : point_at_arclength(c, s));
  }
  return LandmarkChain(std::move(pts), c.closed());
}

namespace detail {

// Inserts the k uniform-arclength samples into the polyline as vertices
// (reusing a vertex closer than 1e-9), so the landmarks are vertices and
// survive rounding in serialisation bit-identically.
inline std::pair<Polyline, std::vector<Point2>> with_landmark_vertices(const Polyline& c, int k) {
  const std::vector<Point2> samples = sample_landmarks(c, k).points();
  std::vector<Point2> pts;
  std::vector<Point2> marks;
  std::size_t next = 0;
  const auto& v = c.points();
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Samples falling strictly before vertex i along the curve.
    while (next < samples.size() && i > 0) {
      const Point2 a = v[i - 1], b = v[i], q = samples[next];
      const double along = dot(q - a, b - a) / dot(b - a, b - a);
      if (point_segment_distance(q, a, b) > 1e-9 || along >= 1.0) break;
      if (distance(q, a) < 1e-9) {
        marks.push_back(pts.back());
      } else if (distance(q, b) < 1e-9) {
        break;
      } else {
        pts.push_back(q);
        marks.push_back(q);
      }
      ++next;
    }
    pts.push_back(v[i]);
    while (next < samples.size() && distance(samples[next], v[i]) < 1e-9) {
      marks.push_back(v[i]);
      ++next;
    }
  }
  if (marks.size() != samples.size()) throw std::logic_error("landmark insertion lost a sample");
  return {Polyline(std::move(pts), c.closed()), std::move(marks)};
}

using CurveFn = std::function<Point2(double)>;  // t in [0, 1]

inline CurveFn bezier(Point2 a, Point2 ctrl, Point2 b) {
  return [=](double t) {
    const double u = 1.0 - t;
    return Point2{u * u * a.x + 2 * u * t * ctrl.x + t * t * b.x, u * u * a.y + 2 * u * t * ctrl.y + t * t * b.y};
  };
}

// Elliptic arc from a to b bulging by h to the left of a->b (negative h
// bulges right). Trimmed so the ends meet at an angle rather than tangentially.
inline CurveFn ellipse_arc(Point2 a, Point2 b, double h, double trim = 0.35) {
  const Point2 mid = lerp(a, b, 0.5);
  const Vec2 u = (b - a) * 0.5;
  const Vec2 v = normalized(perp(b - a)) * h;
  const double c0 = std::cos(trim), s0 = std::sin(trim);
  return [=](double t) {
    const double phi = trim + (std::numbers::pi - 2.0 * trim) * t;
    const double x = -std::cos(phi) / c0;
    const double y = (std::sin(phi) - s0) / (1.0 - s0);
    return mid + u * x + v * y;
  };
}

// Circular arc through a and b with sagitta h (sign as in ellipse_arc).
inline CurveFn circle_arc(Point2 a, Point2 b, double h) {
  const double half = distance(a, b) / 2.0;
  const double r = (half * half + h * h) / (2.0 * std::abs(h));
  const double half_angle = std::asin(half / r);
  const Point2 mid = lerp(a, b, 0.5);
  const Vec2 n = normalized(perp(b - a)) * (h > 0 ? 1.0 : -1.0);
  const Point2 centre = mid - n * (r - std::abs(h));
  const Vec2 dir = normalized(b - a);
  return [=](double t) {
    const double phi = -half_angle + 2.0 * half_angle * (1.0 - t);
    // phi measured from n towards -dir, so t = 0 lands on a.
    return centre + n * (r * std::cos(phi)) - dir * (r * std::sin(phi));
  };
}

// Adds a ripple along the normal of the base curve, vanishing at both ends.
inline CurveFn with_ripple(CurveFn base, double amplitude, int half_cycles, double phase) {
  if (amplitude == 0.0) return base;
  return [=](double t) {
    const double e = 1e-6;
    const Point2 p0 = base(std::max(0.0, t - e)), p1 = base(std::min(1.0, t + e));
    const Vec2 n = normalized(perp(p1 - p0));
    const double env = std::sin(std::numbers::pi * t);
    return base(t) + n * (amplitude * env * std::sin(std::numbers::pi * half_cycles * t + phase));
  };
}

inline double max_chord_deviation(const CurveFn& f, int segments) {
  double worst = 0.0;
  for (int k = 0; k < segments; ++k) {
    const double t0 = double(k) / segments, t1 = double(k + 1) / segments;
    const Point2 a = f(t0), b = f(t1);
    for (int j = 1; j < 8; ++j) worst = std::max(worst, point_segment_distance(f(t0 + (t1 - t0) * j / 8.0), a, b));
  }
  return worst;
}

// Samples the pieces in order; consecutive pieces share their joint point.
inline std::vector<Point2> discretize(const std::vector<CurveFn>& pieces, double max_chord) {
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& f = pieces[i];
    double approx = 0.0;
    for (int k = 0; k < 64; ++k) approx += distance(f(k / 64.0), f((k + 1) / 64.0));
    int n = std::max(4, static_cast<int>(std::ceil(approx)));
    while (max_chord_deviation(f, n) > max_chord) n *= 2;
    for (int k = i == 0 ? 0 : 1; k <= n; ++k) pts.push_back(f(double(k) / n));
  }
  return pts;
}

}  // namespace detail

/// Builds the scene in a face frame (x right, y down, outer eye corners about
/// 96 px apart at scale 1), then maps it into the image by a random
/// similarity. Eye and mouth corners, the nose tip and the nose bottom centre
/// are taken from the contour vertices they sit on, so they coincide exactly.
inline SceneGT gen_scene(const SceneSpec& spec) {
  spec.validate();
  using detail::CurveFn;
  SplitMix64 rng(spec.seed);
  const auto& J = spec.jitter;
  auto shape = [&](double v) { return v * (1.0 + rng.uniform(-J.shape, J.shape)); };
  auto ripple = [&](CurveFn f, double weight) {
    const double amp = J.detail * weight * rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    double len = 0.0;
    for (int k = 0; k < 64; ++k) len += distance(f(k / 64.0), f((k + 1) / 64.0));
    const int cycles = std::max(1, static_cast<int>(std::lround(2.0 * len / rng.uniform(J.wavelength_min, J.wavelength_max))));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return detail::with_ripple(std::move(f), amp, cycles, phase);
  };

  const double scale = rng.uniform(J.scale_min, J.scale_max);
  const double angle = rng.uniform(-J.rotation, J.rotation) * std::numbers::pi / 180.0;
  const double tx = rng.uniform(-J.translation, J.translation), ty = rng.uniform(-J.translation, J.translation);

  // Face-frame layout. Right eye and right mouth corner are on the image left.
  const double eye_y = -20.0, eye_outer = shape(48.0), eye_inner = shape(17.0);
  const double lid_up = shape(9.0), lid_low = shape(5.0);
  const double brow_y = eye_y - shape(15.0), brow_sag = shape(7.0);
  const double nose_len = shape(36.0), nose_w = shape(15.0);
  const double mouth_y = shape(48.0), mouth_w = shape(26.0), lip_up = shape(12.0), lip_low = shape(11.0);
  const double chin_rx = shape(68.0), chin_ry = shape(88.0);

  struct Raw {
    std::string name;
    std::vector<CurveFn> pieces;
  };
  std::vector<Raw> raw;
  for (int side : {-1, 1}) {
    const std::string s = side < 0 ? "right" : "left";
    const Point2 outer{side * eye_outer, eye_y}, inner{side * eye_inner, eye_y + rng.uniform(-1.0, 1.0)};
    const Point2 b0{side * shape(56.0), brow_y + rng.uniform(-2.0, 2.0)}, b1{side * shape(14.0), brow_y - 3.0};
    // Arcs run outer -> inner; perp(b - a) points down (+y) for the right side.
    const double up = side < 0 ? -1.0 : 1.0;
    raw.push_back({s + "_eyebrow_center_line", {ripple(detail::circle_arc(b0, b1, up * brow_sag), 0.8)}});
    raw.push_back({s + "_eye_upper_lid", {ripple(detail::ellipse_arc(outer, inner, up * lid_up), 0.5)}});
    raw.push_back({s + "_eye_lower_lid", {ripple(detail::ellipse_arc(outer, inner, -up * lid_low), 0.4)}});
  }
  const Point2 nose_top{rng.uniform(-1.0, 1.0), eye_y}, nose_tip{rng.uniform(-2.0, 2.0), eye_y + nose_len};
  raw.push_back({"nose_ridge", {ripple(detail::bezier(nose_top, Point2{shape(3.0), 0.5 * (nose_top.y + nose_tip.y)}, nose_tip), 0.5)}});
  const Point2 nb_center{nose_tip.x, nose_tip.y + shape(8.0)};
  const Point2 nb_r{-nose_w, nose_tip.y + 3.0}, nb_l{nose_w, nose_tip.y + 3.0};
  raw.push_back({"nose_bottom_boundary",
                 {detail::bezier(nb_r, Point2{-0.5 * nose_w, nb_center.y + 4.0}, nb_center),
                  detail::bezier(nb_center, Point2{0.5 * nose_w, nb_center.y + 4.0}, nb_l)}});
  const Point2 mro{-mouth_w, mouth_y}, mlo{mouth_w, mouth_y + rng.uniform(-1.5, 1.5)};
  const Point2 mri{-0.8 * mouth_w, mouth_y + 0.5}, mli{0.8 * mouth_w, mlo.y + 0.5};
  const Point2 bow{rng.uniform(-1.0, 1.0), mouth_y - 0.55 * lip_up};
  raw.push_back({"mouth_upper_lip_outer",
                 {detail::bezier(mro, Point2{-0.45 * mouth_w, mouth_y - 1.15 * lip_up}, bow),
                  detail::bezier(bow, Point2{0.45 * mouth_w, mouth_y - 1.15 * lip_up}, mlo)}});
  raw.push_back({"mouth_lower_lip_outer", {ripple(detail::bezier(mro, Point2{0.0, mouth_y + 2.0 * lip_low}, mlo), 0.6)}});
  raw.push_back({"mouth_upper_lip_inner", {ripple(detail::bezier(mri, Point2{0.0, mouth_y - shape(4.0)}, mli), 0.3)}});
  raw.push_back({"mouth_lower_lip_inner", {ripple(detail::bezier(mri, Point2{0.0, mouth_y + shape(5.0)}, mli), 0.3)}});
  const double chin_cy = -10.0;
  raw.push_back({"chin_boundary", {ripple(
                     [=](double t) {
                       const double phi = std::numbers::pi * (1.0 - t);
                       return Point2{chin_rx * std::cos(phi), chin_cy + chin_ry * std::sin(phi)};
                     },
                     1.5)}});
  const Point2 iris_r{-0.5 * (eye_outer + eye_inner) + rng.uniform(-2.0, 2.0), eye_y - 1.5 + rng.uniform(-1.0, 1.0)};
  const Point2 iris_l{0.5 * (eye_outer + eye_inner) + rng.uniform(-2.0, 2.0), eye_y - 1.5 + rng.uniform(-1.0, 1.0)};

  // Face frame -> image.
  const double ca = std::cos(angle) * scale, sa = std::sin(angle) * scale;
  const Point2 origin{0.5 * spec.image_size.width + tx, 0.5 * spec.image_size.height - 16.0 * scale + ty};
  auto place = [=](Point2 p) { return Point2{origin.x + ca * p.x - sa * p.y, origin.y + sa * p.x + ca * p.y}; };

  Annotation ann;
  ann.image_size = spec.image_size;
  ann.normalization_pair = {"right_eye_outer_corner", "left_eye_outer_corner"};
  std::map<std::string, Polyline> dense;
  std::map<std::string, std::vector<CurveFn>> curves;
  for (auto& r : raw) {
    std::vector<CurveFn> placed;
    for (auto& f : r.pieces) placed.push_back([=](double t) { return place(f(t)); });
    dense.emplace(r.name, Polyline(detail::discretize(placed, 0.2), false));
    curves.emplace(r.name, std::move(placed));
  }
  auto front = [&](const char* n) { return dense.at(n).points().front(); };
  auto back = [&](const char* n) { return dense.at(n).points().back(); };
  const auto& nb = dense.at("nose_bottom_boundary").points();
  const Point2 nb_mid = *std::min_element(nb.begin(), nb.end(), [&](Point2 a, Point2 b) {
    return distance(a, place(nb_center)) < distance(b, place(nb_center));
  });
  const std::map<std::string, Point2> anchors{
      {"right_eye_inner_corner", back("right_eye_upper_lid")},
      {"right_eye_outer_corner", front("right_eye_upper_lid")},
      {"left_eye_inner_corner", back("left_eye_upper_lid")},
      {"left_eye_outer_corner", front("left_eye_upper_lid")},
      {"right_iris_center", place(iris_r)},
      {"left_iris_center", place(iris_l)},
      {"nose_tip", back("nose_ridge")},
      {"nose_bottom_center", nb_mid},
      {"mouth_right_outer_corner", front("mouth_upper_lip_outer")},
      {"mouth_left_outer_corner", back("mouth_upper_lip_outer")},
      {"mouth_right_inner_corner", front("mouth_upper_lip_inner")},
      {"mouth_left_inner_corner", back("mouth_upper_lip_inner")}};

  auto wanted = [&](const std::string& n) {
    return spec.parts.empty() || std::find(spec.parts.begin(), spec.parts.end(), n) != spec.parts.end();
  };
  auto check_margin = [&](const std::string& n, Point2 p) {
    if (p.x < spec.margin || p.y < spec.margin || p.x > spec.image_size.width - 1 - spec.margin ||
        p.y > spec.image_size.height - 1 - spec.margin)
      throw std::runtime_error("'" + n + "' does not fit in the raster with the required margin");
  };
  for (const auto& n : schema::anchor_names()) {
    if (!wanted(n)) continue;
    check_margin(n, anchors.at(n));
    ann.anchors.push_back({n, anchors.at(n)});
    ann.parts[n] = schema::part_of(n);
  }
  for (const auto& n : schema::contour_names()) {
    if (!wanted(n)) continue;
    auto [c, marks] = detail::with_landmark_vertices(dense.at(n), spec.landmarks_per_contour);
    for (auto p : c.points()) check_margin(n, p);
    ann.contours.push_back({n, std::move(c)});
    ann.landmarks.push_back({n, std::move(marks)});
    ann.parts[n] = schema::part_of(n);
  }
  SceneGT out{std::move(ann), {}};
  for (const auto& c : out.annotation.contours) out.curves[c.name] = curves.at(c.name);
  return out;
}

/// Grayscale visualisation: background, a lighter face region, darker
/// anchor dots and contour strokes. Values in [0, 1].
inline Heatmap render_scene(const Annotation& a) {
  Heatmap img(a.image_size.width, a.image_size.height, 0.15f);
  const Sigma stroke(2.0);
  Heatmap ink(a.image_size.width, a.image_size.height, 0.0f);
  for (const auto& c : a.contours) {
    const Heatmap h = synth_contour_heatmap(c.contour, stroke, a.image_size);
    for (std::size_t i = 0; i < h.size(); ++i) ink.data()[i] = std::max(ink.data()[i], h.data()[i]);
  }
  for (const auto& n : a.anchors) {
    const Heatmap h = synth_anchor_heatmap(n.point, Sigma(3.0), a.image_size);
    for (std::size_t i = 0; i < h.size(); ++i) ink.data()[i] = std::max(ink.data()[i], h.data()[i]);
  }
  // Face region: inside the chin arc closed by its chord, when present.
  std::vector<Point2> face;
  for (const auto& c : a.contours)
    if (c.name == "chin_boundary") face = c.contour.points();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      bool inside = false;
      for (std::size_t i = 0, j = face.size() - 1; !face.empty() && i < face.size(); j = i++) {
        const Point2 p = face[i], q = face[j];
        if ((p.y > y) != (q.y > y) && x < (q.x - p.x) * (y - p.y) / (q.y - p.y) + p.x) inside = !inside;
      }
      const float base = inside ? 0.75f : 0.15f;
      img(x, y) = base * (1.0f - 0.8f * ink(x, y));
    }
  return img;
}

}  // namespace acface
