#pragma once

// Sub-pixel 2D primitives used by every other module: points, segments,
// polylines, point-to-contour distances, normals, arc-length resampling and
// the two constructions that turn sparse landmarks into contours (straight
// line-contours and C1 quadratic splines).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

// Points double as 2-vectors for directions and normals.
using Vec2 = Point2;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Left-hand perpendicular: rotates v by +90 degrees in (x, y).
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
  return {v.x / n, v.y / n};
}

inline Point2 lerp(Point2 a, Point2 b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

class Segment {
 public:
  Segment(Point2 a, Point2 b) : a_(a), b_(b) {
    if (!is_finite(a) || !is_finite(b)) throw std::invalid_argument("segment endpoints must be finite");
    if (a == b) throw std::invalid_argument("zero-length segment");
  }

  Point2 a() const { return a_; }
  Point2 b() const { return b_; }
  double length() const { return distance(a_, b_); }
  Vec2 direction() const { return normalized(b_ - a_); }

 private:
  Point2 a_;
  Point2 b_;
};

// Unchecked kernel shared by Segment and Polyline so the hot loops in heatmap
// synthesis do not re-validate endpoints.
inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Vec2 ab = b - a;
  const Vec2 ap = p - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(ap, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

inline double point_segment_distance(Point2 p, const Segment& s) { return point_segment_distance(p, s.a(), s.b()); }

namespace detail {

inline void validate_chain(std::span<const Point2> pts, bool closed, const char* what) {
  if (pts.size() < 2) throw std::invalid_argument(std::string(what) + " needs at least 2 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!is_finite(pts[i])) throw std::invalid_argument(std::string(what) + " has a non-finite point");
    if (i + 1 < pts.size() && pts[i] == pts[i + 1])
      throw std::invalid_argument(std::string(what) + " has repeated consecutive points at index " + std::to_string(i));
  }
  if (closed && pts.front() == pts.back())
    throw std::invalid_argument(std::string(what) + " is closed but stores a duplicated endpoint");
}

}  // namespace detail

/// Ordered sub-pixel contour. A closed polyline connects its last point back
/// to the first implicitly; the closing point is never stored twice.
class Polyline {
 public:
  Polyline() = default;

  Polyline(std::vector<Point2> points, bool closed) : points_(std::move(points)), closed_(closed) {
    detail::validate_chain(points_, closed_, "polyline");
    cumulative_.resize(segment_count() + 1, 0.0);
    for (std::size_t i = 0; i < segment_count(); ++i)
      cumulative_[i + 1] = cumulative_[i] + distance(segment_start(i), segment_end(i));
  }

  const std::vector<Point2>& points() const { return points_; }
  bool closed() const { return closed_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  std::size_t segment_count() const {
    if (points_.size() < 2) return 0;
    return closed_ ? points_.size() : points_.size() - 1;
  }
  Point2 segment_start(std::size_t i) const { return points_[i]; }
  Point2 segment_end(std::size_t i) const { return points_[(i + 1) % points_.size()]; }
  Segment segment(std::size_t i) const { return {segment_start(i), segment_end(i)}; }

  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  // Arc length at the start of segment i (i == segment_count() gives the total).
  double arclength_at_vertex(std::size_t i) const { return cumulative_[i]; }

  // Index of the segment that contains arclength s (the last segment owns the end).
  std::size_t segment_at(double s) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t idx = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    return std::min(idx, segment_count() - 1);
  }

 private:
  std::vector<Point2> points_;
  bool closed_ = false;
  std::vector<double> cumulative_;
};

/// Sparse contour landmarks in contour order.
class LandmarkChain {
 public:
  LandmarkChain(std::vector<Point2> points, bool closed) : points_(std::move(points)), closed_(closed) {
    detail::validate_chain(points_, closed_, "landmark chain");
  }

  const std::vector<Point2>& points() const { return points_; }
  bool closed() const { return closed_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Point2> points_;
  bool closed_;
};

inline double point_polyline_distance(Point2 p, const Polyline& c) {
  if (c.segment_count() == 0) throw std::invalid_argument("distance to an empty polyline");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.segment_count(); ++i)
    best = std::min(best, point_segment_distance(p, c.segment_start(i), c.segment_end(i)));
  return best;
}

inline Point2 point_at_arclength(const Polyline& c, double s) {
  if (c.segment_count() == 0) throw std::invalid_argument("empty polyline");
  const double total = c.length();
  if (s < 0.0 || s > total) throw std::out_of_range("arclength outside [0, length]");
  const std::size_t i = c.segment_at(s);
  const double s0 = c.arclength_at_vertex(i);
  const double len = c.arclength_at_vertex(i + 1) - s0;
  return lerp(c.segment_start(i), c.segment_end(i), std::clamp((s - s0) / len, 0.0, 1.0));
}

/// Unit normal at arclength s. Normals are the +90 degree rotation of the local
/// tangent; at a vertex the tangent is the bisector of the two adjacent
/// segment directions.
inline Vec2 polyline_normal_at(const Polyline& c, double s) {
  if (c.segment_count() == 0) throw std::invalid_argument("empty polyline");
  const double total = c.length();
  if (s < 0.0 || s > total) throw std::out_of_range("arclength outside [0, length]");

  const double tol = 1e-9 * std::max(1.0, total);
  const std::size_t nseg = c.segment_count();
  auto dir = [&](std::size_t i) { return normalized(c.segment_end(i) - c.segment_start(i)); };

  // Locate a vertex within tolerance, if any.
  std::size_t i = c.segment_at(s);
  std::size_t vertex = nseg + 1;  // sentinel: none
  if (std::abs(s - c.arclength_at_vertex(i)) <= tol) vertex = i;
  else if (std::abs(s - c.arclength_at_vertex(i + 1)) <= tol) vertex = i + 1;

  if (vertex <= nseg) {
    std::size_t in_seg = 0, out_seg = 0;
    bool interior = false;
    if (c.closed()) {
      out_seg = vertex % nseg;
      in_seg = (vertex + nseg - 1) % nseg;
      interior = true;
    } else if (vertex > 0 && vertex < nseg) {
      in_seg = vertex - 1;
      out_seg = vertex;
      interior = true;
    }
    if (interior) {
      const Vec2 sum = dir(in_seg) + dir(out_seg);
      if (norm(sum) > 1e-12) return perp(normalized(sum));
      return perp(dir(out_seg));
    }
  }
  return perp(dir(i));
}

struct OrientedSample {
  Point2 point;
  Vec2 normal;
  double arclength = 0.0;
};

/// Samples at uniform arc-length steps. Open polylines also get their end
/// point when the last step falls short of it.
inline std::vector<OrientedSample> resample_polyline(const Polyline& c, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("resample spacing must be positive");
  if (c.segment_count() == 0) throw std::invalid_argument("empty polyline");
  const double total = c.length();
  const double tol = 1e-9 * std::max(1.0, total);

  std::vector<OrientedSample> out;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (c.closed() ? s >= total - tol : s > total + tol) break;
    const double sc = std::min(s, total);
    out.push_back({point_at_arclength(c, sc), polyline_normal_at(c, sc), sc});
  }
  if (!c.closed() && total - out.back().arclength > tol)
    out.push_back({point_at_arclength(c, total), polyline_normal_at(c, total), total});
  return out;
}

inline Polyline line_contour(const LandmarkChain& l) { return Polyline(l.points(), l.closed()); }

namespace detail {

// One span of a C1 quadratic spline in chord-length parameter u in [0, h]:
// q(u) = start + velocity * u + accel * u^2.
struct QuadraticSpan {
  Point2 start;
  Vec2 velocity;
  Vec2 accel;
  double h = 0.0;

  Point2 eval(double u) const { return start + u * velocity + (u * u) * accel; }
};

inline std::vector<QuadraticSpan> quadratic_spans(const LandmarkChain& l) {
  const auto& p = l.points();
  const std::size_t m = p.size();
  const std::size_t n = l.closed() ? m : m - 1;

  std::vector<double> h(n);
  std::vector<Vec2> chord(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = p[(i + 1) % m] - p[i];
    h[i] = norm(d);
    chord[i] = (1.0 / h[i]) * d;
  }

  // C1 continuity gives v[i+1] = 2 chord[i] - v[i], so v[i] = (-1)^i v0 + offset[i].
  std::vector<Vec2> offset(n + 1);
  offset[0] = {0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = 2.0 * chord[i] - offset[i];
  auto sign = [](std::size_t i) { return (i % 2 == 0) ? 1.0 : -1.0; };

  Vec2 v0{0.0, 0.0};
  if (l.closed() && n % 2 == 1) {
    // Periodic closure v[n] = v[0] has the unique solution v0 = offset[n] / 2.
    v0 = 0.5 * offset[n];
  } else {
    // Free start velocity: minimise the bending energy sum 4|accel_i|^2 h_i,
    // with accel_i = (chord_i - v_i) / h_i. For even closed chains the
    // closure residual does not depend on v0, so the same minimiser applies.
    Vec2 num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num = num + (sign(i) / h[i]) * (chord[i] - offset[i]);
      den += 1.0 / h[i];
    }
    v0 = (1.0 / den) * num;
  }

  std::vector<QuadraticSpan> spans(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 v = sign(i) * v0 + offset[i];
    spans[i] = {p[i], v, (1.0 / h[i]) * (chord[i] - v), h[i]};
  }
  return spans;
}

}  // namespace detail

/// C1 quadratic spline through every landmark (chord-length parameterised),
/// densified to a polyline with `samples_per_span` pieces per landmark span.
/// Landmarks are emitted verbatim as polyline vertices.
inline Polyline spline_contour(const LandmarkChain& l, int samples_per_span = 16) {
  if (l.size() < 3) throw std::invalid_argument("spline contour needs at least 3 landmarks");
  if (samples_per_span < 1) throw std::invalid_argument("samples_per_span must be >= 1");

  const auto spans = detail::quadratic_spans(l);
  std::vector<Point2> out;
  out.reserve(spans.size() * static_cast<std::size_t>(samples_per_span) + 1);
  auto push = [&](Point2 q) {
    if (out.empty() || !(out.back() == q)) out.push_back(q);
  };
  for (const auto& span : spans) {
    push(span.start);
    for (int j = 1; j < samples_per_span; ++j) push(span.eval(span.h * j / samples_per_span));
  }
  if (!l.closed()) push(l.points().back());
  if (l.closed() && out.size() > 1 && out.back() == out.front()) out.pop_back();
  return Polyline(std::move(out), l.closed());
}

}  // namespace acface
