#pragma once

// Heatmaps back to explicit geometry. Anchors come from a local centre of
// mass around the peak; contours from non-maximum suppression of the
// contourness map along its normal field, a parabola fit for sub-pixel
// position, and Canny-style hysteresis linking into ordered traces.

#include <acface/contourness.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace acface {

struct ExtractionParams {
  double sigma = 3.0;
  double high_threshold = 0.0;
  double low_threshold = 0.0;
  int min_trace_length = 3;

  /// Thresholds at 0.5 and 0.25 of the ideal-contour contourness for `sigma`.
  static ExtractionParams defaults(double sigma = 3.0) {
    const double peak = ideal_contourness(Sigma(sigma));
    return {sigma, 0.5 * peak, 0.25 * peak, 3};
  }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("extraction sigma must be positive");
    if (!(low_threshold > 0.0) || low_threshold > high_threshold)
      throw std::invalid_argument("thresholds must satisfy 0 < low <= high");
    if (min_trace_length < 1) throw std::invalid_argument("min_trace_length must be >= 1");
  }
};

struct ContourTrace {
  std::vector<Point2> points;
  std::vector<double> scores;

  std::size_t size() const { return points.size(); }
};

/// A pixel that survived NMS, with its refined location.
struct RidgePoint {
  Point2 point;
  int px = 0;
  int py = 0;
  double score = 0.0;
};

/// Local centre of mass around the peak pixel (first in row-major order on
/// ties), over the disc |p - peak| <= sigma with weights max(0, H).
template <typename T>
Point2 extract_anchor(const Grid<T>& h, Sigma sigma) {
  int bx = -1, by = -1;
  double best = 0.0;
  for (int y = 0; y < h.height(); ++y)
    for (int x = 0; x < h.width(); ++x)
      if (static_cast<double>(h(x, y)) > best) {
        best = static_cast<double>(h(x, y));
        bx = x;
        by = y;
      }
  if (bx < 0) throw std::runtime_error("no anchor present");

  const double s = sigma.value();
  const int r = static_cast<int>(std::floor(s));
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int y = std::max(0, by - r); y <= std::min(h.height() - 1, by + r); ++y)
    for (int x = std::max(0, bx - r); x <= std::min(h.width() - 1, bx + r); ++x) {
      const double dx = x - bx, dy = y - by;
      if (dx * dx + dy * dy > s * s) continue;
      const double w = std::max(0.0, static_cast<double>(h(x, y)));
      sw += w;
      sx += w * x;
      sy += w * y;
    }
  return {sx / sw, sy / sw};
}

/// Keeps valid pixels whose contourness strictly exceeds the bilinear samples
/// one pixel away on both sides along the normal, then shifts each along the
/// normal to the vertex of the parabola through the three samples. The shift
/// is clamped to half a pixel; a non-concave triple keeps the pixel centre.
inline std::vector<RidgePoint> nms_subpixel(const ContournessFields& f, const ExtractionParams& params) {
  (void)params;
  std::vector<RidgePoint> out;
  const int w = f.c.width(), h = f.c.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!f.is_valid(x, y)) continue;
      const double angle = f.n(x, y);
      const Vec2 n{std::cos(angle), std::sin(angle)};
      const Point2 p{double(x), double(y)};
      const Point2 behind = p - n, ahead = p + n;
      if (behind.x < 0 || behind.y < 0 || behind.x > w - 1 || behind.y > h - 1) continue;
      if (ahead.x < 0 || ahead.y < 0 || ahead.x > w - 1 || ahead.y > h - 1) continue;
      const double c0 = f.c(x, y);
      const double cm = bilinear_sample(f.c, behind);
      const double cp = bilinear_sample(f.c, ahead);
      if (!(c0 > cm && c0 > cp)) continue;
      const double curvature = cm - 2.0 * c0 + cp;
      double delta = 0.0;
      if (curvature < 0.0) delta = std::clamp((cm - cp) / (2.0 * curvature), -0.5, 0.5);
      out.push_back({p + delta * n, x, y, c0});
    }
  return out;
}

namespace detail {

struct PixelKey {
  int x, y;
  friend bool operator<(PixelKey a, PixelKey b) { return a.y != b.y ? a.y < b.y : a.x < b.x; }
};

// Orders one connected component into traces. `members` maps pixel -> index
// into `cands`. Pixels are consumed as they are walked.
inline void trace_component(std::vector<PixelKey> pixels, const std::map<PixelKey, std::size_t>& members,
                            const std::vector<RidgePoint>& cands, const ExtractionParams& params,
                            std::vector<ContourTrace>& out) {
  std::map<PixelKey, bool> remaining;
  for (auto p : pixels) remaining[p] = true;

  auto neighbours = [&](PixelKey p) {
    std::vector<PixelKey> nb;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        PixelKey q{p.x + dx, p.y + dy};
        if (remaining.count(q)) nb.push_back(q);
      }
    return nb;  // row-major order by construction
  };

  while (!remaining.empty()) {
    // Start at the first endpoint in row-major order, else the first pixel.
    PixelKey start = remaining.begin()->first;
    for (const auto& [p, _] : remaining)
      if (neighbours(p).size() <= 1) {
        start = p;
        break;
      }

    ContourTrace trace;
    PixelKey cur = start;
    std::optional<Vec2> heading;
    while (true) {
      remaining.erase(cur);
      const RidgePoint& rp = cands[members.at(cur)];
      trace.points.push_back(rp.point);
      trace.scores.push_back(rp.score);

      const auto nb = neighbours(cur);
      if (nb.empty()) break;
      PixelKey next = nb.front();
      if (nb.size() > 1) {
        double best_align = -std::numeric_limits<double>::infinity();
        double best_dist = std::numeric_limits<double>::infinity();
        for (auto q : nb) {
          const Vec2 step{double(q.x - cur.x), double(q.y - cur.y)};
          const double dist = norm(step);
          const double align = heading ? dot(step, *heading) / dist : 0.0;
          if (align > best_align + 1e-12 || (std::abs(align - best_align) <= 1e-12 && dist < best_dist - 1e-12)) {
            best_align = align;
            best_dist = dist;
            next = q;
          }
        }
      }
      heading = normalized(Vec2{double(next.x - cur.x), double(next.y - cur.y)});
      cur = next;
    }
    if (static_cast<int>(trace.size()) >= params.min_trace_length) out.push_back(std::move(trace));
  }
}

}  // namespace detail

/// Two-threshold linking over 8-connected candidate pixels. Candidates below
/// the low threshold are dropped first; a component survives if any member
/// reaches the high threshold. Each survivor is walked into ordered traces
/// starting from an endpoint; at junctions the walk follows the best-aligned
/// neighbour and leftover branches become traces of their own.
inline std::vector<ContourTrace> hysteresis_trace(const std::vector<RidgePoint>& cands, const ExtractionParams& params) {
  std::map<detail::PixelKey, std::size_t> members;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (cands[i].score >= params.low_threshold) members[{cands[i].px, cands[i].py}] = i;

  std::vector<ContourTrace> out;
  std::map<detail::PixelKey, bool> seen;
  for (const auto& [seed, _] : members) {
    if (seen.count(seed)) continue;
    std::vector<detail::PixelKey> comp{seed};
    seen[seed] = true;
    bool strong = false;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const auto p = comp[k];
      strong = strong || cands[members.at(p)].score >= params.high_threshold;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          detail::PixelKey q{p.x + dx, p.y + dy};
          if (members.count(q) && !seen.count(q)) {
            seen[q] = true;
            comp.push_back(q);
          }
        }
    }
    if (!strong) continue;
    std::sort(comp.begin(), comp.end());
    detail::trace_component(std::move(comp), members, cands, params, out);
  }
  return out;
}

inline std::vector<ContourTrace> extract_contour(const Heatmap& h, const ExtractionParams& params) {
  params.validate();
  const auto fields = contourness_map(h, Sigma(params.sigma));
  return hysteresis_trace(nms_subpixel(fields, params), params);
}

/// Traces as polylines, dropping consecutive duplicates; traces that collapse
/// to fewer than two distinct points are skipped.
inline std::vector<Polyline> traces_to_polylines(const std::vector<ContourTrace>& traces) {
  std::vector<Polyline> out;
  for (const auto& t : traces) {
    std::vector<Point2> pts;
    for (auto p : t.points)
      if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
    if (pts.size() >= 2) out.emplace_back(std::move(pts), false);
  }
  return out;
}

}  // namespace acface
