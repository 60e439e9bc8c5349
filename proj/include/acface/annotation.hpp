#pragma once

// Anchors, dense contours and optional sparse landmarks for one image.

#include <acface/evaluation.hpp>
#include <acface/raster.hpp>

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface {

struct NamedContour {
  std::string name;
  Polyline contour;
};

struct Annotation {
  Size2 image_size;
  std::vector<NamedPoint> anchors;
  std::vector<NamedContour> contours;
  std::vector<LandmarkGroup> landmarks;  // sparse samples, keyed by contour name
  std::pair<std::string, std::string> normalization_pair;
  std::map<std::string, std::string> parts;

  const Polyline& contour(const std::string& name) const {
    for (const auto& c : contours)
      if (c.name == name) return c.contour;
    throw std::out_of_range("annotation has no contour '" + name + "'");
  }

  const LandmarkGroup& landmark_group(const std::string& name) const {
    for (const auto& g : landmarks)
      if (g.name == name) return g;
    throw std::out_of_range("annotation has no landmarks for '" + name + "'");
  }

  void validate() const {
    if (image_size.width < 1 || image_size.height < 1) throw std::invalid_argument("image size must be positive");
    std::set<std::string> names;
    for (const auto& a : anchors) {
      if (!names.insert(a.name).second) throw std::invalid_argument("duplicate name '" + a.name + "'");
      if (!is_finite(a.point)) throw std::invalid_argument("anchor '" + a.name + "' is not finite");
    }
    for (const auto& c : contours)
      if (!names.insert(c.name).second) throw std::invalid_argument("duplicate name '" + c.name + "'");
    std::set<std::string> seen;
    for (const auto& g : landmarks) {
      if (!seen.insert(g.name).second) throw std::invalid_argument("duplicate landmark group '" + g.name + "'");
      const Polyline& c = contour(g.name);
      for (auto p : g.points)
        if (!is_finite(p) || point_polyline_distance(p, c) > 1e-6)
          throw std::invalid_argument("landmark of '" + g.name + "' is off its contour");
    }
  }
};

/// Dense ground truth for evaluation: the anchors, plus points every
/// `spacing` px of arc length along each contour (both ends included on open
/// contours), independent of how the contour happens to be discretised.
inline GroundTruthLandmarks to_ground_truth(const Annotation& a, double spacing = 1.0) {
  GroundTruthLandmarks gt;
  gt.anchors = a.anchors;
  for (const auto& c : a.contours) {
    std::vector<Point2> pts;
    for (const auto& s : resample_polyline(c.contour, spacing)) pts.push_back(s.point);
    gt.contours.push_back({c.name, std::move(pts)});
  }
  gt.parts = a.parts;
  gt.normalization_pair = a.normalization_pair;
  return gt;
}

/// The annotation's own geometry as a prediction (self-evaluation).
inline Prediction to_prediction(const Annotation& a) {
  Prediction p;
  for (const auto& n : a.anchors) p.anchors[n.name] = n.point;
  for (const auto& c : a.contours) p.contours[c.name] = {c.contour};
  return p;
}

/// Synthesises one channel per anchor, then one per contour, in annotation order.
inline HeatmapStack synthesize(const Annotation& a, Sigma sigma) {
  HeatmapStack s;
  for (const auto& n : a.anchors) s.add(n.name, synth_anchor_heatmap(n.point, sigma, a.image_size));
  for (const auto& c : a.contours) s.add(c.name, synth_contour_heatmap(c.contour, sigma, a.image_size));
  return s;
}

}  // namespace acface
