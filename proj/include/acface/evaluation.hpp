#pragma once

// NME over anchors and contours. Anchor landmarks are scored point to point;
// contour landmarks by their distance to the predicted contour of the same
// name. Errors are normalised by the distance between two named anchors
// (the outer eye corners in the face schema) and reported in percent.

#include <acface/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface {

struct NamedPoint {
  std::string name;
  Point2 point;
};

struct LandmarkGroup {
  std::string name;
  std::vector<Point2> points;
};

struct GroundTruthLandmarks {
  std::vector<NamedPoint> anchors;
  std::vector<LandmarkGroup> contours;     // one group per GT contour
  std::map<std::string, std::string> parts;  // anchor/contour name -> face part
  std::pair<std::string, std::string> normalization_pair;

  Point2 anchor(const std::string& name) const {
    for (const auto& a : anchors)
      if (a.name == name) return a.point;
    throw std::out_of_range("ground truth has no anchor '" + name + "'");
  }

  double normalization() const {
    const double d = distance(anchor(normalization_pair.first), anchor(normalization_pair.second));
    if (!(d > 0.0)) throw std::invalid_argument("normalization distance is zero");
    return d;
  }

  std::string part_of(const std::string& name) const {
    auto it = parts.find(name);
    return it == parts.end() ? std::string("other") : it->second;
  }
};

struct Prediction {
  std::map<std::string, Point2> anchors;
  std::map<std::string, std::vector<Polyline>> contours;
};

enum class LandmarkRole { anchor, contour };

/// Point-to-point for anchors, point-to-contour for contour landmarks;
/// nullopt when the prediction has no counterpart.
inline std::optional<double> landmark_error(Point2 l, LandmarkRole role, const std::string& name, const Prediction& pred) {
  if (role == LandmarkRole::anchor) {
    auto it = pred.anchors.find(name);
    if (it == pred.anchors.end()) return std::nullopt;
    return distance(l, it->second);
  }
  auto it = pred.contours.find(name);
  if (it == pred.contours.end() || it->second.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : it->second) best = std::min(best, point_polyline_distance(l, c));
  return best;
}

struct EvalOptions {
  double cutoff = 6.0;              // percent
  std::set<std::string> exclude;    // anchor/contour names or part tags to skip
};

struct LandmarkError {
  std::string owner;
  std::string part;
  Point2 landmark;
  double error = 0.0;  // pixels
  bool missing = false;
};

struct FaceReport {
  std::vector<LandmarkError> errors;
  double normalization = 0.0;
  double nme = 0.0;                        // percent
  std::map<std::string, double> nme_per_part;
  std::vector<std::string> missing;        // owners without a predicted counterpart
};

/// Landmarks without a predicted counterpart are charged the cutoff error
/// (cutoff * d / 100 pixels) and listed under `missing`.
inline FaceReport nme_ac(const GroundTruthLandmarks& gt, const Prediction& pred, const EvalOptions& opt = {}) {
  if (!(opt.cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
  FaceReport r;
  r.normalization = gt.normalization();
  const double penalty = opt.cutoff * r.normalization / 100.0;

  auto excluded = [&](const std::string& owner, const std::string& part) {
    return opt.exclude.count(owner) > 0 || opt.exclude.count(part) > 0;
  };
  auto record = [&](const std::string& owner, Point2 l, LandmarkRole role) {
    const std::string part = gt.part_of(owner);
    if (excluded(owner, part)) return;
    const auto e = landmark_error(l, role, owner, pred);
    if (!e && (r.missing.empty() || r.missing.back() != owner)) r.missing.push_back(owner);
    r.errors.push_back({owner, part, l, e.value_or(penalty), !e.has_value()});
  };
  for (const auto& a : gt.anchors) record(a.name, a.point, LandmarkRole::anchor);
  for (const auto& g : gt.contours)
    for (auto p : g.points) record(g.name, p, LandmarkRole::contour);
  if (r.errors.empty()) throw std::invalid_argument("no landmarks left to evaluate");

  std::map<std::string, std::pair<double, std::size_t>> per_part;
  double total = 0.0;
  for (const auto& e : r.errors) {
    total += e.error;
    auto& acc = per_part[e.part];
    acc.first += e.error;
    ++acc.second;
  }
  r.nme = 100.0 / r.normalization * total / static_cast<double>(r.errors.size());
  for (const auto& [part, acc] : per_part)
    r.nme_per_part[part] = 100.0 / r.normalization * acc.first / static_cast<double>(acc.second);
  return r;
}

struct CedPoint {
  double nme = 0.0;
  double fraction = 0.0;
};

struct CedAuc {
  std::vector<CedPoint> ced;
  double auc = 0.0;  // percent
};

/// Empirical CDF of per-face NME and its area over [0, cutoff], normalised
/// by the cutoff. The CDF is a step function, so the area is exact:
/// sum_i max(0, cutoff - e_i) / (n * cutoff).
inline CedAuc ced_auc(std::vector<double> nmes, double cutoff) {
  if (nmes.empty()) throw std::invalid_argument("CED of an empty error list");
  if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
  std::sort(nmes.begin(), nmes.end());
  CedAuc out;
  const double n = static_cast<double>(nmes.size());
  double area = 0.0;
  for (std::size_t i = 0; i < nmes.size(); ++i) {
    out.ced.push_back({nmes[i], static_cast<double>(i + 1) / n});
    area += std::max(0.0, cutoff - nmes[i]);
  }
  out.auc = 100.0 * area / (n * cutoff);
  return out;
}

struct EvalReport {
  std::vector<FaceReport> faces;
  std::vector<double> face_nme;
  double nme_overall = 0.0;
  std::map<std::string, double> nme_per_part;  // mean over faces that have the part
  CedAuc curve;
  double cutoff = 6.0;
};

inline EvalReport evaluate(const std::vector<GroundTruthLandmarks>& gts, const std::vector<Prediction>& preds,
                           const EvalOptions& opt = {}) {
  if (gts.size() != preds.size()) throw std::invalid_argument("ground truth / prediction count mismatch");
  if (gts.empty()) throw std::invalid_argument("nothing to evaluate");
  EvalReport rep;
  rep.cutoff = opt.cutoff;
  std::map<std::string, std::pair<double, std::size_t>> parts;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    rep.faces.push_back(nme_ac(gts[i], preds[i], opt));
    rep.face_nme.push_back(rep.faces.back().nme);
    for (const auto& [part, v] : rep.faces.back().nme_per_part) {
      parts[part].first += v;
      ++parts[part].second;
    }
  }
  double sum = 0.0;
  for (double v : rep.face_nme) sum += v;
  rep.nme_overall = sum / static_cast<double>(rep.face_nme.size());
  for (const auto& [part, acc] : parts) rep.nme_per_part[part] = acc.first / static_cast<double>(acc.second);
  rep.curve = ced_auc(rep.face_nme, opt.cutoff);
  return rep;
}

}  // namespace acface
