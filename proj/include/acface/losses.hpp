#pragma once

// Heatmap loss functionals and their analytic gradients.
//
// Fully supervised: weighted RMS against a ground-truth stack, with weights
// that emphasise positives and hard negatives.
// Weakly supervised (contour channels with sparse landmarks only):
//   far      - heat far from the line-contour should vanish,
//   landmark - a ridge should pass through every landmark,
//   line     - a ridge should exist within D pixels along the line-contour normal.
// The last two map contourness to [0, 1] with f(C) = 1 - 2^((C - c_max)/scale).
//
// Every evaluator takes a Grid<T> so the finite-difference checks can run in
// double precision; gradients are always Grid<double> with respect to pred.

#include <acface/contourness.hpp>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace acface {

/// f(C) = clamp(1 - 2^((C - c_max)/scale), 0, 1)
struct ContournessMapping {
  double c_max = 0.0;
  double scale = 1.5;

  static ContournessMapping for_sigma(Sigma sigma, double scale = 1.5) { return {ideal_contourness(sigma), scale}; }

  double operator()(double c) const { return std::clamp(1.0 - std::exp2((c - c_max) / scale), 0.0, 1.0); }
  double derivative(double c) const {
    if (c >= c_max) return 0.0;
    return -std::numbers::ln2 / scale * std::exp2((c - c_max) / scale);
  }
};

inline double map_f(double c, const ContournessMapping& f) { return f(c); }

struct LossWeights {
  double alpha = 10.0;
  double lambda_landmark = 0.1;
  double lambda_line = 0.1;
  int d_radius = 6;
  ContournessMapping f;

  static LossWeights defaults(Sigma sigma) { return {10.0, 0.1, 0.1, 6, ContournessMapping::for_sigma(sigma)}; }

  void validate() const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (d_radius < 1) throw std::invalid_argument("D must be >= 1");
    if (!(f.scale > 0.0)) throw std::invalid_argument("mapping scale must be positive");
  }
};

/// Sparse landmarks for one contour plus the line-contour through them.
struct WeakSupervision {
  std::vector<Point2> landmarks;
  Polyline line_contour;
  std::vector<Point2> anchors;

  static WeakSupervision from_landmarks(const LandmarkChain& chain, std::vector<Point2> anchors = {}) {
    WeakSupervision s{chain.points(), line_contour_of(chain), std::move(anchors)};
    s.validate();
    return s;
  }

  void validate() const {
    if (landmarks.empty()) throw std::invalid_argument("weak supervision needs landmarks");
    for (auto l : landmarks)
      if (point_polyline_distance(l, line_contour) > 1e-6)
        throw std::invalid_argument("landmark does not lie on the line-contour");
  }

 private:
  static Polyline line_contour_of(const LandmarkChain& chain) { return Polyline(chain.points(), chain.closed()); }
};

struct LossValue {
  double value = 0.0;
  Grid<double> grad;  // empty unless requested
};

// W = 1 + (alpha - 1) * max(H, |H - pred|)
inline double hard_example_weight(double gt, double pred, double alpha) {
  return 1.0 + (alpha - 1.0) * std::max(gt, std::abs(gt - pred));
}

template <typename T, typename U>
Heatmap weight_map(const Grid<T>& gt, const Grid<U>& pred, double alpha) {
  if (!gt.same_shape(pred)) throw std::invalid_argument("weight map: heatmap sizes differ");
  Heatmap w(gt.width(), gt.height());
  for (std::size_t i = 0; i < gt.size(); ++i)
    w.data()[i] = static_cast<float>(hard_example_weight(gt.data()[i], pred.data()[i], alpha));
  return w;
}

namespace detail {

inline double safe_root_derivative(double s) { return 0.5 / std::sqrt(std::max(s, 1e-12)); }

}  // namespace detail

/// (1/|H|) sqrt(sum W (H - pred)^2) over all pixels of all channels. With
/// `grads`, one gradient per pred channel is written.
template <typename T, typename U>
double full_loss_channels(std::span<const Grid<T>> gt, std::span<const Grid<U>> pred, double alpha,
                          std::vector<Grid<double>>* grads = nullptr) {
  if (gt.size() != pred.size()) throw std::invalid_argument("full loss: channel count mismatch");
  if (gt.empty()) throw std::invalid_argument("full loss: no channels");
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt[k].same_shape(pred[k])) throw std::invalid_argument("full loss: heatmap sizes differ");
    for (std::size_t i = 0; i < gt[k].size(); ++i) {
      const double h = gt[k].data()[i], p = pred[k].data()[i], e = h - p;
      sum += hard_example_weight(h, p, alpha) * e * e;
    }
    count += gt[k].size();
  }
  const double n = static_cast<double>(count);
  if (grads) {
    const double outer = detail::safe_root_derivative(sum) / n;
    grads->clear();
    for (std::size_t k = 0; k < gt.size(); ++k) {
      Grid<double> g(gt[k].width(), gt[k].height(), 0.0);
      for (std::size_t i = 0; i < gt[k].size(); ++i) {
        const double h = gt[k].data()[i], p = pred[k].data()[i], e = h - p;
        const double w = hard_example_weight(h, p, alpha);
        // On |e| == H the H branch wins, so W is locally constant.
        const double dw = std::abs(e) > h ? (alpha - 1.0) * (e > 0 ? -1.0 : 1.0) : 0.0;
        g.data()[i] = outer * (dw * e * e - 2.0 * w * e);
      }
      grads->push_back(std::move(g));
    }
  }
  return std::sqrt(sum) / n;
}

inline double full_loss(const HeatmapStack& gt, const HeatmapStack& pred, double alpha) {
  if (gt.names() != pred.names()) throw std::invalid_argument("full loss: stacks have different channels");
  return full_loss_channels<float, float>(gt.channels(), pred.channels(), alpha);
}

/// 1 where the pixel is more than D from the line-contour.
inline Heatmap far_mask(const Polyline& line_contour, double d_radius, Size2 size) {
  Heatmap m(size.width, size.height, 0.0f);
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x)
      m(x, y) = point_polyline_distance({double(x), double(y)}, line_contour) > d_radius ? 1.0f : 0.0f;
  return m;
}

/// (1/|H|) sqrt(sum M W(0, pred) pred^2): the full loss against an all-zero
/// target, restricted to the far mask.
template <typename T>
LossValue weak_far_loss(const Grid<T>& pred, const Polyline& line_contour, double d_radius, double alpha,
                        bool want_grad = false) {
  const Heatmap mask = far_mask(line_contour, d_radius, {pred.width(), pred.height()});
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask.data()[i] == 0.0f) continue;
    const double p = pred.data()[i];
    sum += hard_example_weight(0.0, p, alpha) * p * p;
  }
  const double n = static_cast<double>(pred.size());
  LossValue out{std::sqrt(sum) / n, {}};
  if (want_grad) {
    const double outer = detail::safe_root_derivative(sum) / n;
    out.grad = Grid<double>(pred.width(), pred.height(), 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (mask.data()[i] == 0.0f) continue;
      const double p = pred.data()[i];
      const double dw = p != 0.0 ? (alpha - 1.0) * (p > 0 ? 1.0 : -1.0) : 0.0;
      out.grad.data()[i] = outer * (dw * p * p + 2.0 * hard_example_weight(0.0, p, alpha) * p);
    }
  }
  return out;
}

namespace detail {

// Contourness of one prediction with everything the backward pass needs.
template <typename T>
struct ContournessCache {
  const Grid<T>* pred;
  FilterBank bank;
  Responses resp;
  ContournessMaps maps;

  ContournessCache(const Grid<T>& p, Sigma sigma)
      : pred(&p), bank(build_filter_bank(sigma)), resp(responses(p, bank)), maps(contourness_from_responses(resp, bank.radius)) {}

  // All four bilinear taps of q lie on valid pixels.
  bool probe_valid(Point2 q) const {
    const double lo = bank.radius, hx = pred->width() - 1 - bank.radius, hy = pred->height() - 1 - bank.radius;
    return is_finite(q) && q.x >= lo && q.y >= lo && q.x <= hx && q.y <= hy;
  }

  double sample(Point2 q) const { return bilinear_sample(maps.c, q); }

  void scatter(Grid<double>& upstream, Point2 q, double weight) const {
    for (const auto& tap : bilinear_taps(pred->width(), pred->height(), q)) upstream(tap.x, tap.y) += weight * tap.weight;
  }

  Grid<double> backward(const Grid<double>& upstream) const { return contourness_backward(*pred, resp, bank, upstream); }
};

}  // namespace detail

/// Mean of f over the contourness sampled at every landmark.
template <typename T>
LossValue weak_landmark_loss(const Grid<T>& pred, const WeakSupervision& sup, Sigma sigma,
                             const ContournessMapping& f, bool want_grad = false) {
  if (sup.landmarks.empty()) throw std::invalid_argument("weak landmark loss: no landmarks");
  const detail::ContournessCache<T> cache(pred, sigma);
  Grid<double> upstream(pred.width(), pred.height(), 0.0);
  const double inv = 1.0 / static_cast<double>(sup.landmarks.size());
  double total = 0.0;
  for (auto l : sup.landmarks) {
    if (!cache.probe_valid(l)) throw std::out_of_range("landmark lies in the invalid border zone");
    const double c = cache.sample(l);
    total += f(c);
    if (want_grad) cache.scatter(upstream, l, inv * f.derivative(c));
  }
  LossValue out{total * inv, {}};
  if (want_grad) out.grad = cache.backward(upstream);
  return out;
}

/// For each unit-spaced sample p on the line-contour, the best contourness over
/// p + d N(p), d in {-D..D}; the loss is the mean of f over samples. Probes
/// whose bilinear taps leave the valid region are skipped.
template <typename T>
LossValue weak_line_loss(const Grid<T>& pred, const WeakSupervision& sup, Sigma sigma, const LossWeights& weights,
                         bool want_grad = false) {
  const detail::ContournessCache<T> cache(pred, sigma);
  const auto samples = resample_polyline(sup.line_contour, 1.0);
  Grid<double> upstream(pred.width(), pred.height(), 0.0);
  const double inv = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;
  for (const auto& s : samples) {
    bool any = false;
    double best = 0.0;
    Point2 best_q{};
    for (int d = -weights.d_radius; d <= weights.d_radius; ++d) {
      const Point2 q = s.point + double(d) * s.normal;
      if (!cache.probe_valid(q)) continue;
      const double c = cache.sample(q);
      if (!any || c > best) {
        best = c;
        best_q = q;
        any = true;
      }
    }
    if (!any) throw std::out_of_range("every normal probe of a line-contour sample is outside the valid region");
    total += weights.f(best);
    if (want_grad) cache.scatter(upstream, best_q, inv * weights.f.derivative(best));
  }
  LossValue out{total * inv, {}};
  if (want_grad) out.grad = cache.backward(upstream);
  return out;
}

struct WeakLossBreakdown {
  double total = 0.0;
  double landmark = 0.0;
  double line = 0.0;
  double far = 0.0;
  Grid<double> grad;  // of total; empty unless requested
};

/// far + lambda_landmark * landmark + lambda_line * line
template <typename T>
WeakLossBreakdown weak_loss(const Grid<T>& pred, const WeakSupervision& sup, Sigma sigma, const LossWeights& weights,
                            bool want_grad = false) {
  weights.validate();
  const auto far = weak_far_loss(pred, sup.line_contour, weights.d_radius, weights.alpha, want_grad);
  const auto lm = weak_landmark_loss(pred, sup, sigma, weights.f, want_grad);
  const auto line = weak_line_loss(pred, sup, sigma, weights, want_grad);
  WeakLossBreakdown out;
  out.far = far.value;
  out.landmark = lm.value;
  out.line = line.value;
  out.total = far.value + weights.lambda_landmark * lm.value + weights.lambda_line * line.value;
  if (want_grad) {
    out.grad = far.grad;
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      out.grad.data()[i] += weights.lambda_landmark * lm.grad.data()[i] + weights.lambda_line * line.grad.data()[i];
  }
  return out;
}

enum class LossKind { full, far, landmark, line, weak_total };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::full: return "full";
    case LossKind::far: return "far";
    case LossKind::landmark: return "landmark";
    case LossKind::line: return "line";
    case LossKind::weak_total: return "weak_total";
  }
  return "?";
}

/// Everything needed to evaluate any loss kind on a single prediction channel.
struct LossProblem {
  Grid<double> gt;  // used by LossKind::full
  WeakSupervision supervision;
  double sigma = 2.0;
  LossWeights weights;
};

template <typename T>
LossValue evaluate_loss(LossKind kind, const Grid<T>& pred, const LossProblem& prob, bool want_grad) {
  const Sigma sigma(prob.sigma);
  switch (kind) {
    case LossKind::full: {
      std::vector<Grid<double>> grads;
      const double v = full_loss_channels<double, T>(std::span(&prob.gt, 1), std::span(&pred, 1), prob.weights.alpha,
                                                     want_grad ? &grads : nullptr);
      return {v, want_grad ? std::move(grads.front()) : Grid<double>{}};
    }
    case LossKind::far:
      return weak_far_loss(pred, prob.supervision.line_contour, prob.weights.d_radius, prob.weights.alpha, want_grad);
    case LossKind::landmark: return weak_landmark_loss(pred, prob.supervision, sigma, prob.weights.f, want_grad);
    case LossKind::line: return weak_line_loss(pred, prob.supervision, sigma, prob.weights, want_grad);
    case LossKind::weak_total: {
      auto b = weak_loss(pred, prob.supervision, sigma, prob.weights, want_grad);
      return {b.total, std::move(b.grad)};
    }
  }
  throw std::invalid_argument("unknown loss kind");
}

inline Grid<double> loss_gradient(LossKind kind, const Grid<double>& pred, const LossProblem& prob) {
  return evaluate_loss(kind, pred, prob, true).grad;
}

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t pixels_checked = 0;
  bool passed = true;
};

/// Central finite differences against the analytic gradient at `pixels`
/// (all pixels when empty). Pixels with |analytic| <= min_grad are skipped.
inline GradientCheck check_gradient(LossKind kind, const Grid<double>& pred, const LossProblem& prob, double step = 1e-3,
                                    double tolerance = 1e-3, double min_grad = 1e-6,
                                    std::span<const std::size_t> pixels = {}) {
  const Grid<double> analytic = loss_gradient(kind, pred, prob);
  std::vector<std::size_t> all;
  if (pixels.empty()) {
    all.resize(pred.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    pixels = all;
  }
  GradientCheck res;
  Grid<double> work = pred;
  for (std::size_t i : pixels) {
    const double a = analytic.data()[i];
    if (std::abs(a) <= min_grad) continue;
    const double orig = work.data()[i];
    work.data()[i] = orig + step;
    const double up = evaluate_loss(kind, work, prob, false).value;
    work.data()[i] = orig - step;
    const double down = evaluate_loss(kind, work, prob, false).value;
    work.data()[i] = orig;
    const double fd = (up - down) / (2.0 * step);
    const double rel = std::abs(a - fd) / std::max(std::abs(a), std::abs(fd));
    res.max_relative_error = std::max(res.max_relative_error, rel);
    ++res.pixels_checked;
  }
  res.passed = res.max_relative_error < tolerance;
  return res;
}

}  // namespace acface
