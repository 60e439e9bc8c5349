#pragma once

// Dense scalar rasters and heatmap synthesis from anchors and contours.
//
// Pixel model: the sample stored at integer (x, y) is the value at the point
// (x, y) itself, with no half-pixel offset. Storage is row-major.

#include <acface/geometry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface {

template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw std::invalid_argument("raster dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Grid(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) throw std::invalid_argument("raster dimensions must be >= 1");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw std::invalid_argument("raster data length does not match width*height");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const auto& other) const { return width_ == other.width() && height_ == other.height(); }

  template <typename U>
  Grid<U> cast() const {
    Grid<U> out(width_, height_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Heatmap = Grid<float>;

struct Size2 {
  int width = 0;
  int height = 0;
  friend bool operator==(Size2, Size2) = default;
};

/// Heatmap width parameter: the quadratic falloff reaches zero at sigma/sqrt(2).
class Sigma {
 public:
  explicit Sigma(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("sigma must be positive and finite");
  }
  double value() const { return value_; }
  // Integer half-width of the template window [-2 sigma, 2 sigma].
  int radius() const { return static_cast<int>(std::ceil(2.0 * value_ - 1e-12)); }

 private:
  double value_;
};

class HeatmapStack {
 public:
  HeatmapStack() = default;

  void add(std::string name, Heatmap channel) {
    if (!channels_.empty() && !channels_.front().same_shape(channel))
      throw std::invalid_argument("channel '" + name + "' has a different raster size");
    for (const auto& n : names_)
      if (n == name) throw std::invalid_argument("duplicate channel name '" + name + "'");
    names_.push_back(std::move(name));
    channels_.push_back(std::move(channel));
  }

  std::size_t size() const { return channels_.size(); }
  bool empty() const { return channels_.empty(); }
  int width() const { return channels_.empty() ? 0 : channels_.front().width(); }
  int height() const { return channels_.empty() ? 0 : channels_.front().height(); }

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Heatmap>& channels() const { return channels_; }
  const Heatmap& operator[](std::size_t i) const { return channels_[i]; }
  Heatmap& operator[](std::size_t i) { return channels_[i]; }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    throw std::out_of_range("no channel named '" + name + "'");
  }
  bool has(const std::string& name) const { return std::find(names_.begin(), names_.end(), name) != names_.end(); }

  friend bool operator==(const HeatmapStack&, const HeatmapStack&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Heatmap> channels_;
};

// max(0, 1 - 2 d^2 / sigma^2)
inline double quadratic_falloff(double d, double sigma) { return std::max(0.0, 1.0 - 2.0 * d * d / (sigma * sigma)); }

inline Heatmap synth_anchor_heatmap(Point2 a, Sigma sigma, Size2 size) {
  if (!is_finite(a)) throw std::invalid_argument("anchor must be finite");
  Heatmap h(size.width, size.height, 0.0f);
  const double s = sigma.value();
  const double reach = s / std::sqrt(2.0);
  const int x0 = std::max(0, static_cast<int>(std::floor(a.x - reach)));
  const int x1 = std::min(size.width - 1, static_cast<int>(std::ceil(a.x + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(a.y - reach)));
  const int y1 = std::min(size.height - 1, static_cast<int>(std::ceil(a.y + reach)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - a.x, dy = y - a.y;
      h(x, y) = static_cast<float>(std::max(0.0, 1.0 - 2.0 * (dx * dx + dy * dy) / (s * s)));
    }
  return h;
}

/// Contour heatmap from the exact point-to-polyline distance. Only pixels
/// inside each segment's support box are visited; every other pixel is zero.
inline Heatmap synth_contour_heatmap(const Polyline& c, Sigma sigma, Size2 size) {
  if (c.segment_count() == 0) throw std::invalid_argument("cannot synthesize an empty contour");
  const double s = sigma.value();
  const double reach = s / std::sqrt(2.0);

  Grid<double> best(size.width, size.height, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < c.segment_count(); ++k) {
    const Point2 a = c.segment_start(k), b = c.segment_end(k);
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
    const int x1 = std::min(size.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
    const int y1 = std::min(size.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = point_segment_distance(Point2{double(x), double(y)}, a, b);
        if (d < best(x, y)) best(x, y) = d;
      }
  }

  Heatmap h(size.width, size.height, 0.0f);
  for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = static_cast<float>(quadratic_falloff(best.data()[i], s));
  return h;
}

/// Bilinear interpolation between the four surrounding pixel centres.
/// Valid for p in [0, width-1] x [0, height-1].
template <typename T>
double bilinear_sample(const Grid<T>& h, Point2 p) {
  if (!is_finite(p) || p.x < 0.0 || p.y < 0.0 || p.x > h.width() - 1 || p.y > h.height() - 1)
    throw std::out_of_range("bilinear sample outside the raster");
  const int x0 = std::min(static_cast<int>(std::floor(p.x)), std::max(0, h.width() - 2));
  const int y0 = std::min(static_cast<int>(std::floor(p.y)), std::max(0, h.height() - 2));
  const int x1 = std::min(x0 + 1, h.width() - 1);
  const int y1 = std::min(y0 + 1, h.height() - 1);
  const double fx = p.x - x0, fy = p.y - y0;
  const double top = (1.0 - fx) * h(x0, y0) + fx * h(x1, y0);
  const double bottom = (1.0 - fx) * h(x0, y1) + fx * h(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

struct BilinearTap {
  int x = 0;
  int y = 0;
  double weight = 0.0;
};

// The four (pixel, weight) pairs behind bilinear_sample; used for gradients.
inline std::array<BilinearTap, 4> bilinear_taps(int width, int height, Point2 p) {
  const int x0 = std::min(static_cast<int>(std::floor(p.x)), std::max(0, width - 2));
  const int y0 = std::min(static_cast<int>(std::floor(p.y)), std::max(0, height - 2));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = p.x - x0, fy = p.y - y0;
  return {BilinearTap{x0, y0, (1.0 - fx) * (1.0 - fy)}, BilinearTap{x1, y0, fx * (1.0 - fy)},
          BilinearTap{x0, y1, (1.0 - fx) * fy}, BilinearTap{x1, y1, fx * fy}};
}

}  // namespace acface
