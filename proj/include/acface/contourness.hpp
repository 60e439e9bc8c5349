#pragma once

// Contourness: how well a heatmap neighbourhood matches an oriented ridge
// template, maximised over orientation in closed form with a second-order
// steerable basis.
//
// Conventions:
//  * Every "filter" below is a correlation, R(p) = sum_d K(d) * H+(p + d), with
//    zero padding. All four kernels satisfy K(-d) = K(d), so correlation and
//    convolution coincide and the adjoint of each filter is the filter itself.
//  * The template-energy term sum G * T^2 is dropped, so C(0) = 0.
//  * Pixels closer than `radius` to the border are flagged invalid.

#include <acface/raster.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace acface {

/// Truncated kernels on [-radius, radius]^2, radius = ceil(2 sigma). Each
/// kernel is separable; the 1D factors are kept for fast filtering.
struct FilterBank {
  double sigma = 0.0;
  int radius = 0;
  // 1D factors indexed by offset + radius.
  std::vector<double> gauss;     // exp(-t^2/s^2)
  std::vector<double> second;    // (1 - 2t^2/s^2) exp(-t^2/s^2)
  std::vector<double> odd;       // t exp(-t^2/s^2)
  double odd_scale = 0.0;        // -2/s^2, so G2b = odd_scale * odd(x) * odd(y)

  int side() const { return 2 * radius + 1; }

  // Dense kernel values at integer offset (x, y).
  double g(int x, int y) const { return gauss[x + radius] * gauss[y + radius]; }
  double g2a(int x, int y) const { return second[x + radius] * gauss[y + radius]; }
  double g2b(int x, int y) const { return odd_scale * odd[x + radius] * odd[y + radius]; }
  double g2c(int x, int y) const { return gauss[x + radius] * second[y + radius]; }
};

inline FilterBank build_filter_bank(Sigma sigma) {
  FilterBank bank;
  bank.sigma = sigma.value();
  bank.radius = sigma.radius();
  const double s2 = bank.sigma * bank.sigma;
  for (int t = -bank.radius; t <= bank.radius; ++t) {
    const double e = std::exp(-double(t) * t / s2);
    bank.gauss.push_back(e);
    bank.second.push_back((1.0 - 2.0 * t * t / s2) * e);
    bank.odd.push_back(t * e);
  }
  bank.odd_scale = -2.0 / s2;
  return bank;
}

/// Unclipped ridge template 1 - 2 (j cos t - i sin t)^2 / s^2, optionally
/// clipped at zero. (i, j) is the (x, y) offset from the centre pixel.
inline double ridge_template(double sigma, double theta, double i, double j, bool clip = true) {
  const double proj = j * std::cos(theta) - i * std::sin(theta);
  const double v = 1.0 - 2.0 * proj * proj / (sigma * sigma);
  return clip ? std::max(0.0, v) : v;
}

/// Separable correlation with zero padding: out(x,y) = sum_ij kx(i) ky(j) src(x+i, y+j).
template <typename T>
Grid<double> correlate_separable(const Grid<T>& src, std::span<const double> kx, std::span<const double> ky) {
  const int r = static_cast<int>(kx.size() / 2);
  const int w = src.width(), h = src.height();
  Grid<double> tmp(w, h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      const int i0 = std::max(-r, -x), i1 = std::min(r, w - 1 - x);
      for (int i = i0; i <= i1; ++i) acc += kx[i + r] * static_cast<double>(src(x + i, y));
      tmp(x, y) = acc;
    }
  Grid<double> out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    const int j0 = std::max(-r, -y), j1 = std::min(r, h - 1 - y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = j0; j <= j1; ++j) acc += ky[j + r] * tmp(x, y + j);
      out(x, y) = acc;
    }
  }
  return out;
}

/// Filter responses of H+ = max(0, H): Ra, Rb, Rc and the energy H+^2 (x) G.
struct Responses {
  Grid<double> ra, rb, rc, energy;
};

template <typename T>
Grid<double> positive_part(const Grid<T>& h) {
  Grid<double> out(h.width(), h.height(), 0.0);
  for (std::size_t i = 0; i < h.size(); ++i) out.data()[i] = std::max(0.0, static_cast<double>(h.data()[i]));
  return out;
}

template <typename T>
Responses responses(const Grid<T>& h, const FilterBank& bank) {
  if (h.width() < bank.side() || h.height() < bank.side())
    throw std::invalid_argument("heatmap is smaller than the contourness kernel");
  const Grid<double> hp = positive_part(h);
  Grid<double> hp2 = hp;
  for (auto& v : hp2.data()) v *= v;

  Responses r;
  r.ra = correlate_separable(hp, bank.second, bank.gauss);
  r.rc = correlate_separable(hp, bank.gauss, bank.second);
  r.rb = correlate_separable(hp, bank.odd, bank.odd);
  for (auto& v : r.rb.data()) v *= bank.odd_scale;
  r.energy = correlate_separable(hp2, bank.gauss, bank.gauss);
  return r;
}

/// Full-precision contourness maps; `valid` is 1 away from the border.
struct ContournessMaps {
  Grid<double> c, o, n;
  Grid<std::uint8_t> valid;
  int radius = 0;
};

/// Float32 fields as exchanged with the rest of the pipeline.
struct ContournessFields {
  Heatmap c;  // contourness
  Heatmap o;  // ridge orientation, [-pi/2, pi/2)
  Heatmap n;  // ridge normal angle, [0, pi)
  Grid<std::uint8_t> valid;
  int radius = 0;

  bool is_valid(int x, int y) const { return valid.contains(x, y) && valid(x, y) != 0; }
};

namespace detail {

inline double reduce_orientation(double o) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (o >= half_pi) o -= std::numbers::pi;
  if (o < -half_pi) o += std::numbers::pi;
  return o;
}

}  // namespace detail

inline Grid<std::uint8_t> border_mask(int width, int height, int radius) {
  Grid<std::uint8_t> valid(width, height, 0);
  for (int y = radius; y < height - radius; ++y)
    for (int x = radius; x < width - radius; ++x) valid(x, y) = 1;
  return valid;
}

/// Closed form from the responses:
///   C = Ra + Rc + sqrt((Ra - Rc)^2 + 4 Rb^2) - H+^2 (x) G
///   O = atan2(-2 Rb, Rc - Ra) / 2,  N = O + pi/2 (mod pi)
/// An isotropic neighbourhood (Ra = Rc, Rb = 0) gets O = 0.
inline ContournessMaps contourness_from_responses(const Responses& r, int radius) {
  const int w = r.ra.width(), h = r.ra.height();
  ContournessMaps m{Grid<double>(w, h), Grid<double>(w, h), Grid<double>(w, h), border_mask(w, h, radius), radius};
  for (std::size_t i = 0; i < r.ra.size(); ++i) {
    const double ra = r.ra.data()[i], rb = r.rb.data()[i], rc = r.rc.data()[i];
    const double diff = ra - rc;
    m.c.data()[i] = ra + rc + std::sqrt(diff * diff + 4.0 * rb * rb) - r.energy.data()[i];
    double o = 0.0;
    if (rb != 0.0 || diff != 0.0) o = detail::reduce_orientation(0.5 * std::atan2(-2.0 * rb, rc - ra));
    m.o.data()[i] = o;
    m.n.data()[i] = o + std::numbers::pi / 2.0;
  }
  return m;
}

template <typename T>
ContournessMaps contourness_maps(const Grid<T>& h, const FilterBank& bank) {
  return contourness_from_responses(responses(h, bank), bank.radius);
}

inline ContournessFields contourness_map(const Heatmap& h, Sigma sigma) {
  const auto m = contourness_maps(h, build_filter_bank(sigma));
  return {m.c.cast<float>(), m.o.cast<float>(), m.n.cast<float>(), m.valid, m.radius};
}

/// Single-orientation objective at integer pixel (px, py):
///   2 sum G H+ T_theta - sum G H+^2, with the unclipped template.
template <typename T>
double contourness_objective(const Grid<T>& h, int px, int py, Sigma sigma, double theta) {
  const int r = sigma.radius();
  const double s = sigma.value();
  double cross_term = 0.0, energy = 0.0;
  for (int j = -r; j <= r; ++j)
    for (int i = -r; i <= r; ++i) {
      const int x = px + i, y = py + j;
      const double hv = h.contains(x, y) ? std::max(0.0, static_cast<double>(h(x, y))) : 0.0;
      const double g = std::exp(-(double(i) * i + double(j) * j) / (s * s));
      cross_term += g * hv * ridge_template(s, theta, i, j, /*clip=*/false);
      energy += g * hv * hv;
    }
  return 2.0 * cross_term - energy;
}

/// Orientation sweep over theta = k pi / n_theta, k = 0..n_theta-1.
template <typename T>
double contourness_bruteforce(const Grid<T>& h, Point2 p, Sigma sigma, int n_theta) {
  if (n_theta < 2) throw std::invalid_argument("n_theta must be >= 2");
  const int px = static_cast<int>(std::lround(p.x)), py = static_cast<int>(std::lround(p.y));
  if (std::abs(p.x - px) > 1e-9 || std::abs(p.y - py) > 1e-9)
    throw std::invalid_argument("brute-force contourness is evaluated at integer pixels");
  const int r = sigma.radius();
  if (px < r || py < r || px > h.width() - 1 - r || py > h.height() - 1 - r)
    throw std::out_of_range("pixel is within the template radius of the border");
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_theta; ++k)
    best = std::max(best, contourness_objective(h, px, py, sigma, std::numbers::pi * k / n_theta));
  return best;
}

/// Contourness of an ideal straight contour heatmap at an on-contour pixel:
/// the peak value used to calibrate thresholds and the loss mapping.
inline double ideal_contourness(Sigma sigma) {
  const int r = sigma.radius();
  const int side = 4 * r + 3;
  const int mid = side / 2;
  const Polyline line({{-10.0, double(mid)}, {side + 10.0, double(mid)}}, false);
  const Heatmap h = synth_contour_heatmap(line, sigma, {side, side});
  return contourness_maps(h, build_filter_bank(sigma)).c(mid, mid);
}

/// Adjoint of the contourness map. Given per-pixel upstream weights U = dL/dC,
/// returns dL/dH. The kink of max(0, H) at H = 0 and the square root at an
/// isotropic point both take the zero subgradient.
template <typename T>
Grid<double> contourness_backward(const Grid<T>& h, const Responses& r, const FilterBank& bank,
                                  const Grid<double>& upstream) {
  const int w = h.width(), ht = h.height();
  Grid<double> ua(w, ht, 0.0), ub(w, ht, 0.0), uc(w, ht, 0.0);
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const double u = upstream.data()[i];
    if (u == 0.0) continue;
    const double diff = r.ra.data()[i] - r.rc.data()[i];
    const double rb = r.rb.data()[i];
    const double root = std::sqrt(diff * diff + 4.0 * rb * rb);
    double ga = 1.0, gb = 0.0, gc = 1.0;
    if (root > 1e-12) {
      ga = 1.0 + diff / root;
      gc = 1.0 - diff / root;
      gb = 4.0 * rb / root;
    }
    ua.data()[i] = u * ga;
    ub.data()[i] = u * gb;
    uc.data()[i] = u * gc;
  }
  const Grid<double> pa = correlate_separable(ua, bank.second, bank.gauss);
  const Grid<double> pc = correlate_separable(uc, bank.gauss, bank.second);
  const Grid<double> pb = correlate_separable(ub, bank.odd, bank.odd);
  const Grid<double> pe = correlate_separable(upstream, bank.gauss, bank.gauss);

  Grid<double> grad(w, ht, 0.0);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double hv = static_cast<double>(h.data()[i]);
    if (!(hv > 0.0)) continue;
    grad.data()[i] = pa.data()[i] + bank.odd_scale * pb.data()[i] + pc.data()[i] - 2.0 * hv * pe.data()[i];
  }
  return grad;
}

}  // namespace acface
