#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <acface/losses.hpp>

#include <cmath>
#include <cstdint>
#include <random>

namespace acface::testing {

// Random 24x24 loss instance. Values are drawn from U(0.05, 1) and re-drawn
// while a prediction pixel sits within `margin` of a kink of the loss
// (|H - pred| = H for the hard-example weight), so central differences with
// step <= margin / 2 never straddle one.
inline LossProblem gradient_instance(std::uint64_t seed, Grid<double>& pred, double margin = 2e-3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  LossProblem prob;
  prob.sigma = 2.0;
  prob.weights = LossWeights::defaults(Sigma(2.0));
  prob.gt = Grid<double>(24, 24);
  pred = Grid<double>(24, 24);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double h = u(rng), p = u(rng);
    while (std::abs(std::abs(h - p) - h) < margin) p = u(rng);
    prob.gt.data()[i] = h;
    pred.data()[i] = p;
  }
  prob.supervision = WeakSupervision::from_landmarks(LandmarkChain({{6, 8}, {11, 12}, {17, 11}}, false));
  return prob;
}

// Pixel-aligned weak-supervision fixture: a horizontal contour on row `row`
// spanning the whole raster, landmarks at integer pixels across the valid
// zone so that every pixel of the contour is within D of the line-contour.
struct WeakFixture {
  int size = 40;
  int row = 20;
  WeakSupervision sup;
  LossWeights weights = LossWeights::defaults(Sigma(2.0));

  WeakFixture() : sup(WeakSupervision::from_landmarks(LandmarkChain({{4, 20}, {12, 20}, {20, 20}, {28, 20}, {35, 20}}, false))) {}

  // Ideal heatmap of the contour shifted by `offset` rows, scaled by t.
  Grid<double> heatmap(int offset, double t = 1.0) const {
    Grid<double> h(size, size, 0.0);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double d = y - (row + offset);
        h(x, y) = t * std::max(0.0, 1.0 - 2.0 * d * d / 4.0);
      }
    return h;
  }
};

}  // namespace acface::testing
