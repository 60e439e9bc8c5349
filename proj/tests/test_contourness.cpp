#include <acface/contourness.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace acface;

namespace {

Heatmap random_heatmap(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Heatmap out(w, h);
  for (auto& v : out.data()) v = static_cast<float>(u(rng));
  return out;
}

// Direct orientation sweep of 2 sum G H T - sum G H^2 written from scratch.
double sweep_oracle(const Heatmap& h, int px, int py, double s, int n_theta) {
  const int r = static_cast<int>(std::ceil(2 * s));
  double best = -1e300;
  for (int k = 0; k < n_theta; ++k) {
    const double th = std::numbers::pi * k / n_theta;
    double acc = 0.0;
    for (int j = -r; j <= r; ++j)
      for (int i = -r; i <= r; ++i) {
        const double v = std::max(0.0, double(h(px + i, py + j)));
        const double g = std::exp(-(i * i + j * j) / (s * s));
        const double d = j * std::cos(th) - i * std::sin(th);
        acc += g * (2.0 * v * (1.0 - 2.0 * d * d / (s * s)) - v * v);
      }
    best = std::max(best, acc);
  }
  return best;
}

Heatmap horizontal_line(int side, int row, double sigma) {
  Heatmap h(side, side, 0.0f);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double d = std::abs(y - row);
      h(x, y) = static_cast<float>(std::max(0.0, 1.0 - 2.0 * d * d / (sigma * sigma)));
    }
  return h;
}

// Rotates by 90 degrees: out(W-1-y, x) = in(x, y) for a square raster.
template <typename T>
Grid<T> rot90(const Grid<T>& g) {
  Grid<T> out(g.height(), g.width());
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) out(g.height() - 1 - y, x) = g(x, y);
  return out;
}

}  // namespace

TEST(Contourness, FilterBankIsSymmetricAndSeparable) {
  const FilterBank b = build_filter_bank(Sigma(2.0));
  EXPECT_EQ(b.radius, 4);
  for (int y = -4; y <= 4; ++y)
    for (int x = -4; x <= 4; ++x) {
      const double g = std::exp(-(x * x + y * y) / 4.0);
      EXPECT_NEAR(b.g(x, y), g, 1e-15);
      EXPECT_NEAR(b.g2a(x, y), (1 - 2.0 * x * x / 4.0) * g, 1e-15);
      EXPECT_NEAR(b.g2b(x, y), -(2.0 * x * y / 4.0) * g, 1e-15);
      EXPECT_NEAR(b.g2c(x, y), (1 - 2.0 * y * y / 4.0) * g, 1e-15);
      EXPECT_EQ(b.g2b(x, y), b.g2b(-x, -y));
    }
}

TEST(Contourness, IdealPeakMatchesOracle) {
  const double c2 = ideal_contourness(Sigma(2.0));
  const Heatmap h = horizontal_line(19, 9, 2.0);
  EXPECT_NEAR(c2, sweep_oracle(h, 9, 9, 2.0, 720), 1e-9);  // horizontal optimum is sampled exactly
  EXPECT_NEAR(c2, 4.919575, 1e-6);
  EXPECT_NEAR(c2, 4.92, 0.05);  // reported peak for sigma = 2
  EXPECT_NEAR(ideal_contourness(Sigma(3.0)), 11.136216, 1e-6);
}

TEST(Contourness, ClosedFormMatchesBruteForceAndDominates) {
  const Sigma s(2.0);
  const double cmax = ideal_contourness(s);
  const Heatmap h = random_heatmap(20, 20, 5);
  const auto f = contourness_map(h, s);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) {
      if (!f.is_valid(x, y)) continue;
      const double brute = contourness_bruteforce(h, Point2{double(x), double(y)}, s, 720);
      EXPECT_NEAR(f.c(x, y), brute, 1e-3 * cmax);
      EXPECT_NEAR(brute, sweep_oracle(h, x, y, 2.0, 720), 1e-9);
      for (double th : {0.0, 0.3, 1.1, 2.9})
        EXPECT_GE(f.c(x, y) + 1e-4, contourness_objective(h, x, y, s, th));
    }
}

TEST(Contourness, ZeroAndNegativeInputs) {
  const auto f = contourness_map(Heatmap(16, 16, 0.0f), Sigma(2.0));
  for (float v : f.c.data()) EXPECT_EQ(v, 0.0f);
  for (float v : f.o.data()) EXPECT_EQ(v, 0.0f);
  const auto g = contourness_map(Heatmap(16, 16, -0.5f), Sigma(2.0));  // H+ clips everything
  for (float v : g.c.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Contourness, OrientationAndNormal) {
  const Heatmap h = horizontal_line(21, 10, 2.0);
  const auto f = contourness_map(h, Sigma(2.0));
  EXPECT_NEAR(f.o(10, 10), 0.0, 1e-6);
  EXPECT_NEAR(f.n(10, 10), std::numbers::pi / 2, 1e-6);
  Heatmap d(21, 21, 0.0f);  // the diagonal y = x
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const double dist = std::abs(x - y) / std::sqrt(2.0);
      d(x, y) = static_cast<float>(std::max(0.0, 1.0 - dist * dist / 2.0));
    }
  const auto fd = contourness_map(d, Sigma(2.0));
  EXPECT_NEAR(fd.o(10, 10), std::numbers::pi / 4, 1e-6);
  // Brute-force argmax agrees on the sign.
  EXPECT_GT(contourness_objective(d, 10, 10, Sigma(2.0), std::numbers::pi / 4),
            contourness_objective(d, 10, 10, Sigma(2.0), 3 * std::numbers::pi / 4));
  for (float v : fd.n.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LT(v, static_cast<float>(std::numbers::pi));
  }
}

TEST(Contourness, Rotation90Equivariance) {
  const Heatmap h = random_heatmap(32, 32, 9);
  const auto a = contourness_maps(h, build_filter_bank(Sigma(2.0)));
  const auto b = contourness_maps(rot90(h), build_filter_bank(Sigma(2.0)));
  const Grid<double> ra = rot90(a.c);
  const Grid<std::uint8_t> va = rot90(a.valid);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      ASSERT_EQ(va(x, y), b.valid(x, y));
      if (b.valid(x, y)) {
        ASSERT_NEAR(ra(x, y), b.c(x, y), 1e-6);
      }
    }
}

TEST(Contourness, TooSmallRasterThrows) {
  EXPECT_THROW(contourness_map(Heatmap(8, 8), Sigma(2.0)), std::invalid_argument);
  EXPECT_THROW(contourness_bruteforce(Heatmap(20, 20), Point2{2, 10}, Sigma(2.0), 16), std::out_of_range);
  EXPECT_THROW(contourness_bruteforce(Heatmap(20, 20), Point2{10.5, 10}, Sigma(2.0), 16), std::invalid_argument);
}

// The backward pass is the gradient of sum U * C; checked by central differences.
TEST(Contourness, BackwardMatchesFiniteDifferences) {
  const Sigma s(2.0);
  const FilterBank bank = build_filter_bank(s);
  const Grid<double> h = random_heatmap(18, 18, 21, 0.05, 1.0).cast<double>();
  const Grid<double> up = random_heatmap(18, 18, 22, -1.0, 1.0).cast<double>();
  auto objective = [&](const Grid<double>& x) {
    const auto m = contourness_maps(x, bank);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += up.data()[i] * m.c.data()[i];
    return acc;
  };
  const Grid<double> grad = contourness_backward(h, responses(h, bank), bank, up);
  Grid<double> work = h;
  const double step = 1e-5;
  for (std::size_t i = 0; i < h.size(); i += 7) {
    const double orig = work.data()[i];
    work.data()[i] = orig + step;
    const double f1 = objective(work);
    work.data()[i] = orig - step;
    const double f0 = objective(work);
    work.data()[i] = orig;
    EXPECT_NEAR(grad.data()[i], (f1 - f0) / (2 * step), 1e-6 * std::max(1.0, std::abs(grad.data()[i])));
  }
}
