#include <acface/raster.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace acface;

namespace {

// Independent oracle: explicit per-pixel loop over every segment.
Heatmap contour_oracle(const std::vector<Point2>& pts, double sigma, int w, int h) {
  Heatmap out(w, h, 0.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double best = 1e300;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point2 a = pts[i], b = pts[i + 1];
        const double vx = b.x - a.x, vy = b.y - a.y;
        double t = ((x - a.x) * vx + (y - a.y) * vy) / (vx * vx + vy * vy);
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(x - a.x - t * vx, y - a.y - t * vy));
      }
      out(x, y) = static_cast<float>(std::max(0.0, 1.0 - 2.0 * best * best / (sigma * sigma)));
    }
  return out;
}

}  // namespace

TEST(Raster, SigmaAndRadius) {
  EXPECT_THROW(Sigma(0.0), std::invalid_argument);
  EXPECT_THROW(Sigma(-1.0), std::invalid_argument);
  EXPECT_THROW(Sigma(NAN), std::invalid_argument);
  EXPECT_EQ(Sigma(2.0).radius(), 4);
  EXPECT_EQ(Sigma(3.0).radius(), 6);
  EXPECT_EQ(Sigma(1.3).radius(), 3);
}

TEST(Raster, GridBasics) {
  EXPECT_THROW(Grid<float>(0, 3), std::invalid_argument);
  EXPECT_THROW(Grid<float>(2, 2, std::vector<float>(3)), std::invalid_argument);
  Grid<float> g(3, 2, 0.0f);
  g(2, 1) = 5.0f;
  EXPECT_EQ(g.data()[5], 5.0f);
  EXPECT_TRUE(g.contains(2, 1));
  EXPECT_FALSE(g.contains(3, 0));
}

TEST(Raster, AnchorHeatmapValues) {
  const Heatmap h = synth_anchor_heatmap({10.0, 12.0}, Sigma(2.0), {32, 32});
  EXPECT_FLOAT_EQ(h(10, 12), 1.0f);
  EXPECT_FLOAT_EQ(h(11, 12), 0.5f);   // 1 - 2 * 1 / 4
  EXPECT_FLOAT_EQ(h(11, 13), 0.0f);   // d^2 = 2 = sigma^2 / 2
  EXPECT_FLOAT_EQ(h(20, 20), 0.0f);
  const Heatmap s = synth_anchor_heatmap({10.25, 12.5}, Sigma(3.0), {32, 32});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const double d2 = (x - 10.25) * (x - 10.25) + (y - 12.5) * (y - 12.5);
      EXPECT_FLOAT_EQ(s(x, y), static_cast<float>(std::max(0.0, 1.0 - 2.0 * d2 / 9.0)));
    }
}

TEST(Raster, ContourHeatmapMatchesOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(4.0, 44.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Point2> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({u(rng), u(rng)});
    const Heatmap fast = synth_contour_heatmap(Polyline(pts, false), Sigma(2.0), {48, 48});
    EXPECT_EQ(fast, contour_oracle(pts, 2.0, 48, 48));
  }
}

TEST(Raster, OnContourPixelsArePeaks) {
  const Heatmap h = synth_contour_heatmap(Polyline({{2, 10}, {30, 10}}, false), Sigma(2.0), {32, 20});
  for (int x = 2; x <= 30; ++x) EXPECT_EQ(h(x, 10), 1.0f);
  EXPECT_FLOAT_EQ(h(15, 11), 0.5f);
  EXPECT_EQ(h(15, 12), 0.0f);
}

TEST(Raster, IntegerTranslationEquivarianceIsExact) {
  const std::vector<Point2> pts{{5.3, 7.1}, {20.7, 12.4}, {25.2, 30.9}};
  const Heatmap h = synth_contour_heatmap(Polyline(pts, false), Sigma(2.0), {48, 48});
  std::vector<Point2> moved;
  for (auto p : pts) moved.push_back({p.x + 7, p.y + 3});
  const Heatmap g = synth_contour_heatmap(Polyline(moved, false), Sigma(2.0), {48, 48});
  for (int y = 0; y + 3 < 48; ++y)
    for (int x = 0; x + 7 < 48; ++x) ASSERT_EQ(h(x, y), g(x + 7, y + 3));
}

TEST(Raster, BilinearSample) {
  Grid<double> g(4, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) g(x, y) = 2.0 * x - 3.0 * y + 1.0;
  EXPECT_NEAR(bilinear_sample(g, {1.25, 0.5}), 2.5 - 1.5 + 1.0, 1e-12);
  EXPECT_NEAR(bilinear_sample(g, {3.0, 2.0}), 6.0 - 6.0 + 1.0, 1e-12);
  EXPECT_THROW(bilinear_sample(g, {3.01, 0.0}), std::out_of_range);
  EXPECT_THROW(bilinear_sample(g, {-0.01, 0.0}), std::out_of_range);
  double wsum = 0.0;
  for (const auto& t : bilinear_taps(4, 3, {1.25, 0.5})) wsum += t.weight;
  EXPECT_NEAR(wsum, 1.0, 1e-15);
}

TEST(Raster, HeatmapStackChecks) {
  HeatmapStack s;
  s.add("a", Heatmap(4, 4));
  EXPECT_THROW(s.add("b", Heatmap(5, 4)), std::invalid_argument);
  EXPECT_THROW(s.add("a", Heatmap(4, 4)), std::invalid_argument);
  s.add("b", Heatmap(4, 4));
  EXPECT_EQ(s.index_of("b"), 1u);
  EXPECT_THROW(s.index_of("c"), std::out_of_range);
}
