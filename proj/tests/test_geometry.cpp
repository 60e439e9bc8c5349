#include <acface/geometry.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace acface;

namespace {

std::vector<Point2> circle_points(Point2 c, double r, int n, double phase = 0.0) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / n;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return pts;
}

// Mean distance from a dense analytic sampling of the circle to a contour.
double circle_error(const Polyline& c, Point2 centre, double r) {
  double sum = 0.0;
  const int n = 2000;
  for (auto p : circle_points(centre, r, n, 0.0123)) sum += point_polyline_distance(p, c);
  return sum / n;
}

}  // namespace

TEST(Geometry, SegmentDistance) {
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 1}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({4, 4}, {0, 0}, {1, 0}), 5.0);  // past the end: endpoint distance
  EXPECT_DOUBLE_EQ(point_segment_distance({0.5, 0}, {0, 0}, {1, 0}), 0.0);
  EXPECT_THROW(Segment({1, 1}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(Segment({0, 0}, {NAN, 1}), std::invalid_argument);
}

TEST(Geometry, PolylineValidation) {
  EXPECT_THROW(Polyline({{0, 0}}, false), std::invalid_argument);
  EXPECT_THROW(Polyline({{0, 0}, {0, 0}, {1, 0}}, false), std::invalid_argument);
  EXPECT_THROW(Polyline({{0, 0}, {1, 0}, {1, 1}, {0, 0}}, true), std::invalid_argument);
  EXPECT_THROW(Polyline({{0, 0}, {INFINITY, 0}}, false), std::invalid_argument);
  EXPECT_NO_THROW(Polyline({{0, 0}, {1, 0}}, false));
}

TEST(Geometry, PolylineLengthAndDistance) {
  const Polyline open({{0, 0}, {3, 0}, {3, 4}}, false);
  EXPECT_DOUBLE_EQ(open.length(), 7.0);
  const Polyline closed({{0, 0}, {3, 0}, {3, 4}}, true);
  EXPECT_DOUBLE_EQ(closed.length(), 12.0);
  // (1.5, 2.5) is 1.5 from the vertical leg and about 0.4 from the closing hypotenuse.
  EXPECT_NEAR(point_polyline_distance({1.5, 2.5}, open), 1.5, 1e-12);
  EXPECT_NEAR(point_polyline_distance({1.5, 2.5}, closed), std::abs(4 * 1.5 - 3 * 2.5) / 5.0, 1e-12);
  // Landmark 2.5 px off the nearest segment.
  EXPECT_NEAR(point_polyline_distance({1.0, -2.5}, open), 2.5, 1e-12);
}

TEST(Geometry, ArclengthAndNormals) {
  const Polyline c({{0, 0}, {4, 0}, {4, 4}}, false);
  EXPECT_EQ(point_at_arclength(c, 2.0), (Point2{2, 0}));
  EXPECT_EQ(point_at_arclength(c, 6.0), (Point2{4, 2}));
  EXPECT_THROW(point_at_arclength(c, 8.5), std::out_of_range);
  const Vec2 n0 = polyline_normal_at(c, 1.0);
  EXPECT_NEAR(n0.x, 0.0, 1e-12);
  EXPECT_NEAR(n0.y, 1.0, 1e-12);
  // At the corner the tangent bisects (1,0) and (0,1).
  const Vec2 nv = polyline_normal_at(c, 4.0);
  EXPECT_NEAR(nv.x, -std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(nv.y, std::sqrt(0.5), 1e-12);
}

TEST(Geometry, ResampleOpenAndClosed) {
  const Polyline open({{0, 0}, {8, 0}}, false);
  const auto s = resample_polyline(open, 2.0);
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(s[i].arclength, 2.0 * i);
  const auto s3 = resample_polyline(open, 3.0);
  ASSERT_EQ(s3.size(), 4u);  // 0, 3, 6 plus the end point
  EXPECT_DOUBLE_EQ(s3.back().arclength, 8.0);

  const Polyline square({{0, 0}, {2, 0}, {2, 2}, {0, 2}}, true);
  const auto sq = resample_polyline(square, 1.0);
  EXPECT_EQ(sq.size(), 8u);  // the loop's length is not repeated
}

TEST(Geometry, LineContourThroughLandmarks) {
  const LandmarkChain l({{0, 0}, {1, 2}, {3, 3}}, false);
  const Polyline c = line_contour(l);
  for (auto p : l.points()) EXPECT_EQ(point_polyline_distance(p, c), 0.0);
}

TEST(Geometry, SplineInterpolatesAndIsC1) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Point2> pts;
  for (int i = 0; i < 7; ++i) pts.push_back({10.0 * i, u(rng)});
  const LandmarkChain l(pts, false);
  const Polyline s = spline_contour(l, 32);
  for (auto p : pts) EXPECT_LT(point_polyline_distance(p, s), 1e-12);

  const auto spans = detail::quadratic_spans(l);
  for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
    const auto& a = spans[i];
    const Vec2 end_velocity = a.velocity + (2.0 * a.h) * a.accel;
    EXPECT_NEAR(end_velocity.x, spans[i + 1].velocity.x, 1e-9);
    EXPECT_NEAR(end_velocity.y, spans[i + 1].velocity.y, 1e-9);
    const Point2 end = a.eval(a.h);
    EXPECT_NEAR(end.x, pts[i + 1].x, 1e-9);
    EXPECT_NEAR(end.y, pts[i + 1].y, 1e-9);
  }
}

TEST(Geometry, SplineOfCollinearPointsIsStraight) {
  const LandmarkChain l({{0, 0}, {1, 1}, {3, 3}, {4, 4}}, false);
  const Polyline s = spline_contour(l);
  for (auto p : s.points()) EXPECT_NEAR(p.x, p.y, 1e-12);
}

TEST(Geometry, SplineClosedLoop) {
  for (int n : {5, 6, 9}) {
    const LandmarkChain l(circle_points({0, 0}, 10.0, n), true);
    const Polyline s = spline_contour(l);
    EXPECT_TRUE(s.closed());
    for (auto p : l.points()) EXPECT_LT(point_polyline_distance(p, s), 1e-12);
  }
  EXPECT_THROW(spline_contour(LandmarkChain({{0, 0}, {1, 0}}, false)), std::invalid_argument);
}

// Dense GT from an analytic circle: the line-contour is never closer than the
// spline, and the spline never closer than the dense contour itself.
TEST(Geometry, CircleOrderingLineSplineDense) {
  const Point2 c{50, 50};
  const double r = 30.0;
  const Polyline dense(circle_points(c, r, 4000), true);
  const double dense_err = circle_error(dense, c, r);
  for (int k : {8, 16, 32}) {
    const LandmarkChain l(circle_points(c, r, k), true);
    const double line_err = circle_error(line_contour(l), c, r);
    const double spline_err = circle_error(spline_contour(l, 64), c, r);
    EXPECT_GE(line_err, spline_err) << "k=" << k;
    EXPECT_GE(spline_err, dense_err) << "k=" << k;
  }
}
