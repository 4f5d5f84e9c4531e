#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace narrow;
using narrow::testing::vec;

namespace {

const Ball kUnitSegment = Ball::around_box(vec({0}), vec({1}));

}  // namespace

TEST(LoglogSlope, ExactPowerLaw) {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  ASSERT_TRUE(loglog_slope(x, y).has_value());
  EXPECT_NEAR(*loglog_slope(x, y), 2.0, 1e-12);
}

TEST(LoglogSlope, UndefinedWithoutSpread) {
  EXPECT_FALSE(loglog_slope({1, 2, 3}, {1, 1, 1}).has_value());
  EXPECT_FALSE(loglog_slope({2, 2}, {1, 5}).has_value());
  EXPECT_FALSE(loglog_slope({2}, {1}).has_value());
}

TEST(DepthSweep, OneDimensionalKinkIsLinear) {
  const auto f = [](const Vector& x) { return vec({std::abs(x[0] - 0.3)}); };
  const auto rep = depth_sweep(f, Lipschitz{1.0}, kUnitSegment, {0.2, 0.1, 0.05});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].length, 9u);
  EXPECT_EQ(rep.rows[1].length, 17u);
  EXPECT_EQ(rep.rows[2].length, 41u);
  ASSERT_TRUE(rep.slope.has_value());
  // least-squares fit of log(length) on log(1/w), computed with numpy.polyfit
  EXPECT_NEAR(*rep.slope, 1.0938135015878847, 1e-12);
  EXPECT_LE(*rep.slope, 1.5);
  EXPECT_DOUBLE_EQ(rep.rows[2].predicted, std::pow(0.5 / 0.05, 2.0));
}

TEST(DepthSweep, ConstantTargetHasNoSlope) {
  const auto f = [](const Vector&) { return vec({1.0}); };
  const auto rep = depth_sweep(f, estimate_modulus(f, kUnitSegment), kUnitSegment, {0.2, 0.1, 0.05});
  for (const auto& r : rep.rows) EXPECT_EQ(r.length, 1u);
  EXPECT_FALSE(rep.slope.has_value());
  const std::string csv = rep.to_csv();
  EXPECT_EQ(csv.rfind("eps,w,R,measured_length,predicted\n", 0), 0u);
  EXPECT_NE(csv.find("# slope,n/a\n"), std::string::npos);
}

TEST(DepthReport, NeedsTwoPoints) {
  EXPECT_THROW(depth_report({BuildTrace{}}), InvalidInput);
}

TEST(Verify, GridAndSlack) {
  const Box box(vec({0, 0}), vec({1, 2}));
  const Matrix pts = grid_points(box, 3);
  EXPECT_EQ(pts.cols(), 9);
  EXPECT_EQ(pts.col(8), vec({1, 2}));
  EXPECT_DOUBLE_EQ(grid_spacing(box, 3), 1.0);
  EXPECT_DOUBLE_EQ(grid_slack(Lipschitz{std::sqrt(2.0)}, 0.01), std::sqrt(2.0) * 0.01);
  EXPECT_EQ(default_grid_size(1), 10000u);
  EXPECT_EQ(default_grid_size(2), 200u);
  EXPECT_EQ(default_grid_size(3), 40u);
}

TEST(Verify, NetAndStringGridErrorsAgreeForACompiledPair) {
  const auto f = [](const Vector& x) { return vec({x[0] * x[1]}); };
  std::mt19937_64 rng(1);
  const auto g = narrow::testing::random_string(2, 1, 8, rng);
  const Box box(vec({-1, -1}), vec({1, 1}));
  const auto net = compile(g, box.enclosing_ball());
  const auto a = string_grid_error(g, f, box, 50);
  const auto b = net_grid_error(net, f, box, 50);
  EXPECT_NEAR(a.max_error, b.max_error, 1e-9 * (1 + a.max_error));
  EXPECT_EQ(a.points, 2500u);
}
