#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace narrow;
using narrow::testing::vec;

namespace {

ExtensionFrame right_end(double r, double w) {
  ExtensionFrame f;
  f.axis = vec({1.0});
  f.base_offset = r;
  f.apex_offset = r + w;
  return f;
}

Vector sum_sq_centered(const Vector& x) { return vec({(x.array() - 0.5).square().sum()}); }

Box unit_box(Eigen::Index d) { return Box(Vector::Zero(d), Vector::Ones(d)); }

}  // namespace

TEST(FrameAffine, ZeroAtApexEpsOnTheBase) {
  const auto plan = cover_boundary(1.0, 0.5, 2);
  const auto& fr = plan.frames[3];
  const auto ell = frame_affine(fr, 0.1, 2);
  EXPECT_NEAR(ell(fr.apex()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  for (const auto& v : fr.base_vertices()) EXPECT_NEAR(ell(v)[0], 0.1, 1e-14);
}

TEST(Extend, GrowsLengthByTwoAndHitsTheApexValue) {
  const auto f = [](const Vector& x) { return vec({std::sin(3 * x[0])}); };
  const auto step = make_step(right_end(0.5, 0.1), 0.1, f);
  const auto g0 = MaxMinString::constant(1, vec({42.0}));
  const auto g1 = extend(g0, step);
  EXPECT_EQ(g1.length(), g0.length() + 2);
  EXPECT_EQ(eval_string(g1, step.frame.apex())[0], f(step.frame.apex())[0]);
}

TEST(Extend, ConstantTargetStaysConstant) {
  const auto f = [](const Vector&) { return vec({2.5, -1.0}); };
  const auto plan = cover_boundary(0.4, 0.2, 2);
  auto g = MaxMinString::constant(2, vec({2.5, -1.0}));
  for (const auto& fr : plan.frames) extend_in_place(g, make_step(fr, 0.05, f));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const Vector x = detail::random_in_ball(Ball(Vector::Zero(2), plan.r_prime), rng);
    EXPECT_EQ(eval_string(g, x), vec({2.5, -1.0}));
  }
}

TEST(Extend, OneDimensionalSegmentKeepsTheErrorBelowEps) {
  // g = x + eps/2 approximates f(x) = x on [-r, r]; after one step it must
  // approximate f to eps on [-r, r + w].
  const double r = 0.5, eps = 0.1, w = eps;
  const auto f = [](const Vector& x) { return x; };
  MaxMinString g(1, 1, {AffineMap(Matrix::Ones(1, 1), vec({eps / 2}))}, {});
  // truncate g outside K so it is a poor approximation there
  g.append(Op::Min, AffineMap::constant(1, vec({r + eps / 2})));
  const auto g1 = extend(g, make_step(right_end(r, w), eps, f));
  double worst = 0.0;
  const double h = w / 100.0;
  for (double x = -r; x <= r + w + 1e-12; x += h) worst = std::max(worst, std::abs(eval_string(g1, vec({x}))[0] - x));
  EXPECT_LE(worst, eps + 1e-12);
}

TEST(Build, ConstantTargetIsLengthOne) {
  const auto f = [](const Vector&) { return vec({3.0}); };
  const auto res = build(f, Lipschitz{1.0}, unit_box(2).enclosing_ball(), 0.2);
  // w < R, so annuli are still built and the result is only eps-close to 3.
  const auto grid = string_grid_error(res.string, f, unit_box(2), 100);
  EXPECT_LE(grid.max_error, 0.2);
  EXPECT_EQ(eval_string(res.string, vec({0.5, 0.5}))[0], 3.0);
  const auto clamped = build(f, Lipschitz{1.0}, unit_box(2).enclosing_ball(), 5.0);
  EXPECT_TRUE(clamped.trace.clamped);
  EXPECT_EQ(clamped.string.length(), 1u);
}

TEST(Build, OneDimensionalKink) {
  const auto f = [](const Vector& x) { return vec({std::abs(x[0] - 0.3)}); };
  const Box box = unit_box(1);
  const auto res = build(f, Lipschitz{1.0}, box.enclosing_ball(), 0.05);
  const auto grid = string_grid_error(res.string, f, box, 10000);
  EXPECT_LE(grid.max_error, 0.05 + grid.spacing);
  EXPECT_EQ(res.trace.linbound_violations, 0u);
  // two pieces per annulus on top of the seed constant
  EXPECT_EQ(res.string.length(), 1 + 2 * 2 * res.trace.annuli.size());
  EXPECT_LE(static_cast<double>(res.string.length()), 100.0 * 1.0 / 0.05);
}

TEST(Build, OneDimensionalHoelderTarget) {
  const auto f = [](const Vector& x) { return vec({std::sqrt(std::abs(x[0]))}); };
  const Box box(vec({-1}), vec({1}));
  const auto res = build(f, Hoelder{1.0, 0.5}, box.enclosing_ball(), 0.2);
  const auto grid = string_grid_error(res.string, f, box, 10000);
  EXPECT_LE(grid.max_error, 0.2 + std::sqrt(grid.spacing));
}

TEST(Build, PlanarQuadraticCoarse) {
  const Function f = sum_sq_centered;
  const Box box = unit_box(2);
  const double eps = 0.2;
  const double lip = std::sqrt(2.0);
  const auto res = build(f, Lipschitz{lip}, box.enclosing_ball(), eps);
  const auto& t = res.trace;
  EXPECT_GT(t.steps_checked, 0u);
  EXPECT_EQ(t.linbound_violations, 0u);
  EXPECT_LE(t.max_step_diameter, t.w * (1 + 1e-12));
  const auto grid = string_grid_error(res.string, f, box, 200);
  EXPECT_LE(grid.max_error, eps + lip * grid.spacing);
  // r^2 grows by at least w^2/5 per annulus
  const double bound = std::ceil(10.0 * t.radius * t.radius / (t.w * t.w)) + 1;
  EXPECT_LE(static_cast<double>(t.annuli.size()), bound);
  for (std::size_t i = 1; i < t.annuli.size(); ++i) {
    EXPECT_GT(t.annuli[i].r, t.annuli[i - 1].r);
    EXPECT_DOUBLE_EQ(t.annuli[i].r, t.annuli[i - 1].r_prime);
  }
  EXPECT_EQ(t.total_length, res.string.length());
}

TEST(Build, PlanarVectorOutput) {
  const Function f = [](const Vector& x) { return vec({x[0] * x[1], std::cos(2 * x[0])}); };
  const Box box = unit_box(2);
  const double lip = std::sqrt(2.0) + 2.0;  // bounds the row Lipschitz constants together
  const auto res = build(f, Lipschitz{lip}, box.enclosing_ball(), 0.5);
  const auto grid = string_grid_error(res.string, f, box, 100);
  EXPECT_LE(grid.max_error, 0.5 + lip * grid.spacing);
}

TEST(Build, SpatialCoarse) {
  const Function f = sum_sq_centered;
  const Box box = unit_box(3);
  const double lip = std::sqrt(3.0);
  const auto res = build(f, Lipschitz{lip}, box.enclosing_ball(), 0.45);
  EXPECT_EQ(res.trace.linbound_violations, 0u);
  const auto grid = string_grid_error(res.string, f, box, 20);
  EXPECT_LE(grid.max_error, 0.45 + lip * grid.spacing);
}

TEST(Build, EmpiricalModulusIsFlaggedHeuristic) {
  const Function f = [](const Vector& x) { return vec({x[0]}); };
  const Ball b = unit_box(1).enclosing_ball();
  const auto res = build(f, estimate_modulus(f, b), b, 0.1);
  EXPECT_TRUE(res.trace.heuristic);
  EXPECT_FALSE(res.trace.log.empty());
}

TEST(Build, RejectsUnsupportedDimension) {
  const Function f = [](const Vector&) { return vec({0}); };
  EXPECT_THROW(build(f, Lipschitz{1}, Ball(Vector::Zero(4), 1.0), 0.1), InvalidInput);
}

TEST(BuildTrace, CsvHeaderAndRows) {
  const auto f = [](const Vector& x) { return x; };
  const auto res = build(f, Lipschitz{1.0}, unit_box(1).enclosing_ball(), 0.1);
  const std::string csv = res.trace.to_csv();
  EXPECT_EQ(csv.rfind("annulus_index,r,r_prime,steps,cumulative_length\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), res.trace.annuli.size() + 1);
}
