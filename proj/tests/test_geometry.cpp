#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"

using namespace narrow;
using narrow::testing::vec;

namespace {

// Rebuilds the outer chord independently: place X, Y on the inner circle at
// +-half the chord angle, extend line XY both ways and intersect it with the
// outer circle by the quadratic formula.
double outer_chord_oracle(double r, double inner_chord, double r_prime) {
  const double half = std::asin(inner_chord / (2.0 * r));
  const Eigen::Vector2d x(r * std::cos(half), r * std::sin(half));
  const Eigen::Vector2d y(r * std::cos(half), -r * std::sin(half));
  const Eigen::Vector2d dir = (y - x).normalized();
  // |x + t dir|^2 = r'^2  ->  t^2 + 2 (x.dir) t + |x|^2 - r'^2 = 0
  const double b = x.dot(dir);
  const double c = x.squaredNorm() - r_prime * r_prime;
  const double disc = std::sqrt(b * b - c);
  return (x + (-b + disc) * dir - (x + (-b - disc) * dir)).norm();
}

Eigen::Vector2d tangent_intersection(const Eigen::Vector2d& p, const Eigen::Vector2d& q, double rho) {
  Eigen::Matrix2d m;
  m.row(0) = p.transpose();
  m.row(1) = q.transpose();
  return m.fullPivLu().solve(Eigen::Vector2d(rho * rho, rho * rho));
}

}  // namespace

TEST(ChordGeometry, UnitRadiusHalfWidth) {
  const auto g = annulus_chord_geometry(1.0, 0.5);
  EXPECT_DOUBLE_EQ(g.r_prime, 1.025);
  EXPECT_NEAR(g.inner_chord * g.inner_chord, 0.0475, 1e-15);
  EXPECT_NEAR(g.inner_chord, 0.21794494717703367, 1e-15);
  EXPECT_NEAR(g.outer_chord, 0.5, 1e-15);
  EXPECT_NEAR(outer_chord_oracle(1.0, g.inner_chord, g.r_prime), 0.5, 1e-12);
  EXPECT_TRUE(g.obtuse_at_apex());
  EXPECT_NEAR(g.diameter(), 0.5, 1e-15);
}

TEST(ChordGeometry, StartRadiusEqualsWidth) {
  const double w = 0.3;
  const auto g = annulus_chord_geometry(w, w);
  EXPECT_NEAR(g.r_prime, 1.1 * w, 1e-15);
  EXPECT_NEAR(g.inner_chord, 0.4 * w, 1e-15);
  EXPECT_NEAR(outer_chord_oracle(w, g.inner_chord, g.r_prime), w, 1e-12);
}

TEST(ChordGeometry, TinyWidthLimit) {
  const auto g = annulus_chord_geometry(1.0, 1e-6);
  EXPECT_NEAR(g.r_prime, 1.0, 1e-12);
  EXPECT_NEAR(g.outer_chord, 1e-6, 1e-18);
  EXPECT_TRUE(g.obtuse_at_apex());
  // Z approaches the midpoint of X'Y'.
  EXPECT_NEAR((g.z - 0.5 * (g.x_prime + g.y_prime)).norm(), 0.0, 1e-6);
}

TEST(ChordGeometry, ApexIsTheTangentIntersection) {
  const auto g = annulus_chord_geometry(2.0, 0.7);
  EXPECT_LT((g.z - tangent_intersection(g.x_prime, g.y_prime, g.r_prime)).norm(), 1e-12);
  EXPECT_NEAR(g.x_prime.norm(), g.r_prime, 1e-14);
  EXPECT_NEAR(g.y_prime.norm(), g.r_prime, 1e-14);
}

TEST(ChordGeometry, RandomPairsReconstructTheWidth) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double r = std::exp(logr(rng));
    const double w = r * frac(rng);
    const auto g = annulus_chord_geometry(r, w);
    EXPECT_NEAR(outer_chord_oracle(r, g.inner_chord, g.r_prime), w, 1e-12) << "r=" << r << " w=" << w;
    EXPECT_TRUE(g.obtuse_at_apex());
    EXPECT_LE(g.diameter(), w * (1 + 1e-12));
  }
}

TEST(ChordGeometry, RejectsWidthAboveRadius) {
  EXPECT_THROW(annulus_chord_geometry(1.0, 1.5), GeometryError);
  EXPECT_THROW(annulus_chord_geometry(0.0, 0.1), GeometryError);
  EXPECT_THROW(annulus_chord_geometry(1.0, -0.1), GeometryError);
}

TEST(CoverBoundary, OneDimensionHasTwoFrames) {
  const auto plan = cover_boundary(0.5, 0.1, 1);
  ASSERT_EQ(plan.frames.size(), 2u);
  EXPECT_DOUBLE_EQ(plan.r_prime, 0.6);
  EXPECT_EQ(plan.frames[0].apex(), vec({0.6}));
  EXPECT_EQ(plan.frames[1].apex(), vec({-0.6}));
}

TEST(CoverBoundary, PlanarCountFromArcLength) {
  const auto plan = cover_boundary(1.0, 0.5, 2);
  const double lower = std::ceil(2.0 * std::numbers::pi / (2.0 * std::asin(0.5 * 0.217945)));
  EXPECT_EQ(lower, 29.0);
  EXPECT_GE(static_cast<double>(plan.frames.size()), lower);
  EXPECT_LE(static_cast<double>(plan.frames.size()), 2.0 * lower);
}

TEST(CoverBoundary, PlanarAnnulusIsCovered) {
  for (auto [r, w] : {std::pair{1.0, 0.5}, std::pair{0.3, 0.3}, std::pair{2.0, 0.05}}) {
    const auto plan = cover_boundary(r, w, 2);
    // Polar sample of the closed annulus.
    for (int i = 0; i < 4000; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / 4000.0;
      for (int k = 0; k <= 8; ++k) {
        const double rho = r + (plan.r_prime - r) * k / 8.0;
        const Vector p = vec({rho * std::cos(phi), rho * std::sin(phi)});
        bool hit = p.norm() <= r;
        for (const auto& f : plan.frames) hit = hit || f.contains(p, 1e-12);
        ASSERT_TRUE(hit) << "uncovered at rho=" << rho << " phi=" << phi;
      }
    }
  }
}

TEST(CoverBoundary, SpatialShellIsCovered) {
  const double r = 1.0, w = 0.6;
  const auto plan = cover_boundary(r, w, 3);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int i = 0; i < 3000; ++i) {
    Vector u = vec({n(rng), n(rng), n(rng)});
    u.normalize();
    for (int k = 0; k <= 4; ++k) {
      const Vector p = (r + (plan.r_prime - r) * k / 4.0) * u;
      bool hit = p.norm() <= r;
      for (const auto& f : plan.frames) hit = hit || f.contains(p, 1e-12);
      ASSERT_TRUE(hit);
    }
  }
}

TEST(ExtensionFrame, SectorHoldsTheOuterBall) {
  for (Eigen::Index d : {2, 3}) {
    const auto plan = cover_boundary(1.0, 0.4, d);
    for (const auto& f : plan.frames) {
      EXPECT_GE(f.inscribed_radius(), plan.r_prime * (1 - 1e-12));
      EXPECT_LE(f.diameter(), 0.4 * (1 + 1e-12));
      // spot check: points of the outer sphere lie in the sector
      for (int i = 0; i < 64; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / 64.0;
        Vector p = Vector::Zero(d);
        p[0] = std::cos(phi);
        p[1] = std::sin(phi);
        EXPECT_TRUE(f.in_sector(plan.r_prime * p, 1e-12));
      }
    }
  }
}

TEST(FibonacciSphere, UnitVectorsSpreadOverTheSphere) {
  const auto pts = detail::fibonacci_sphere(500);
  ASSERT_EQ(pts.size(), 500u);
  Vector mean = Vector::Zero(3);
  for (const auto& p : pts) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    mean += p;
  }
  EXPECT_LT((mean / 500.0).norm(), 0.01);
}
