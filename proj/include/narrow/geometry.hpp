#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "narrow/affine.hpp"

namespace narrow {

// One annulus increment seen in a reference direction (the +x axis). The
// chord XY of the inner circle lies on the line at distance `chord_offset`
// from the origin; the same line meets the outer circle at X', Y'; Z is where
// the outer-circle tangents at X' and Y' cross.
struct ChordGeometry {
  double r = 0.0;
  double w = 0.0;
  double r_prime = 0.0;
  double inner_chord = 0.0;   // |XY|
  double outer_chord = 0.0;   // |X'Y'|, reconstructed by intersecting the line with the outer circle
  double chord_offset = 0.0;  // distance from the origin to line XY
  double apex_offset = 0.0;   // |OZ| = r'^2 / chord_offset
  double half_angle = 0.0;    // angle XOY / 2
  Eigen::Vector2d x_prime;
  Eigen::Vector2d y_prime;
  Eigen::Vector2d z;

  double leg() const { return (z - x_prime).norm(); }
  double diameter() const { return std::max(outer_chord, leg()); }
  bool obtuse_at_apex() const {
    const double legs = (z - x_prime).squaredNorm() + (z - y_prime).squaredNorm();
    return outer_chord * outer_chord >= legs * (1.0 - 1e-12);
  }
};

// r' = r + w^2 / (c r). The chord length comes from the exact relation
// |X'Y'|^2 = |XY|^2 + 4 (r'^2 - r^2) with the target |X'Y'| = w.
inline ChordGeometry annulus_chord_geometry(double r, double w, double increment_constant = 10.0) {
  if (!(w > 0.0) || !(r > 0.0) || !std::isfinite(r) || !std::isfinite(w)) {
    throw GeometryError("annulus geometry needs finite r > 0 and w > 0");
  }
  if (w > r * (1.0 + 1e-12)) throw GeometryError("annulus geometry needs w <= r");
  ChordGeometry g;
  g.r = r;
  g.w = w;
  const double step = w * w / (increment_constant * r);
  g.r_prime = r + step;
  const double ring = step * (g.r_prime + r);  // r'^2 - r^2 without cancellation
  const double xy_sq = w * w - 4.0 * ring;
  if (!(xy_sq > 0.0)) {
    throw GeometryError("chord length squared is not positive (" + std::to_string(xy_sq) + ") for r=" +
                        std::to_string(r) + ", w=" + std::to_string(w));
  }
  g.inner_chord = std::sqrt(xy_sq);
  g.half_angle = std::asin(std::min(1.0, g.inner_chord / (2.0 * r)));
  g.chord_offset = std::sqrt(std::max(0.0, r * r - xy_sq / 4.0));
  const double outer_half = std::sqrt(xy_sq / 4.0 + ring);
  g.outer_chord = 2.0 * outer_half;
  g.apex_offset = g.r_prime * g.r_prime / g.chord_offset;
  g.x_prime = Eigen::Vector2d(g.chord_offset, outer_half);
  g.y_prime = Eigen::Vector2d(g.chord_offset, -outer_half);
  g.z = Eigen::Vector2d(g.apex_offset, 0.0);
  if (!g.obtuse_at_apex()) throw GeometryError("triangle X'ZY' is not obtuse at Z");
  return g;
}

// Corner-cutting region for one extension step, described in its own axis:
// a segment (d=1), triangle (d=2) or cone tip (d=3) with apex at
// apex_offset * axis and base (segment X'Y', disk, or point) in the plane
// {axis . x = base_offset}.
struct ExtensionFrame {
  Vector axis;               // unit, pointing outward
  double base_offset = 0.0;  // h
  double apex_offset = 0.0;  // a > h
  double base_radius = 0.0;  // half of |X'Y'| (0 in one dimension)

  Vector apex() const { return apex_offset * axis; }
  double height() const { return apex_offset - base_offset; }
  double slant() const { return std::hypot(height(), base_radius); }
  double diameter() const { return std::max(2.0 * base_radius, slant()); }

  double radial(const Vector& p) const { return (p - axis.dot(p) * axis).norm(); }

  // Inside the closed corner region.
  bool contains(const Vector& p, double tol = 1e-12) const {
    const double s = axis.dot(p);
    if (s < base_offset - tol || s > apex_offset + tol) return false;
    return radial(p) <= (apex_offset - s) * base_radius / height() + tol;
  }

  // Inside the infinite sector / cone spanned at the apex by the region.
  bool in_sector(const Vector& p, double tol = 1e-12) const {
    const double s = axis.dot(p);
    if (s > apex_offset + tol) return false;
    return radial(p) <= (apex_offset - s) * base_radius / height() + tol;
  }

  // Distance from the origin to the sector boundary (for d >= 2). The sector
  // contains the origin-centred ball of this radius.
  double inscribed_radius() const {
    if (axis.size() == 1) return apex_offset;
    return apex_offset * base_radius / slant();
  }

  // Unit vector orthogonal to the axis, used to place base vertices.
  Vector perpendicular() const {
    const auto d = axis.size();
    if (d == 1) return Vector::Zero(1);
    Vector e = Vector::Zero(d);
    Eigen::Index smallest = 0;
    axis.cwiseAbs().minCoeff(&smallest);
    e[smallest] = 1.0;
    Vector p = e - axis.dot(e) * axis;
    return p / p.norm();
  }

  // X' and Y' for d=2 (opposite rim points for d=3, the single base point for d=1).
  std::vector<Vector> base_vertices() const {
    const Vector centre = base_offset * axis;
    if (axis.size() == 1) return {centre};
    const Vector perp = perpendicular();
    return {centre + base_radius * perp, centre - base_radius * perp};
  }
};

// Frames for one annulus increment r -> r_prime.
struct CoverPlan {
  Eigen::Index d_in = 0;
  double r = 0.0;
  double w = 0.0;
  double r_prime = 0.0;
  double half_angle = 0.0;
  std::vector<ExtensionFrame> frames;
  int densify_rounds = 0;
};

struct CoverOptions {
  double increment_constant = 10.0;
  double overlap = 0.9;
  int max_densify = 4;
  int samples_per_frame = 12;
};

namespace detail {

inline ExtensionFrame frame_along(const Vector& axis, const ChordGeometry& g) {
  ExtensionFrame f;
  f.axis = axis;
  f.base_offset = g.chord_offset;
  f.apex_offset = g.apex_offset;
  f.base_radius = g.outer_chord / 2.0;
  return f;
}

inline std::vector<Vector> fibonacci_sphere(std::size_t n) {
  std::vector<Vector> out;
  out.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    Vector u(3);
    u << rho * std::cos(phi), rho * std::sin(phi), z;
    out.push_back(u);
  }
  return out;
}

// Annulus shell radii used for coverage sampling (points at radius <= r are
// already certified).
inline std::vector<double> shell_radii(double r, double r_prime) {
  return {r + 1e-3 * (r_prime - r), 0.5 * (r + r_prime), r_prime};
}

inline bool covered_2d(const CoverPlan& plan, const Vector& p) {
  const double n = static_cast<double>(plan.frames.size());
  double angle = std::atan2(p[1], p[0]);
  if (angle < 0) angle += 2.0 * std::numbers::pi;
  const auto nearest = static_cast<long>(std::llround(angle / (2.0 * std::numbers::pi) * n));
  for (long k = nearest - 1; k <= nearest + 1; ++k) {
    const auto idx = static_cast<std::size_t>(((k % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n));
    if (plan.frames[idx].contains(p, 1e-12 * plan.r_prime)) return true;
  }
  return false;
}

}  // namespace detail

// Checks that B_r together with the corner regions covers the shell
// r < |x| <= r' on a dense sample. Returns the first uncovered point, if any.
inline std::optional<Vector> find_uncovered(const CoverPlan& plan, int samples_per_frame = 12) {
  const auto radii = detail::shell_radii(plan.r, plan.r_prime);
  if (plan.d_in == 1) {
    for (double s : {-1.0, 1.0}) {
      for (double rad : radii) {
        Vector p(1);
        p << s * rad;
        bool ok = false;
        for (const auto& f : plan.frames) ok = ok || f.contains(p, 1e-12 * plan.r_prime);
        if (!ok) return p;
      }
    }
    return std::nullopt;
  }
  if (plan.d_in == 2) {
    const std::size_t m = plan.frames.size() * static_cast<std::size_t>(samples_per_frame);
    for (std::size_t i = 0; i < m; ++i) {
      const double angle = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      for (double rad : radii) {
        Vector p(2);
        p << rad * std::cos(angle), rad * std::sin(angle);
        if (!detail::covered_2d(plan, p)) return p;
      }
    }
    return std::nullopt;
  }
  // d = 3: sort frame axes by z so each sample only tests nearby frames.
  std::vector<std::size_t> order(plan.frames.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return plan.frames[a].axis[2] < plan.frames[b].axis[2]; });
  std::vector<double> zs;
  zs.reserve(order.size());
  for (auto i : order) zs.push_back(plan.frames[i].axis[2]);
  const double window = 3.0 * plan.half_angle + 1e-9;
  const auto directions = detail::fibonacci_sphere(plan.frames.size() * static_cast<std::size_t>(samples_per_frame) / 3 + 7);
  for (const auto& v : directions) {
    for (double rad : radii) {
      const Vector p = rad * v;
      auto lo = std::lower_bound(zs.begin(), zs.end(), v[2] - window);
      auto hi = std::upper_bound(zs.begin(), zs.end(), v[2] + window);
      bool ok = false;
      for (auto it = lo; it != hi && !ok; ++it) {
        ok = plan.frames[order[static_cast<std::size_t>(it - zs.begin())]].contains(p, 1e-12 * plan.r_prime);
      }
      if (!ok) return p;
    }
  }
  return std::nullopt;
}

// Frames for one increment r -> r'. In one dimension the increment is a
// whole w (one segment per side); otherwise r' = r + w^2 / (c r) and frames
// are spread around the circle (d=2) or over a Fibonacci lattice (d=3).
inline CoverPlan cover_boundary(double r, double w, Eigen::Index d_in, const CoverOptions& opt = {}) {
  if (d_in < 1 || d_in > 3) throw InvalidInput("cover_boundary supports d_in in {1, 2, 3}");
  CoverPlan plan;
  plan.d_in = d_in;
  plan.r = r;
  plan.w = w;
  if (d_in == 1) {
    if (!(w > 0.0) || !(r > 0.0)) throw GeometryError("cover_boundary needs r > 0 and w > 0");
    plan.r_prime = r + w;
    for (double s : {1.0, -1.0}) {
      ExtensionFrame f;
      f.axis = Vector::Constant(1, s);
      f.base_offset = r;
      f.apex_offset = r + w;
      f.base_radius = 0.0;
      plan.frames.push_back(f);
    }
    if (find_uncovered(plan, opt.samples_per_frame)) throw GeometryError("1-d cover failed");
    return plan;
  }

  const ChordGeometry g = annulus_chord_geometry(r, w, opt.increment_constant);
  plan.r_prime = g.r_prime;
  plan.half_angle = g.half_angle;
  std::size_t count = 0;
  if (d_in == 2) {
    count = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / (opt.overlap * 2.0 * g.half_angle)));
  } else {
    const double cap = opt.overlap * g.half_angle;
    count = static_cast<std::size_t>(std::ceil(std::pow(2.6 / cap, 2.0)));
  }
  count = std::max<std::size_t>(count, 3);

  for (int round = 0; round <= opt.max_densify; ++round) {
    plan.frames.clear();
    if (d_in == 2) {
      for (std::size_t i = 0; i < count; ++i) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        Vector u(2);
        u << std::cos(phi), std::sin(phi);
        plan.frames.push_back(detail::frame_along(u, g));
      }
    } else {
      for (const auto& u : detail::fibonacci_sphere(count)) plan.frames.push_back(detail::frame_along(u, g));
    }
    plan.densify_rounds = round;
    if (!find_uncovered(plan, opt.samples_per_frame)) return plan;
    count *= (d_in == 2 ? 2 : 4);
  }
  throw GeometryError("annulus cover still has gaps after " + std::to_string(opt.max_densify) + " densifications");
}

}  // namespace narrow
