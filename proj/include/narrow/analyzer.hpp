#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "narrow/geometry.hpp"
#include "narrow/relu_net.hpp"

namespace narrow {

// Open halfspace {x : normal . x + offset > 0}.
struct Halfspace {
  Vector normal;
  double offset = 0.0;

  double value(const Vector& x) const { return normal.dot(x) + offset; }
};

// Intersection of open halfspaces, convex by construction.
struct Polyhedron {
  Eigen::Index dim = 0;
  std::vector<Halfspace> halfspaces;
  // layer_ends[j] = number of halfspaces contributed by hidden layers 0..j, so
  // the constraints for the first j+1 layers are a prefix of `halfspaces`.
  std::vector<std::size_t> layer_ends;

  bool contains(const Vector& x, double margin = 0.0) const {
    return std::all_of(halfspaces.begin(), halfspaces.end(), [&](const Halfspace& h) { return h.value(x) > margin; });
  }
};

struct PositiveRegion {
  Polyhedron region;     // S_N: every hidden pre-activation strictly positive
  AffineMap restriction;  // the net on S_N
};

// Treat every ReLU as the identity and record each pre-activation as a
// halfspace constraint. Only defined for nets whose hidden widths all equal d_in.
inline PositiveRegion all_positive_region(const ReluNet& net) {
  const auto d = net.d_in();
  for (auto wdt : net.hidden_widths()) {
    if (wdt != d) {
      throw OutOfScopeNet("all-positive analysis needs every hidden width = d_in = " + std::to_string(d) + ", found " +
                          std::to_string(wdt));
    }
  }
  PositiveRegion out;
  out.region.dim = d;
  AffineMap so_far = AffineMap::identity(d);
  const auto& layers = net.layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    so_far = layers[i].compose(so_far);
    for (Eigen::Index k = 0; k < so_far.rows(); ++k) {
      out.region.halfspaces.push_back({so_far.weights().row(k).transpose(), so_far.offset()[k]});
    }
    out.region.layer_ends.push_back(out.region.halfspaces.size());
  }
  out.restriction = layers.back().compose(so_far);
  return out;
}

// Whether the closed ball (sphere) of the given radius lies in the polyhedron
// with clearance tol: a . c + b - radius |a| >= tol for every halfspace.
inline bool sphere_in_polyhedron(const Vector& center, double radius, const Polyhedron& poly, double tol) {
  if (radius < 0.0) throw InvalidInput("sphere radius must be nonnegative");
  return std::all_of(poly.halfspaces.begin(), poly.halfspaces.end(), [&](const Halfspace& h) {
    return h.value(center) - radius * h.normal.norm() >= tol;
  });
}

// f(x) = sum_j (x_j - 1/2)^2 with level a = 1/4 on the sphere A of radius 1/2
// around the cube center y, where f(y) = b = 0. The mid level c = 1/8 is the
// sphere C' of radius sqrt(1/8).
struct WitnessInstance {
  Eigen::Index d_in = 2;
  double a = 0.25;
  double b = 0.0;

  explicit WitnessInstance(Eigen::Index d) : d_in(d) {
    if (d < 1) throw InvalidInput("witness needs d_in >= 1");
  }

  Vector center() const { return Vector::Constant(d_in, 0.5); }
  double c() const { return 0.5 * (a + b); }
  double outer_radius() const { return std::sqrt(a); }
  double mid_radius() const { return std::sqrt(c()); }
  double threshold() const { return std::abs(a - b) / 4.0; }
  double f(const Vector& x) const { return (x - center()).squaredNorm(); }

  // Points of C' used for the containment pre-scan.
  std::vector<Vector> mid_sphere_samples() const {
    std::vector<Vector> pts;
    const Vector ctr = center();
    const double rad = mid_radius();
    if (d_in == 1) {
      pts.push_back(ctr.array() - rad);
      pts.push_back(ctr.array() + rad);
    } else if (d_in == 2) {
      for (int i = 0; i < 360; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 360.0;
        Vector p(2);
        p << std::cos(t), std::sin(t);
        pts.push_back(ctr + rad * p);
      }
    } else if (d_in == 3) {
      for (const auto& u : detail::fibonacci_sphere(2000)) pts.push_back(ctr + rad * u);
    } else {
      for (Eigen::Index i = 0; i < d_in; ++i) {
        for (double s : {-1.0, 1.0}) {
          Vector p = ctr;
          p[i] += s * rad;
          pts.push_back(p);
        }
      }
    }
    return pts;
  }
};

struct Certificate {
  int which_case = 0;  // 1: C' inside S_N (certified), 2: some point of C' outside S_N
  double bound = 0.0;  // case 1: certified lower bound on sup |f - f_N| over A ∪ B
  double threshold = 0.0;
  std::size_t halfspace_count = 0;
  std::optional<Vector> witness;  // case 2: point of C' outside S_N
  std::size_t prescan_samples = 0;
  std::size_t prescan_violations = 0;
  double sampled_error = 0.0;  // case 2: sampled sup |f - f_N| over A ∪ B
  bool full_rank = true;
  std::string diagnosis;

  bool meets_threshold(double tol) const { return which_case == 1 && bound >= threshold - tol; }

  json to_json() const {
    json j;
    j["case"] = which_case;
    j["bound"] = which_case == 1 ? json(bound) : json(nullptr);
    j["threshold"] = threshold;
    j["halfspaces"] = halfspace_count;
    j["witness"] = witness ? detail::vector_to_json(*witness) : json(nullptr);
    j["full_rank"] = full_rank;
    if (which_case == 2) j["sampled_error"] = sampled_error;
    j["diagnosis"] = diagnosis;
    return j;
  }
};

namespace detail {

inline bool layers_full_rank(const ReluNet& net) {
  for (std::size_t i = 0; i + 1 < net.layers().size(); ++i) {
    Eigen::FullPivLU<Matrix> lu(net.layers()[i].weights());
    if (lu.rank() < std::min(net.layers()[i].rows(), net.layers()[i].cols())) return false;
  }
  return true;
}

// sup |f - f_N| over sphere A and a polar grid of the ball B inside it.
inline double sampled_witness_error(const ReluNet& net, const WitnessInstance& w) {
  std::vector<Vector> pts;
  const Vector ctr = w.center();
  if (w.d_in == 1) {
    for (int i = 0; i <= 400; ++i) pts.push_back(ctr.array() + w.outer_radius() * (2.0 * i / 400.0 - 1.0));
  } else {
    const auto dirs = w.d_in == 2 ? std::vector<Vector>{} : fibonacci_sphere(400);
    std::vector<Vector> directions;
    if (w.d_in == 2) {
      for (int i = 0; i < 180; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 180.0;
        Vector u(2);
        u << std::cos(t), std::sin(t);
        directions.push_back(u);
      }
    } else {
      directions = dirs;
      for (auto& u : directions) {
        Vector full = Vector::Zero(w.d_in);
        full.head(3) = u;
        u = full;
      }
    }
    pts.push_back(ctr);
    for (const auto& u : directions) {
      for (int k = 1; k <= 20; ++k) pts.push_back(ctr + w.outer_radius() * (k / 20.0) * u);
    }
  }
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, std::abs(w.f(p) - forward(net, p)[0]));
  return worst;
}

}  // namespace detail

// Either certifies sup_{A ∪ B} |f - f_N| >= |a - b| / 4 for the quadratic
// witness (case 1, C' ⊂ S_N, where f_N is affine), or reports a point of C'
// outside S_N (case 2, where the bound rests on the unbounded-level-set
// argument and is only estimated by sampling).
inline Certificate certify_lower_bound(const ReluNet& net, const WitnessInstance& w, double tol = 1e-9) {
  if (net.d_in() != w.d_in) throw InvalidInput("witness dimension does not match the network");
  if (net.d_out() != 1) throw OutOfScopeNet("lower-bound analysis needs a scalar-output network");
  const PositiveRegion pr = all_positive_region(net);
  Certificate cert;
  cert.threshold = w.threshold();
  cert.halfspace_count = pr.region.halfspaces.size();
  cert.full_rank = detail::layers_full_rank(net);

  const auto samples = w.mid_sphere_samples();
  cert.prescan_samples = samples.size();
  std::optional<Vector> first_bad;
  for (const auto& p : samples) {
    if (!pr.region.contains(p, tol)) {
      ++cert.prescan_violations;
      if (!first_bad) first_bad = p;
    }
  }

  const Vector ctr = w.center();
  const double rad = w.mid_radius();
  if (cert.prescan_violations == 0 && sphere_in_polyhedron(ctr, rad, pr.region, tol)) {
    cert.which_case = 1;
    const Vector u = pr.restriction.weights().row(0).transpose();
    const double at_center = pr.restriction(ctr)[0];
    const double lo = at_center - rad * u.norm();
    const double hi = at_center + rad * u.norm();
    cert.bound = std::max(std::abs(at_center - w.b), std::max(std::abs(lo - w.c()), std::abs(hi - w.c())));
    cert.diagnosis = "C' lies in the all-positive region, where the network is affine";
  } else {
    cert.which_case = 2;
    if (first_bad) {
      cert.witness = first_bad;
    } else {
      // Every sample passed but the exact test did not: take the point of C'
      // deepest into the worst halfspace.
      const Halfspace* worst = nullptr;
      double worst_val = std::numeric_limits<double>::infinity();
      for (const auto& h : pr.region.halfspaces) {
        const double v = h.value(ctr) - rad * h.normal.norm();
        if (v < worst_val) {
          worst_val = v;
          worst = &h;
        }
      }
      Vector dir = worst->normal.norm() > 0 ? Vector(-worst->normal / worst->normal.norm()) : Vector(Vector::Zero(w.d_in));
      if (dir.norm() == 0) dir[0] = 1.0;
      cert.witness = ctr + rad * dir;
    }
    cert.sampled_error = detail::sampled_witness_error(net, w);
    cert.diagnosis =
        "level set through the witness is unbounded, so the bound |a-b|/4 holds by the level-set argument; "
        "not numerically certified here";
  }
  if (!cert.full_rank) cert.diagnosis += " (network has rank-deficient layers)";
  return cert;
}

}  // namespace narrow
