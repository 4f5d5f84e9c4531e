#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "narrow/max_min_string.hpp"
#include "narrow/modulus.hpp"

namespace narrow {

struct LabeledPointSet {
  Eigen::Index d_in = 0;
  Eigen::Index d_out = 0;
  std::vector<Vector> points;
  std::vector<Vector> values;

  LabeledPointSet(Eigen::Index din, Eigen::Index dout, std::vector<Vector> pts, std::vector<Vector> vals)
      : d_in(din), d_out(dout), points(std::move(pts)), values(std::move(vals)) {
    if (d_in < 1 || d_out < 1) throw InvalidInput("point set needs d_in, d_out >= 1");
    if (points.empty()) throw InvalidInput("point set is empty");
    if (points.size() != values.size()) throw InvalidInput("points and values differ in count");
    for (const auto& p : points) {
      require_dim(p.size(), d_in, "point");
      if (!p.allFinite()) throw InvalidInput("point coordinates must be finite");
    }
    for (const auto& v : values) {
      require_dim(v.size(), d_out, "value");
      if (!v.allFinite()) throw InvalidInput("values must be finite");
    }
    if (min_pairwise_distance() <= 0.0) throw InvalidInput("points must be pairwise distinct");
  }

  double min_pairwise_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, (points[i] - points[j]).norm());
    }
    return best;
  }
};

struct InterpolateOptions {
  std::uint64_t seed = 0;
  int max_redraws = 64;
  double tie_tolerance = 1e-12;  // relative to the spread of projections
  bool check_invariants = true;
};

namespace detail {

inline double projection_scale(const std::vector<Vector>& points, const std::vector<std::size_t>& subset,
                               const Vector& functional) {
  double scale = 0.0;
  for (auto i : subset) scale = std::max(scale, std::abs(functional.dot(points[i])));
  return std::max(scale, 1.0);
}

// Index into `subset` of the unique maximizer of functional . p, or nullopt on a tie.
inline std::optional<std::size_t> unique_maximizer(const std::vector<Vector>& points,
                                                   const std::vector<std::size_t>& subset, const Vector& functional,
                                                   double tie_tolerance) {
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const double v = functional.dot(points[subset[k]]);
    if (v > best_val) {
      runner_up = best_val;
      best_val = v;
      best = k;
    } else if (v > runner_up) {
      runner_up = v;
    }
  }
  const double scale = projection_scale(points, subset, functional);
  if (subset.size() > 1 && best_val - runner_up <= tie_tolerance * scale) return std::nullopt;
  return best;
}

}  // namespace detail

// Index of the point maximizing functional . p. Throws DegenerateConfiguration
// when the maximizer is not unique; callers that can redraw should use
// find_extreme_point instead.
inline std::size_t extreme_point(const std::vector<Vector>& points, const Vector& functional,
                                 double tie_tolerance = 1e-12) {
  if (points.empty()) throw InvalidInput("extreme_point needs at least one point");
  std::vector<std::size_t> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto k = detail::unique_maximizer(points, all, functional, tie_tolerance);
  if (!k) throw DegenerateConfiguration("functional has a tied maximizer");
  return *k;
}

struct ExtremePoint {
  std::size_t index;  // into the subset
  Vector functional;  // the point strictly maximizes functional . p over the subset
};

template <class Rng>
ExtremePoint find_extreme_point(const std::vector<Vector>& points, const std::vector<std::size_t>& subset, Rng& rng,
                                const InterpolateOptions& opt = {}) {
  const auto d = points[subset.front()].size();
  for (int attempt = 0; attempt < opt.max_redraws; ++attempt) {
    Vector c = detail::random_unit(d, rng);
    if (auto k = detail::unique_maximizer(points, subset, c, opt.tie_tolerance)) return {*k, c};
  }
  throw DegenerateConfiguration("no generic functional found after " + std::to_string(opt.max_redraws) + " draws");
}

// Affine l with l(s0) = 0 and every component of l(s) >= t on the other
// points. `direction` must be strictly minimized at s0 over the points, i.e.
// pass the negation of the functional that extreme_point maximized.
inline AffineMap separating_affine(const std::vector<Vector>& points, std::size_t s0_index, const Vector& direction,
                                   double t, Eigen::Index d_out, double tolerance = 1e-12) {
  if (s0_index >= points.size()) throw InvalidInput("separating_affine: s0 index out of range");
  if (!(t > 0.0)) throw InvalidInput("separating_affine: t must be positive");
  const Vector& s0 = points[s0_index];
  require_dim(direction.size(), s0.size(), "separating_affine direction");
  const double base = direction.dot(s0);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i != s0_index) gap = std::min(gap, direction.dot(points[i]) - base);
  }
  if (points.size() == 1) gap = 1.0;
  if (gap <= tolerance * std::max(1.0, std::abs(base))) {
    throw DegenerateConfiguration("separating_affine: s0 is not a strict minimizer (gap " + std::to_string(gap) + ")");
  }
  Matrix w(d_out, s0.size());
  for (Eigen::Index k = 0; k < d_out; ++k) w.row(k) = (t / gap) * direction.transpose();
  // b = -(W s0) through the same product the evaluator uses, so l(s0) is exactly 0.
  Vector ws0 = w * s0;
  return AffineMap(std::move(w), -ws0);
}

struct InterpolationResult {
  MaxMinString string;
  std::vector<std::size_t> removal_order;  // peel order: first entry is the last point added
};

// Exact max-min string through every labeled point: peel extreme points of the
// convex hull one at a time, then add them back in reverse, each with a
// clamp pair max(min(g, f(s0) + l), f(s0) - l) that is inert on the rest.
inline InterpolationResult interpolate(const LabeledPointSet& data, const InterpolateOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> remaining(data.points.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  std::vector<std::size_t> order;
  std::vector<Vector> directions;
  while (remaining.size() > 1) {
    auto ext = find_extreme_point(data.points, remaining, rng, opt);
    order.push_back(remaining[ext.index]);
    directions.push_back(-ext.functional);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(ext.index));
  }

  const std::size_t base = remaining.front();
  MaxMinString g = MaxMinString::constant(data.d_in, data.values[base]);
  std::vector<std::size_t> handled{base};
  // g evaluated at each handled point, advanced one clamp pair at a time.
  std::vector<Vector> cached{eval_string(g, data.points[base])};

  auto apply_pair = [](const Vector& current, const AffineMap& upper, const AffineMap& lower, const Vector& x) {
    Vector u = upper(x);
    Vector l = lower(x);
    Vector out(current.size());
    for (Eigen::Index k = 0; k < current.size(); ++k) out[k] = std::max(std::min(current[k], u[k]), l[k]);
    return out;
  };

  for (std::size_t step = order.size(); step-- > 0;) {
    const std::size_t s0 = order[step];
    const Vector& f0 = data.values[s0];

    std::vector<Vector> local{data.points[s0]};
    double spread = 0.0;
    for (std::size_t k = 0; k < handled.size(); ++k) {
      local.push_back(data.points[handled[k]]);
      spread = std::max(spread, (cached[k] - f0).cwiseAbs().maxCoeff());
    }
    const double t = 2.0 * spread + 1.0;
    AffineMap ell = separating_affine(local, 0, directions[step], t, data.d_out);
    AffineMap upper = ell.plus_constant(f0);
    AffineMap lower(-ell.weights(), f0 - ell.offset());

    for (std::size_t k = 0; k < handled.size(); ++k) {
      Vector after = apply_pair(cached[k], upper, lower, data.points[handled[k]]);
      if (opt.check_invariants && (after - cached[k]).cwiseAbs().maxCoeff() > 0.0) {
        throw InternalError("interpolation step disturbed a previously matched point");
      }
      cached[k] = std::move(after);
    }
    Vector at_s0 = eval_string(g, data.points[s0]);
    cached.push_back(apply_pair(at_s0, upper, lower, data.points[s0]));

    g.append(Op::Min, std::move(upper));
    g.append(Op::Max, std::move(lower));
    handled.push_back(s0);
  }
  return {std::move(g), std::move(order)};
}

}  // namespace narrow
