#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "narrow/max_min_string.hpp"
#include "narrow/modulus.hpp"
#include "narrow/relu_net.hpp"

namespace narrow {

struct Box {
  Vector lo;
  Vector hi;

  Box(Vector l, Vector h) : lo(std::move(l)), hi(std::move(h)) {
    require_dim(hi.size(), lo.size(), "box bounds");
    if (lo.size() < 1) throw InvalidInput("box needs at least one dimension");
    if ((hi.array() < lo.array()).any()) throw InvalidInput("box has hi < lo");
  }

  Eigen::Index dim() const { return lo.size(); }
  Ball enclosing_ball() const { return Ball::around_box(lo, hi); }
};

// Default verification grid per axis: 10^4 points in 1-d, 200^2 in 2-d, 40^3 in 3-d.
inline std::size_t default_grid_size(Eigen::Index d) {
  switch (d) {
    case 1: return 10000;
    case 2: return 200;
    case 3: return 40;
    default: return 10;
  }
}

// Tensor grid with n points per axis (endpoints included). Returns d x n^d.
inline Matrix grid_points(const Box& box, std::size_t n) {
  if (n < 2) throw InvalidInput("grid needs at least 2 points per axis");
  const auto d = box.dim();
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < d; ++i) total *= n;
  Matrix pts(d, static_cast<Eigen::Index>(total));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t p = 0; p < total; ++p) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double t = static_cast<double>(idx[static_cast<std::size_t>(i)]) / static_cast<double>(n - 1);
      pts(i, static_cast<Eigen::Index>(p)) = box.lo[i] + t * (box.hi[i] - box.lo[i]);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
  return pts;
}

inline double grid_spacing(const Box& box, std::size_t n) {
  return (box.hi - box.lo).maxCoeff() / static_cast<double>(n - 1);
}

struct GridReport {
  double max_error = 0.0;
  double mean_error = 0.0;
  double spacing = 0.0;
  std::size_t points = 0;
  Vector worst_point;
  Matrix inputs;         // d x N
  Vector errors;         // per point, sup norm over output components
};

namespace detail {

inline Matrix eval_target(const Function& f, const Matrix& pts, Eigen::Index d_out) {
  Matrix out(d_out, pts.cols());
  for (Eigen::Index p = 0; p < pts.cols(); ++p) {
    Vector y = checked_eval(f, pts.col(p));
    require_dim(y.size(), d_out, "target output");
    out.col(p) = y;
  }
  return out;
}

inline GridReport summarize(const Matrix& pts, const Matrix& want, const Matrix& got, double spacing) {
  GridReport rep;
  rep.spacing = spacing;
  rep.points = static_cast<std::size_t>(pts.cols());
  rep.errors = (want - got).cwiseAbs().colwise().maxCoeff().transpose();
  Eigen::Index arg = 0;
  rep.max_error = rep.errors.size() ? rep.errors.maxCoeff(&arg) : 0.0;
  rep.mean_error = rep.errors.size() ? rep.errors.mean() : 0.0;
  rep.worst_point = pts.col(arg);
  rep.inputs = pts;
  return rep;
}

}  // namespace detail

inline GridReport string_grid_error(const MaxMinString& g, const Function& f, const Box& box, std::size_t n) {
  require_dim(box.dim(), g.d_in(), "grid box");
  const Matrix pts = grid_points(box, n);
  const Matrix got = StringBatchEvaluator(g)(pts);
  const Matrix want = detail::eval_target(f, pts, g.d_out());
  return detail::summarize(pts, want, got, grid_spacing(box, n));
}

inline GridReport net_grid_error(const ReluNet& net, const Function& f, const Box& box, std::size_t n) {
  require_dim(box.dim(), net.d_in(), "grid box");
  const Matrix pts = grid_points(box, n);
  Matrix got(net.d_out(), pts.cols());
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index s = 0; s < pts.cols(); s += kChunk) {
    const Eigen::Index m = std::min(kChunk, pts.cols() - s);
    got.middleCols(s, m) = forward_batch(net, pts.middleCols(s, m));
  }
  const Matrix want = detail::eval_target(f, pts, net.d_out());
  return detail::summarize(pts, want, got, grid_spacing(box, n));
}

// Additive allowance for measuring a sup norm on a grid of spacing h: omega(h).
inline double grid_slack(const ModulusSpec& spec, double h) { return modulus_at(spec, h); }

}  // namespace narrow
