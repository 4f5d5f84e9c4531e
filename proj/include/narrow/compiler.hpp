#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "narrow/max_min_string.hpp"
#include "narrow/modulus.hpp"
#include "narrow/relu_net.hpp"

namespace narrow {

// How a string is lowered onto a width d_in + d_out net. The hidden state is
// (x + shift, y) where y carries the running max-min value.
struct CompilationPlan {
  Ball domain;
  Vector input_shift;           // moves the domain ball into the positive orthant
  Vector output_constant;       // C, added to every affine and removed at the end
  std::vector<Vector> certified_minimum;  // min over the ball of l_i + C, per affine
};

inline CompilationPlan plan_compilation(const MaxMinString& g, const Ball& domain, double margin = 1e-6) {
  require_dim(domain.dim(), g.d_in(), "compile domain");
  CompilationPlan plan;
  plan.domain = domain;
  plan.input_shift = Vector::Constant(g.d_in(), domain.radius) - domain.center;

  // One constant per output component shared by all affines: adding it to each
  // l_i adds it to g, so a single subtraction at the end restores g.
  Vector need = Vector::Zero(g.d_out());
  for (const auto& a : g.affines()) need = need.cwiseMax(-affine_min_over_ball(a, domain));
  plan.output_constant = need.array() + margin;

  for (const auto& a : g.affines()) {
    Vector lo = affine_min_over_ball(a.plus_constant(plan.output_constant), domain);
    if ((lo.array() < 0.0).any()) throw InternalError("nonnegativity certificate failed for a shifted affine");
    plan.certified_minimum.push_back(std::move(lo));
  }
  const Vector shifted_lo = domain.center + plan.input_shift - Vector::Constant(g.d_in(), domain.radius);
  if ((shifted_lo.array() < -1e-12 * (1.0 + domain.radius)).any()) {
    throw InternalError("shifted domain is not inside the positive orthant");
  }
  return plan;
}

namespace detail {

// Block map on (x, y): MAX pre: (x, y - l(x)); MIN pre/post: (x, l(x) - y);
// MAX post: (x, y + l(x)). Here l is already expressed in shifted inputs.
inline AffineMap register_map(Op op, bool pre, const Matrix& w, const Vector& beta) {
  const auto d_in = w.cols();
  const auto d_out = w.rows();
  const auto width = d_in + d_out;
  Matrix m = Matrix::Zero(width, width);
  Vector c = Vector::Zero(width);
  m.topLeftCorner(d_in, d_in).setIdentity();
  if (op == Op::Min) {
    m.bottomLeftCorner(d_out, d_in) = w;
    m.bottomRightCorner(d_out, d_out) = -Matrix::Identity(d_out, d_out);
    c.tail(d_out) = beta;
  } else if (pre) {
    m.bottomLeftCorner(d_out, d_in) = -w;
    m.bottomRightCorner(d_out, d_out).setIdentity();
    c.tail(d_out) = -beta;
  } else {
    m.bottomLeftCorner(d_out, d_in) = w;
    m.bottomRightCorner(d_out, d_out).setIdentity();
    c.tail(d_out) = beta;
  }
  return AffineMap(std::move(m), std::move(c));
}

}  // namespace detail

// Net with depth L (= string length) whose L-1 hidden layers all have width
// d_in + d_out and which equals g on the domain ball. Layer j wraps
// ReLU between the pre map of l_{j+1} and the post map of l_j:
//   max(y, l) = l + ReLU(y - l),   min(y, l) = l - ReLU(l - y),
// while the shifted input rides along untouched because it is nonnegative.
inline ReluNet compile(const MaxMinString& g, const Ball& domain, CompilationPlan* plan_out = nullptr) {
  CompilationPlan plan = plan_compilation(g, domain);
  const auto d_in = g.d_in();
  const auto d_out = g.d_out();
  const auto width = d_in + d_out;
  const Vector& s = plan.input_shift;
  const Vector& big_c = plan.output_constant;
  const auto& affines = g.affines();
  const auto& ops = g.ops();

  // l_j in shifted coordinates plus C: x~ -> W_j x~ + beta_j.
  auto beta = [&](std::size_t j) -> Vector { return affines[j].offset() - affines[j].weights() * s + big_c; };

  Matrix lift_m(width, d_in);
  lift_m.topRows(d_in).setIdentity();
  lift_m.bottomRows(d_out) = affines[0].weights();
  Vector lift_c(width);
  lift_c.head(d_in) = s;
  lift_c.tail(d_out) = affines[0].offset() + big_c;
  AffineMap lift(std::move(lift_m), std::move(lift_c));

  Matrix proj_m = Matrix::Zero(d_out, width);
  proj_m.rightCols(d_out).setIdentity();
  AffineMap project(std::move(proj_m), -big_c);

  std::vector<AffineMap> layers;
  layers.reserve(affines.size());
  if (affines.size() == 1) {
    layers.push_back(project.compose(lift));
  } else {
    AffineMap carry = lift;
    for (std::size_t j = 1; j < affines.size(); ++j) {
      AffineMap pre = detail::register_map(ops[j - 1], true, affines[j].weights(), beta(j));
      layers.push_back(pre.compose(carry));
      carry = detail::register_map(ops[j - 1], false, affines[j].weights(), beta(j));
    }
    layers.push_back(project.compose(carry));
  }

  ReluNet::Meta meta;
  meta.provenance = "compiled from max-min string of length " + std::to_string(g.length());
  meta.domain = domain;
  if (plan_out) *plan_out = plan;
  return ReluNet(std::move(layers), std::move(meta));
}

struct CompilationReport {
  double max_deviation = 0.0;
  double scale = 0.0;  // max |g| over the samples
  double tolerance = 0.0;
  std::size_t samples = 0;
  std::size_t depth = 0;
  std::size_t string_length = 0;
  std::vector<Eigen::Index> hidden_widths;
  bool widths_ok = false;
  bool depth_ok = false;
  bool values_ok = false;

  bool ok() const { return widths_ok && depth_ok && values_ok; }
};

inline CompilationReport verify_compilation(const ReluNet& net, const MaxMinString& g, const Ball& domain,
                                            std::size_t n_samples, std::uint64_t seed = 0,
                                            double rel_tolerance = 1e-9) {
  require_dim(net.d_in(), g.d_in(), "verify_compilation d_in");
  require_dim(net.d_out(), g.d_out(), "verify_compilation d_out");
  CompilationReport rep;
  rep.samples = n_samples;
  rep.depth = net.depth();
  rep.string_length = g.length();
  rep.hidden_widths = net.hidden_widths();
  rep.widths_ok = std::all_of(rep.hidden_widths.begin(), rep.hidden_widths.end(),
                              [&](Eigen::Index wdt) { return wdt == g.d_in() + g.d_out(); });
  rep.depth_ok = rep.depth == g.length();

  std::mt19937_64 rng(seed);
  Matrix pts(g.d_in(), static_cast<Eigen::Index>(n_samples));
  for (std::size_t i = 0; i < n_samples; ++i) pts.col(static_cast<Eigen::Index>(i)) = detail::random_in_ball(domain, rng);
  if (n_samples > 0) {
    const Matrix want = StringBatchEvaluator(g)(pts);
    const Matrix got = forward_batch(net, pts);
    rep.max_deviation = (want - got).cwiseAbs().maxCoeff();
    rep.scale = want.cwiseAbs().maxCoeff();
  }
  rep.tolerance = rel_tolerance * (1.0 + rep.scale);
  rep.values_ok = rep.max_deviation <= rep.tolerance;
  return rep;
}

}  // namespace narrow
