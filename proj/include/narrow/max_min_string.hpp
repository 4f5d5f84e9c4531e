#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "narrow/affine.hpp"

namespace narrow {

enum class Op { Max, Min };

inline std::string_view to_string(Op op) { return op == Op::Max ? "max" : "min"; }

inline Op op_from_string(std::string_view s) {
  if (s == "max") return Op::Max;
  if (s == "min") return Op::Min;
  throw SchemaError("unknown string op '" + std::string(s) + "'");
}

// g = op_{L-1}(l_L, op_{L-2}(l_{L-1}, ... op_1(l_1, l_2) ...)), coordinate-wise.
// The nesting is left-deep, so the flat (affines, ops) form loses nothing:
// evaluation is a left fold acc <- op_j(acc, l_{j+1}(x)).
class MaxMinString {
 public:
  MaxMinString(Eigen::Index d_in, Eigen::Index d_out, std::vector<AffineMap> affines, std::vector<Op> ops)
      : d_in_(d_in), d_out_(d_out), affines_(std::move(affines)), ops_(std::move(ops)) {
    if (d_in_ < 1 || d_out_ < 1) throw InvalidInput("max-min string needs d_in, d_out >= 1");
    if (affines_.empty()) throw InvalidInput("max-min string needs at least one affine map");
    if (ops_.size() + 1 != affines_.size()) {
      throw InvalidInput("max-min string needs exactly L-1 ops for L affine maps");
    }
    for (const auto& a : affines_) {
      if (a.cols() != d_in_ || a.rows() != d_out_) throw InvalidInput("max-min string affine has wrong shape");
    }
  }

  static MaxMinString constant(Eigen::Index d_in, const Vector& value) {
    return MaxMinString(d_in, value.size(), {AffineMap::constant(d_in, value)}, {});
  }

  Eigen::Index d_in() const { return d_in_; }
  Eigen::Index d_out() const { return d_out_; }
  std::size_t length() const { return affines_.size(); }
  const std::vector<AffineMap>& affines() const { return affines_; }
  const std::vector<Op>& ops() const { return ops_; }

  // g <- op(g, next)
  void append(Op op, AffineMap next) {
    if (next.cols() != d_in_ || next.rows() != d_out_) throw InvalidInput("appended affine has wrong shape");
    ops_.push_back(op);
    affines_.push_back(std::move(next));
  }

  // x -> g(x - x0)
  MaxMinString shifted(const Vector& x0) const {
    std::vector<AffineMap> moved;
    moved.reserve(affines_.size());
    for (const auto& a : affines_) moved.push_back(a.shifted(x0));
    return MaxMinString(d_in_, d_out_, std::move(moved), ops_);
  }

  bool operator==(const MaxMinString& o) const {
    return d_in_ == o.d_in_ && d_out_ == o.d_out_ && affines_ == o.affines_ && ops_ == o.ops_;
  }

 private:
  Eigen::Index d_in_;
  Eigen::Index d_out_;
  std::vector<AffineMap> affines_;
  std::vector<Op> ops_;
};

inline double apply_op(Op op, double a, double b) { return op == Op::Max ? std::max(a, b) : std::min(a, b); }

inline Vector eval_string(const MaxMinString& g, const Vector& x) {
  require_dim(x.size(), g.d_in(), "eval_string input");
  const auto& affines = g.affines();
  const auto& ops = g.ops();
  Vector acc = affines[0](x);
  Vector next(g.d_out());
  for (std::size_t j = 1; j < affines.size(); ++j) {
    next.noalias() = affines[j].weights() * x;
    next += affines[j].offset();
    const Op op = ops[j - 1];
    for (Eigen::Index k = 0; k < acc.size(); ++k) acc[k] = apply_op(op, acc[k], next[k]);
  }
  return acc;
}

// Upper bound on the Euclidean Lipschitz constant of g. Each output component
// g_k is a lattice expression in the scalars l_{i,k}, so Lip(g_k) <= max_i |row_k(W_i)|;
// summing squares over k gives a bound for the vector map. For d_out = 1 this is
// exactly the largest operator norm among the linear parts.
inline double lipschitz_bound(const MaxMinString& g) {
  Vector worst_rows = Vector::Zero(g.d_out());
  for (const auto& a : g.affines()) {
    worst_rows = worst_rows.cwiseMax(a.weights().rowwise().norm());
  }
  return worst_rows.norm();
}

inline double max_operator_norm(const MaxMinString& g) {
  double best = 0.0;
  for (const auto& a : g.affines()) best = std::max(best, a.operator_norm());
  return best;
}

// Evaluates a string at many points at once. Coefficients are packed into one
// contiguous buffer and the fold runs affine-major over blocks of points, which
// is what makes sup-norm checks of strings with 10^5 pieces affordable.
class StringBatchEvaluator {
 public:
  explicit StringBatchEvaluator(const MaxMinString& g)
      : d_in_(g.d_in()), d_out_(g.d_out()), ops_(g.ops()) {
    const std::size_t stride = static_cast<std::size_t>(d_out_ * (d_in_ + 1));
    packed_.resize(stride * g.length());
    std::size_t pos = 0;
    for (const auto& a : g.affines()) {
      for (Eigen::Index k = 0; k < d_out_; ++k) {
        for (Eigen::Index i = 0; i < d_in_; ++i) packed_[pos++] = a.weights()(k, i);
        packed_[pos++] = a.offset()(k);
      }
    }
  }

  // points: d_in x N (one point per column). Returns d_out x N.
  Matrix operator()(const Matrix& points) const {
    require_dim(points.rows(), d_in_, "batch eval input");
    const Eigen::Index n = points.cols();
    Matrix out(d_out_, n);
    constexpr Eigen::Index kBlock = 256;
    std::vector<double> xs(static_cast<std::size_t>(d_in_ * kBlock));
    std::vector<double> acc(static_cast<std::size_t>(d_out_ * kBlock));
    std::vector<double> val(kBlock);
    const std::size_t length = ops_.size() + 1;
    for (Eigen::Index start = 0; start < n; start += kBlock) {
      const Eigen::Index m = std::min(kBlock, n - start);
      for (Eigen::Index p = 0; p < m; ++p) {
        for (Eigen::Index i = 0; i < d_in_; ++i) xs[i * kBlock + p] = points(i, start + p);
      }
      const double* coef = packed_.data();
      for (std::size_t j = 0; j < length; ++j) {
        for (Eigen::Index k = 0; k < d_out_; ++k) {
          const double b = coef[d_in_];
          for (Eigen::Index p = 0; p < m; ++p) val[p] = b;
          for (Eigen::Index i = 0; i < d_in_; ++i) {
            const double w = coef[i];
            const double* xi = &xs[i * kBlock];
            for (Eigen::Index p = 0; p < m; ++p) val[p] += w * xi[p];
          }
          double* a = &acc[k * kBlock];
          if (j == 0) {
            for (Eigen::Index p = 0; p < m; ++p) a[p] = val[p];
          } else if (ops_[j - 1] == Op::Max) {
            for (Eigen::Index p = 0; p < m; ++p) a[p] = std::max(a[p], val[p]);
          } else {
            for (Eigen::Index p = 0; p < m; ++p) a[p] = std::min(a[p], val[p]);
          }
          coef += d_in_ + 1;
        }
      }
      for (Eigen::Index p = 0; p < m; ++p) {
        for (Eigen::Index k = 0; k < d_out_; ++k) out(k, start + p) = acc[k * kBlock + p];
      }
    }
    return out;
  }

 private:
  Eigen::Index d_in_;
  Eigen::Index d_out_;
  std::vector<Op> ops_;
  std::vector<double> packed_;
};

}  // namespace narrow
