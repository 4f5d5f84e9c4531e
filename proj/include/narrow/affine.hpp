#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "narrow/error.hpp"

namespace narrow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Target functions R^d_in -> R^d_out.
using Function = std::function<Vector(const Vector&)>;

struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-9;

  bool close(double a, double b) const {
    return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
  }
};

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(want) +
                       ", got " + std::to_string(got));
  }
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// x -> W x + b.
class AffineMap {
 public:
  AffineMap() = default;

  AffineMap(Matrix weights, Vector offset) : weights_(std::move(weights)), offset_(std::move(offset)) {
    require_dim(offset_.size(), weights_.rows(), "AffineMap offset");
  }

  static AffineMap constant(Eigen::Index d_in, const Vector& value) {
    return AffineMap(Matrix::Zero(value.size(), d_in), value);
  }

  static AffineMap identity(Eigen::Index d) { return AffineMap(Matrix::Identity(d, d), Vector::Zero(d)); }

  Eigen::Index rows() const { return weights_.rows(); }
  Eigen::Index cols() const { return weights_.cols(); }
  const Matrix& weights() const { return weights_; }
  const Vector& offset() const { return offset_; }

  Vector operator()(const Vector& x) const {
    require_dim(x.size(), cols(), "eval_affine input");
    return weights_ * x + offset_;
  }

  // this ∘ inner
  AffineMap compose(const AffineMap& inner) const {
    require_dim(inner.rows(), cols(), "AffineMap::compose");
    return AffineMap(weights_ * inner.weights_, weights_ * inner.offset_ + offset_);
  }

  // x -> this(x - x0)
  AffineMap shifted(const Vector& x0) const {
    require_dim(x0.size(), cols(), "AffineMap::shifted");
    return AffineMap(weights_, offset_ - weights_ * x0);
  }

  AffineMap plus_constant(const Vector& c) const {
    require_dim(c.size(), rows(), "AffineMap::plus_constant");
    return AffineMap(weights_, offset_ + c);
  }

  // Spectral norm of the linear part.
  double operator_norm() const {
    if (weights_.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(weights_);
    return svd.singularValues()(0);
  }

  bool operator==(const AffineMap& o) const {
    return weights_.rows() == o.weights_.rows() && weights_.cols() == o.weights_.cols() &&
           weights_ == o.weights_ && offset_ == o.offset_;
  }

 private:
  Matrix weights_;
  Vector offset_;
};

inline Vector eval_affine(const AffineMap& m, const Vector& x) { return m(x); }

struct Ball {
  Vector center;
  double radius = 0.0;

  Ball() = default;
  Ball(Vector c, double r) : center(std::move(c)), radius(r) {
    if (!std::isfinite(r) || r < 0.0) throw InvalidInput("Ball radius must be finite and nonnegative");
    if (!center.allFinite()) throw InvalidInput("Ball center must be finite");
  }

  Eigen::Index dim() const { return center.size(); }
  bool contains(const Vector& x, double slack = 0.0) const { return (x - center).norm() <= radius + slack; }

  // Circumscribed ball of the axis-aligned box [lo, hi].
  static Ball around_box(const Vector& lo, const Vector& hi) {
    require_dim(hi.size(), lo.size(), "box bounds");
    if ((hi.array() < lo.array()).any()) throw InvalidInput("box has hi < lo");
    return Ball(0.5 * (lo + hi), 0.5 * (hi - lo).norm());
  }
};

// Minimum of each output component of m over the ball: m_k(c) - r * |row_k|.
inline Vector affine_min_over_ball(const AffineMap& m, const Ball& ball) {
  Vector at_center = m(ball.center);
  Vector row_norms = m.weights().rowwise().norm();
  return at_center - ball.radius * row_norms;
}

}  // namespace narrow
