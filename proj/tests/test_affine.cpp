#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace narrow;
using narrow::testing::vec;

TEST(EvalAffine, IdentityPassesInputThrough) {
  const AffineMap id(Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_EQ(eval_affine(id, vec({3, 4})), vec({3, 4}));
}

TEST(EvalAffine, RowTimesInputPlusOffset) {
  Matrix w(1, 2);
  w << 1, 2;
  EXPECT_EQ(eval_affine(AffineMap(w, vec({-1})), vec({1, 1})), vec({2}));
}

TEST(EvalAffine, ZeroMatrixIsConstant) {
  const AffineMap c(Matrix::Zero(1, 3), vec({7}));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(eval_affine(c, narrow::testing::uniform_vector(3, -9, 9, rng)), vec({7}));
}

TEST(EvalAffine, RejectsWrongInputDimension) {
  EXPECT_THROW(eval_affine(AffineMap::identity(2), vec({1, 2, 3})), InvalidInput);
  EXPECT_THROW(AffineMap(Matrix::Zero(2, 2), vec({1})), InvalidInput);
}

TEST(AffineMap, ComposeAndShift) {
  std::mt19937_64 rng(2);
  const auto a = narrow::testing::random_affine(2, 3, rng);
  const auto b = narrow::testing::random_affine(3, 3, rng);
  const Vector x = narrow::testing::uniform_vector(3, -1, 1, rng);
  const Vector x0 = narrow::testing::uniform_vector(3, -1, 1, rng);
  EXPECT_LT((a.compose(b)(x) - a(b(x))).norm(), 1e-12);
  EXPECT_LT((a.shifted(x0)(x) - a(x - x0)).norm(), 1e-12);
}

TEST(AffineMinOverBall, MatchesClosedForm) {
  Matrix w(1, 2);
  w << 3, 4;
  const Ball ball(vec({1, 1}), 2.0);
  // 3 + 4 + 1 - 2 * 5
  EXPECT_DOUBLE_EQ(affine_min_over_ball(AffineMap(w, vec({1})), ball)[0], -2.0);
}

TEST(EvalString, ConstantStringOfLengthOne) {
  const auto g = MaxMinString::constant(2, vec({5}));
  EXPECT_EQ(g.length(), 1u);
  EXPECT_EQ(eval_string(g, vec({0.1, -3})), vec({5}));
  EXPECT_EQ(eval_string(g, vec({100, 2})), vec({5}));
}

TEST(EvalString, MaxOfIdentityAndHalf) {
  const MaxMinString g(1, 1, {AffineMap(Matrix::Ones(1, 1), vec({0})), AffineMap(Matrix::Zero(1, 1), vec({0.5}))},
                       {Op::Max});
  EXPECT_EQ(eval_string(g, vec({0.25}))[0], 0.5);
  EXPECT_EQ(eval_string(g, vec({0.75}))[0], 0.75);
}

TEST(EvalString, MinOfTwoCoordinates) {
  Matrix e1(1, 2), e2(1, 2);
  e1 << 1, 0;
  e2 << 0, 1;
  const MaxMinString g(2, 1, {AffineMap(e1, vec({0})), AffineMap(e2, vec({0}))}, {Op::Min});
  EXPECT_EQ(eval_string(g, vec({0.3, 0.7}))[0], 0.3);
}

TEST(EvalString, LeftFoldOrder) {
  // min(max(x, 0), 1) clamps to [0, 1]; the other nesting max(min(x,1),0) agrees,
  // but max(min(0, x), 1) would be constant 1.
  const auto x = AffineMap(Matrix::Ones(1, 1), vec({0}));
  const auto zero = AffineMap::constant(1, vec({0}));
  const auto one = AffineMap::constant(1, vec({1}));
  const MaxMinString clamp(1, 1, {x, zero, one}, {Op::Max, Op::Min});
  EXPECT_EQ(eval_string(clamp, vec({-2}))[0], 0.0);
  EXPECT_EQ(eval_string(clamp, vec({0.4}))[0], 0.4);
  EXPECT_EQ(eval_string(clamp, vec({3}))[0], 1.0);
  const MaxMinString other(1, 1, {zero, x, one}, {Op::Min, Op::Max});
  EXPECT_EQ(eval_string(other, vec({0.4}))[0], 1.0);
}

TEST(EvalString, ValueIsOneOfThePiecesPerComponent) {
  std::mt19937_64 rng(3);
  const auto g = narrow::testing::random_string(2, 2, 12, rng);
  for (int t = 0; t < 200; ++t) {
    const Vector x = narrow::testing::uniform_vector(2, -2, 2, rng);
    const Vector y = eval_string(g, x);
    for (Eigen::Index k = 0; k < 2; ++k) {
      bool hit = false;
      for (const auto& a : g.affines()) hit = hit || a(x)[k] == y[k];
      EXPECT_TRUE(hit);
    }
  }
}

TEST(EvalString, TranslationCovariance) {
  std::mt19937_64 rng(4);
  const auto g = narrow::testing::random_string(3, 1, 9, rng);
  const Vector x0 = narrow::testing::uniform_vector(3, -1, 1, rng);
  const auto moved = g.shifted(x0);
  for (int t = 0; t < 100; ++t) {
    const Vector x = narrow::testing::uniform_vector(3, -2, 2, rng);
    EXPECT_NEAR(eval_string(moved, x)[0], eval_string(g, x - x0)[0], 1e-12);
  }
}

TEST(StringShape, RejectsMismatchedOpsAndShapes) {
  const auto a = AffineMap::constant(2, vec({1}));
  EXPECT_THROW(MaxMinString(2, 1, {a, a}, {}), InvalidInput);
  EXPECT_THROW(MaxMinString(2, 1, {}, {}), InvalidInput);
  EXPECT_THROW(MaxMinString(3, 1, {a}, {}), InvalidInput);
  EXPECT_THROW(op_from_string("avg"), InvalidInput);
}

TEST(BatchEvaluator, AgreesWithPointwiseEvaluation) {
  std::mt19937_64 rng(5);
  const auto g = narrow::testing::random_string(2, 2, 37, rng);
  Matrix pts(2, 1000);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i) = narrow::testing::uniform_vector(2, -3, 3, rng);
  const Matrix got = StringBatchEvaluator(g)(pts);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Vector want = eval_string(g, pts.col(i));
    EXPECT_NEAR((got.col(i) - want).cwiseAbs().maxCoeff(), 0.0, 1e-12 * (1 + want.cwiseAbs().maxCoeff()));
  }
}

TEST(LipschitzBound, ConstantIsZeroAndIdentityIsOne) {
  EXPECT_EQ(lipschitz_bound(MaxMinString::constant(3, vec({2}))), 0.0);
  const MaxMinString id(2, 2, {AffineMap::identity(2)}, {});
  EXPECT_DOUBLE_EQ(lipschitz_bound(id), std::sqrt(2.0));  // row-norm bound, Frobenius for vector output
  EXPECT_DOUBLE_EQ(max_operator_norm(id), 1.0);
  const MaxMinString scalar(1, 1, {AffineMap(Matrix::Ones(1, 1), vec({0}))}, {});
  EXPECT_DOUBLE_EQ(lipschitz_bound(scalar), 1.0);
}

TEST(LipschitzBound, NormsTwoAndThreeGiveThreeAndHoldOnSamples) {
  Matrix a(1, 2), b(1, 2);
  a << 2, 0;
  b << 0, 3;
  const MaxMinString g(2, 1, {AffineMap(a, vec({0.1})), AffineMap(b, vec({-0.2}))}, {Op::Max});
  const double bound = lipschitz_bound(g);
  EXPECT_DOUBLE_EQ(bound, 3.0);
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Vector x = narrow::testing::uniform_vector(2, -1, 1, rng);
    const Vector y = narrow::testing::uniform_vector(2, -1, 1, rng);
    worst = std::max(worst, std::abs(eval_string(g, x)[0] - eval_string(g, y)[0]) / (x - y).norm());
  }
  EXPECT_LE(worst, 3.0 + 1e-12);
  EXPECT_GT(worst, 2.0);  // the ratio does exceed the smaller norm somewhere
}

TEST(StringJson, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto g = narrow::testing::random_string(1 + t % 3, 1 + t % 2, 1 + t, rng);
    const auto back = deserialize_string(serialize_string(g));
    EXPECT_TRUE(back == g);
    EXPECT_EQ(serialize_string(back), serialize_string(g));
  }
}

TEST(StringJson, SchemaErrors) {
  EXPECT_THROW(deserialize_string("{"), SchemaError);
  EXPECT_THROW(deserialize_string(R"({"version":2,"d_in":1,"d_out":1,"affines":[],"ops":[]})"), SchemaError);
  EXPECT_THROW(deserialize_string(R"({"version":1,"d_in":1,"d_out":1,"affines":[{"W":[[1]],"b":[0]}],"ops":["max"]})"),
               SchemaError);
  EXPECT_THROW(deserialize_string(R"({"version":1,"d_in":2,"d_out":1,"affines":[{"W":[[1]],"b":[0]}],"ops":[]})"),
               SchemaError);
}

TEST(StringJson, NonFiniteCoefficientsAreRejectedOnWrite) {
  const auto g = MaxMinString::constant(1, vec({std::numeric_limits<double>::quiet_NaN()}));
  EXPECT_THROW(serialize_string(g), NumericError);
}
