// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "egmmg/autodiff.hpp"
#include "egmmg/error.hpp"
#include "op_cases.hpp"
#include "test_support.hpp"

namespace egmmg::ad {
namespace {

using testing::random_matrix;

class OpGradient : public ::testing::TestWithParam<testing::OpCase> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  EXPECT_LT(testing::op_case_error(GetParam(), 25, 1), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::ValuesIn(testing::op_cases()),
                         [](const auto& info) { return info.param.name; });

TEST(Autodiff, SumGradientIsAllOnes) {
  Rng rng(1);
  Parameter x("x", random_matrix(rng, 3, 4));
  Tape t;
  t.backward(sum(t.parameter(x)));
  EXPECT_EQ(x.grad, Matrix::Ones(3, 4));
}

TEST(Autodiff, SecondBackwardDoublesGradients) {
  Rng rng(2);
  Parameter a("a", random_matrix(rng, 3, 2));
  Parameter b("b", random_matrix(rng, 2, 4));
  Tape t;
  auto loss = sum(matmul(t.parameter(a), t.parameter(b)));
  t.backward(loss);
  const Matrix once = a.grad;
  t.backward(loss);
  EXPECT_EQ(a.grad, 2.0 * once);
  a.zero_grad();
  EXPECT_EQ(a.grad, Matrix::Zero(3, 2));
}

TEST(Autodiff, NonScalarBackwardThrows) {
  Parameter x("x", Matrix::Ones(2, 2));
  Tape t;
  auto v = t.parameter(x);
  EXPECT_ANY_THROW(t.backward(v));
}

TEST(Autodiff, ShapeMismatchThrows) {
  Tape t;
  auto a = t.constant(Matrix::Ones(2, 3));
  auto b = t.constant(Matrix::Ones(2, 3));
  EXPECT_ANY_THROW(matmul(a, b));
  EXPECT_ANY_THROW(add(a, t.constant(Matrix::Ones(3, 2))));
}

TEST(Autodiff, NonFiniteValueIsANumericError) {
  Tape t;
  Matrix m = Matrix::Ones(1, 1);
  m(0, 0) = std::numeric_limits<double>::infinity();
  auto a = t.constant(Matrix::Ones(1, 1));
  EXPECT_THROW(scale(a, std::numeric_limits<double>::infinity()), NumericError);
}

TEST(Autodiff, ConstantsReceiveNoParameterGradient) {
  Parameter frozen("f", Matrix::Ones(2, 2), false);
  Tape t;
  t.backward(sum(t.parameter(frozen)));
  EXPECT_EQ(frozen.grad, Matrix::Zero(2, 2));
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix x = random_matrix(rng, 4, 6, -30.0, 30.0);
    Tape t;
    const Matrix p = row_softmax(t.constant(x)).value();
    for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
    const Matrix q = row_softmax(t.constant((x.array() + 7.5).matrix())).value();
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Softmax, SegmentsNormalizeIndependently) {
  Rng rng(4);
  const std::vector<std::size_t> seg{0, 1, 0, 2, 1, 0};
  Tape t;
  const Matrix p = segment_softmax(t.constant(random_matrix(rng, 6, 2)), seg, 4).value();
  for (Eigen::Index h = 0; h < 2; ++h) {
    double s0 = 0, s1 = 0, s2 = 0;
    for (std::size_t e = 0; e < seg.size(); ++e) {
      (seg[e] == 0 ? s0 : seg[e] == 1 ? s1 : s2) += p(static_cast<Eigen::Index>(e), h);
    }
    EXPECT_NEAR(s0, 1.0, 1e-12);
    EXPECT_NEAR(s1, 1.0, 1e-12);
    EXPECT_NEAR(s2, 1.0, 1e-12);
  }
}

TEST(Sigmoid, ValueAndSlopeAtZero) {
  Parameter x("x", Matrix::Zero(1, 1));
  Tape t;
  auto s = sigmoid(t.parameter(x));
  EXPECT_DOUBLE_EQ(s.item(), 0.5);
  t.backward(sum(s));
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 0.25);
}

TEST(Bce, HalfAgainstOneIsLn2) {
  Tape t;
  const std::vector<double> y{1.0};
  EXPECT_NEAR(bce_loss(t.constant(Matrix::Constant(1, 1, 0.5)), y).item(), std::log(2.0), 1e-15);
}

TEST(Bce, ClampsExtremePredictions) {
  Tape t;
  const std::vector<double> y{1.0};
  const double v = bce_loss(t.constant(Matrix::Zero(1, 1)), y).item();
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -std::log(1e-7), 1e-9);
}

TEST(MeanRows, EmptySegmentIsZero) {
  Tape t;
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const std::vector<std::size_t> seg{0, 0, 2};
  const Matrix m = mean_rows(t.constant(x), seg, 3).value();
  EXPECT_EQ(m.row(0), (Eigen::RowVector2d(2, 3)));
  EXPECT_EQ(m.row(1), (Eigen::RowVector2d(0, 0)));
  EXPECT_EQ(m.row(2), (Eigen::RowVector2d(5, 6)));
}

TEST(Elu, ValuesOnBothSides) {
  Tape t;
  Matrix x(1, 3);
  x << -1.0, 0.0, 2.0;
  const Matrix y = elu(t.constant(x)).value();
  EXPECT_DOUBLE_EQ(y(0, 0), std::exp(-1.0) - 1.0);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(y(0, 2), 2.0);
  const Matrix z = leaky_relu(t.constant(x)).value();
  EXPECT_DOUBLE_EQ(z(0, 0), -0.2);
  EXPECT_DOUBLE_EQ(z(0, 2), 2.0);
}

}  // namespace
}  // namespace egmmg::ad
