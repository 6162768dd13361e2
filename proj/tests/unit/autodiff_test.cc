#include "temarl/autodiff.h"

#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "finite_difference.h"
#include "temarl/errors.h"
#include "temarl/random.h"

namespace temarl {
namespace {

using testing::CentralDifference;
using testing::RelativeError;

Matrix RandomMatrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Checks d/dparams of sum(build(tape, vars) .* weights) against central
// differences of the same expression.
void ExpectGradientMatches(std::vector<Parameter*> params, const std::function<Var(Tape&, std::vector<Var>&)>& build,
                           double tol = 1e-6) {
  Rng rng(17);
  Matrix weights;
  auto loss = [&](Tape& tape) {
    std::vector<Var> vars;
    for (Parameter* p : params) vars.push_back(tape.parameter(*p));
    Var out = build(tape, vars);
    if (weights.size() == 0) weights = RandomMatrix(tape.value(out).rows(), tape.value(out).cols(), rng);
    return tape.sum(tape.mul(out, tape.constant(weights)));
  };
  Tape tape;
  GradientMap grads = tape.backward(loss(tape));
  auto numeric = CentralDifference(
      [&] {
        Tape t;
        return t.scalar(loss(t));
      },
      params);
  EXPECT_LT(RelativeError(grads, params, numeric), tol);
}

class TapeOps : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(3);
    a.value = RandomMatrix(4, 3, rng);
    b.value = RandomMatrix(4, 3, rng);
    w.value = RandomMatrix(3, 5, rng);
    bias.value = RandomMatrix(1, 5, rng);
    col.value = RandomMatrix(4, 1, rng);
    positive.value = RandomMatrix(4, 3, rng, 0.5, 2.0);
  }
  Parameter a{"a", {}}, b{"b", {}}, w{"w", {}}, bias{"bias", {}}, col{"col", {}}, positive{"positive", {}};
};

TEST_F(TapeOps, MatmulAndAffine) {
  ExpectGradientMatches({&a, &w}, [](Tape& t, std::vector<Var>& v) { return t.matmul(v[0], v[1]); });
  ExpectGradientMatches({&a, &w, &bias}, [](Tape& t, std::vector<Var>& v) { return t.affine(v[0], v[1], v[2]); });
}

TEST_F(TapeOps, ElementwiseArithmetic) {
  ExpectGradientMatches({&a, &b}, [](Tape& t, std::vector<Var>& v) { return t.add(v[0], v[1]); });
  ExpectGradientMatches({&a, &b}, [](Tape& t, std::vector<Var>& v) { return t.sub(v[0], v[1]); });
  ExpectGradientMatches({&a, &b}, [](Tape& t, std::vector<Var>& v) { return t.mul(v[0], v[1]); });
  ExpectGradientMatches({&a, &col}, [](Tape& t, std::vector<Var>& v) { return t.mul_col(v[0], v[1]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.add_scalar(t.scale(v[0], -2.5), 1.0); });
}

TEST_F(TapeOps, Nonlinearities) {
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.relu(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.exp(v[0]); });
  ExpectGradientMatches({&positive}, [](Tape& t, std::vector<Var>& v) { return t.log(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.square(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.clamp(v[0], -0.5, 0.5); });
}

TEST_F(TapeOps, RowDistributions) {
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.softmax(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.log_softmax(v[0]); });
}

TEST_F(TapeOps, ReductionsAndReshaping) {
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.sum(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.mean(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.row_sum(v[0]); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) {
    const std::vector<int> cols = {2, 0, 1, 1};
    return t.pick(v[0], cols);
  });
  ExpectGradientMatches({&a, &b}, [](Tape& t, std::vector<Var>& v) {
    const std::vector<Var> parts = {v[0], v[1], v[0]};
    return t.concat_cols(parts);
  });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.slice_cols(v[0], 1, 2); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.slice_rows(v[0], 1, 3); });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) {
    const std::vector<int> rows = {3, 3, 0, 2, 0};
    return t.gather_rows(v[0], rows);
  });
  ExpectGradientMatches({&a}, [](Tape& t, std::vector<Var>& v) { return t.sum_row_groups(v[0], 2); });
}

TEST_F(TapeOps, ComposedExpressionReusesNodes) {
  ExpectGradientMatches({&a, &w, &bias}, [](Tape& t, std::vector<Var>& v) {
    Var h = t.relu(t.affine(v[0], v[1], v[2]));
    return t.mul(t.log_softmax(h), t.softmax(h));
  });
}

TEST(Tape, StraightThroughForwardsHardValueAndRoutesGradientToSoft) {
  Parameter p{"p", Matrix::Constant(1, 3, 0.2)};
  Tape tape;
  Var soft = tape.softmax(tape.parameter(p));
  Matrix hard = Matrix::Zero(1, 3);
  hard(0, 1) = 1.0;
  Var st = tape.straight_through(soft, hard);
  EXPECT_EQ(tape.value(st), hard);
  Matrix wts(1, 3);
  wts << 1.0, 2.0, 3.0;
  GradientMap g = tape.backward(tape.sum(tape.mul(st, tape.constant(wts))));

  Tape ref;
  Var s2 = ref.softmax(ref.parameter(p));
  GradientMap g2 = ref.backward(ref.sum(ref.mul(s2, ref.constant(wts))));
  EXPECT_TRUE(g.at(p).isApprox(g2.at(p), 1e-14));
}

TEST(Tape, StopGradientBlocksFlow) {
  Parameter p{"p", Matrix::Constant(2, 2, 0.7)};
  Tape tape;
  Var x = tape.parameter(p);
  Var y = tape.add(tape.stop_gradient(tape.square(x)), x);
  GradientMap g = tape.backward(tape.sum(y));
  EXPECT_TRUE(g.at(p).isApprox(Matrix::Ones(2, 2)));
}

TEST(Tape, UnreachedParametersHaveNoGradient) {
  Parameter used{"used", Matrix::Ones(1, 1)};
  Parameter unused{"unused", Matrix::Ones(1, 1)};
  Tape tape;
  Var x = tape.parameter(used);
  tape.parameter(unused);
  GradientMap g = tape.backward(tape.sum(x));
  EXPECT_TRUE(g.contains(used));
  EXPECT_FALSE(g.contains(unused));
  EXPECT_EQ(g.find(unused), nullptr);
}

TEST(Tape, BackwardRequiresScalarOutput) {
  Parameter p{"p", Matrix::Ones(2, 2)};
  Tape tape;
  Var x = tape.parameter(p);
  EXPECT_THROW(tape.backward(x), ContractViolation);
}

TEST(Tape, ShapeMismatchIsRejected) {
  Tape tape;
  Var a = tape.constant(Matrix::Ones(2, 3));
  Var b = tape.constant(Matrix::Ones(3, 2));
  EXPECT_THROW(tape.add(a, b), ContractViolation);
  EXPECT_THROW(tape.matmul(a, a), ContractViolation);
}

TEST(RowSoftmax, RowsSumToOneAndSurviveLargeLogits) {
  Matrix logits(3, 4);
  logits << 1000.0, 999.0, -1000.0, 0.0, 0.0, 0.0, 0.0, 0.0, -5.0, 3.0, 2.0, 1.0;
  const Matrix p = RowSoftmax(logits);
  ASSERT_TRUE(p.allFinite());
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
  EXPECT_NEAR(p(1, 2), 0.25, 1e-15);
  const Matrix lp = RowLogSoftmax(logits);
  EXPECT_TRUE(lp.array().exp().matrix().isApprox(p, 1e-12));
}

}  // namespace
}  // namespace temarl
