#include "temarl/checkpoint.h"

#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "temarl/dense_net.h"
#include "temarl/errors.h"

namespace temarl {
namespace {

TEST(Checkpoint, RoundTripIsBitExact) {
  Checkpoint c;
  c.meta["scenario"] = "hard";
  c.meta["note"] = "two words";
  Matrix m(2, 3);
  m << 0.1, -1.0 / 3.0, std::numeric_limits<double>::denorm_min(), 1e308, -0.0, std::nextafter(1.0, 2.0);
  c.arrays["m"] = m;
  c.arrays["empty"] = Matrix(0, 4);
  std::stringstream ss;
  WriteCheckpoint(ss, c);
  const Checkpoint r = ReadCheckpoint(ss);
  EXPECT_EQ(r.meta, c.meta);
  ASSERT_EQ(r.arrays.count("m"), 1u);
  const Matrix& back = r.arrays.at("m");
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    EXPECT_EQ(std::signbit(back.data()[i]), std::signbit(m.data()[i]));
    EXPECT_EQ(back.data()[i], m.data()[i]);
  }
  EXPECT_EQ(r.arrays.at("empty").cols(), 4);
}

TEST(Checkpoint, NetRoundTripRestoresOutputs) {
  Rng rng(1);
  DenseNet a("a", {3, 7, 2}, Activation::kRelu, Activation::kIdentity, rng);
  DenseNet b("b", {3, 7, 2}, Activation::kRelu, Activation::kIdentity, rng);
  Checkpoint c;
  c.put_net("agent0.actor", a);
  std::stringstream ss;
  WriteCheckpoint(ss, c);
  const Checkpoint r = ReadCheckpoint(ss);
  ASSERT_TRUE(r.has_net("agent0.actor"));
  r.get_net("agent0.actor", b);
  const Matrix x = Matrix::Random(4, 3);
  EXPECT_EQ(a.forward(x), b.forward(x));
}

TEST(Checkpoint, ShapeMismatchAndMissingArraysAreReported) {
  Rng rng(2);
  DenseNet a("a", {3, 7, 2}, Activation::kRelu, Activation::kIdentity, rng);
  DenseNet wide("w", {3, 8, 2}, Activation::kRelu, Activation::kIdentity, rng);
  Checkpoint c;
  c.put_net("x", a);
  EXPECT_THROW(c.get_net("x", wide), ContractViolation);
  EXPECT_THROW(c.get_net("y", a), ContractViolation);
  EXPECT_THROW(c.meta_at("missing"), ContractViolation);
}

TEST(Checkpoint, MalformedInputIsRejected) {
  std::stringstream bad1("not-a-checkpoint 1\n");
  EXPECT_THROW(ReadCheckpoint(bad1), ContractViolation);
  std::stringstream bad2("temarl-checkpoint 1\narray m 2 2\n0x1p+0 0x1p+0 0x1p+0\n");
  EXPECT_THROW(ReadCheckpoint(bad2), ContractViolation);
  std::stringstream bad3("temarl-checkpoint 1\narray m 1 1\nabc\n");
  EXPECT_THROW(ReadCheckpoint(bad3), ContractViolation);
}

}  // namespace
}  // namespace temarl
