#include "temarl/kv_config.h"

#include <sstream>

#include <gtest/gtest.h>

#include "temarl/errors.h"

namespace temarl {
namespace {

TEST(KeyValueConfig, ParsesCommentsBlanksAndOverrides) {
  std::stringstream in(
      "# experiment\n"
      "\n"
      "beta = 0.5   # trailing comment\n"
      "method=empowerment\n"
      "seeds = 0, 1,2\n"
      "beta = 0.25\n"
      "flag = yes\n");
  const KeyValueConfig kv = KeyValueConfig::Parse(in);
  EXPECT_DOUBLE_EQ(kv.get_double("beta", 1.0), 0.25);
  EXPECT_EQ(kv.get_string("method", ""), "empowerment");
  EXPECT_EQ(kv.get_int_list("seeds", {}), (std::vector<long>{0, 1, 2}));
  EXPECT_TRUE(kv.get_bool("flag", false));
  EXPECT_EQ(kv.get_int("missing", 42), 42);
}

TEST(KeyValueConfig, RejectsMalformedValues) {
  std::stringstream in("a = 1.5x\nb = 2.5\nc = maybe\n");
  const KeyValueConfig kv = KeyValueConfig::Parse(in);
  EXPECT_THROW(kv.get_double("a", 0.0), ContractViolation);
  EXPECT_THROW(kv.get_int("b", 0), ContractViolation);
  EXPECT_THROW(kv.get_bool("c", false), ContractViolation);
  std::stringstream bad("no equals sign\n");
  EXPECT_THROW(KeyValueConfig::Parse(bad), ContractViolation);
  EXPECT_THROW(ParseIntList("1,x"), ContractViolation);
}

}  // namespace
}  // namespace temarl
