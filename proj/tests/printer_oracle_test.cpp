#include <gtest/gtest.h>

#include "oracle_ops.hpp"

TEST(PrinterOracle, ThousandRandomSequencesMatchReference) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const std::string divergence = oracle::run_case(seed);
    ASSERT_TRUE(divergence.empty()) << "seed " << seed << ": " << divergence;
  }
}

TEST(PrinterOracle, ReferenceModelSanity) {
  reference::Printer p({2, 1});
  EXPECT_EQ(p.submit("a\fb\fc\fd").consumed, 3);
  EXPECT_EQ(p.state, reference::State::OutOfPaper);
  EXPECT_EQ(p.reload(0, 5), 2);
  EXPECT_EQ(p.state, reference::State::Ready);
}
