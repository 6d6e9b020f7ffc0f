#include "woi/rng.hpp"

#include "stats.hpp"

#include <gtest/gtest.h>

#include <set>

namespace woi {
namespace {

using Counter = Philox4x32::Counter;

// Known-answer vectors published with the reference Random123 implementation.
TEST(Philox, KnownAnswerZero) {
  Counter const out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  Counter const out = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                           {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  Counter const out = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                           {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, ReproducibleAndDisjoint) {
  RandomStream a(7, stream_id(StreamTag::kWalker, 3));
  RandomStream b(7, stream_id(StreamTag::kWalker, 3));
  RandomStream c(7, stream_id(StreamTag::kWalker, 4));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    auto const x = a();
    EXPECT_EQ(x, b());
    seen.insert(x);
    seen.insert(c());
  }
  EXPECT_EQ(seen.size(), 2000u);
}

TEST(RandomStream, StreamIdsSeparateTags) {
  EXPECT_NE(stream_id(StreamTag::kWalker, 1), stream_id(StreamTag::kSchedule, 1));
  EXPECT_NE(stream_id(StreamTag::kWalker, 1, 0), stream_id(StreamTag::kWalker, 0, 1));
}

TEST(RandomStream, UniformIsUniform) {
  RandomStream r(1, 2);
  std::vector<double> counts(20, 0.0);
  for (int i = 0; i < 100000; ++i) {
    double const u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    counts[static_cast<std::size_t>(u * 20)] += 1.0;
  }
  EXPECT_GT(test::chi_square_uniform_p(counts), 0.01);
}

TEST(RandomStream, BelowCoversRange) {
  RandomStream r(3, 4);
  std::vector<double> counts(7, 0.0);
  for (int i = 0; i < 70000; ++i) counts[r.below(7)] += 1.0;
  EXPECT_GT(test::chi_square_uniform_p(counts), 0.01);
}

TEST(RandomStream, DirectionIsUnit) {
  RandomStream r(5, 6);
  for (int d : {2, 3, 6}) {
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(r.direction(d).norm(), 1.0, 1e-14);
  }
}

}  // namespace
}  // namespace woi
