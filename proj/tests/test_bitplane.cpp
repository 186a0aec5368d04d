#include <gtest/gtest.h>

#include "apt/bitplane.hpp"
#include "test_util.hpp"

namespace apt {
namespace {

TEST(Pack, SingleCell) {
  const auto p = decompose_pack(IntMatrix(1, 1, 2, Encoding::BipolarInt, {3}));
  EXPECT_EQ(p.row(0, 0)[0] & 1u, 1u);
  EXPECT_EQ(p.row(1, 0)[0] & 1u, 1u);
}

TEST(Pack, WordBoundary) {
  std::vector<Cell> v(kWordBits + 1, -1);
  v[kWordBits] = 1;
  const auto p = decompose_pack(IntMatrix(1, kWordBits + 1, 1, Encoding::BipolarInt, v));
  EXPECT_EQ(p.words_per_row(), 2u);
  EXPECT_EQ(p.row(0, 0)[0], Word{0});
  EXPECT_EQ(p.row(0, 0)[1], Word{1});
}

TEST(Pack, PlaneMajorLayout) {
  const auto m = testing::random_bipolar(3, 5, 3);
  const auto p = decompose_pack(m);
  EXPECT_EQ(p.words().size(), 3u * 3u * 1u);
  for (int i = 0; i < 3; ++i)
    for (std::size_t r = 0; r < 3; ++r)
      EXPECT_EQ(p.row(i, r), p.words().data() + i * p.plane_words() + r * p.words_per_row());
}

TEST(Pack, BitsFollowDefinition) {
  const auto m = testing::random_bipolar(7, 130, 3);
  const auto p = decompose_pack(m);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const unsigned pat = (m.at(r, c) + 7) / 2;
      for (int i = 0; i < 3; ++i) EXPECT_EQ(p.bit(i, r, c), ((pat >> i) & 1u) != 0);
    }
  EXPECT_EQ(unpack(p), m);
}

TEST(Unpack, AllZeroPlanes) {
  PackedPlanes p(2, 2, 2);
  const auto m = unpack(p);
  for (Cell v : m.data()) EXPECT_EQ(v, -3);
}

TEST(Unpack, SinglePlaneAllOnes) {
  PackedPlanes p(2, 3, 1);
  for (std::size_t r = 0; r < 2; ++r) p.row(0, r)[0] = 0b111;
  const auto m = unpack(p);
  for (Cell v : m.data()) EXPECT_EQ(v, 1);
}

TEST(Pack, RoundtripAndPadHygiene) {
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = testing::uniform(1, 40);
    const auto cols = testing::uniform(1, 300);
    const int n = static_cast<int>(testing::uniform(1, 8));
    const auto m = testing::random_bipolar(rows, cols, n);
    const auto p = decompose_pack(m);
    ASSERT_EQ(unpack(p), m);
    const Word mask = p.pad_mask();
    for (int i = 0; i < n; ++i)
      for (std::size_t r = 0; r < rows; ++r) ASSERT_EQ(p.row(i, r)[p.words_per_row() - 1] & mask, Word{0});
  }
}

TEST(Pack, Transpose) {
  const auto m = testing::random_bipolar(37, 9, 4);
  const auto t = decompose_pack(m, true);
  EXPECT_EQ(t.rows(), 9u);
  EXPECT_EQ(t.cols(), 37u);
  for (std::size_t r = 0; r < 37; ++r)
    for (std::size_t c = 0; c < 9; ++c)
      for (int i = 0; i < 4; ++i)
        EXPECT_EQ(t.bit(i, c, r), (((m.at(r, c) + 15) / 2 >> i) & 1) != 0);
}

TEST(Pack, LargeParallelPathMatches) {
  // big enough to take the threaded branch
  const auto m = testing::random_bipolar(600, 700, 5);
  const auto p = decompose_pack(m);
  EXPECT_EQ(unpack(p), m);
}

TEST(Pack, RejectsSigned) {
  EXPECT_THROW(decompose_pack(testing::random_signed(2, 2, 2)), Error);
}

TEST(Pack, EmptyMatrix) {
  const auto p = decompose_pack(IntMatrix(0, 10, 2, Encoding::BipolarInt, {}));
  EXPECT_EQ(p.rows(), 0u);
  EXPECT_EQ(unpack(p).rows(), 0u);
}

}  // namespace
}  // namespace apt
