#include "jumpflow/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

using namespace jumpflow;

TEST(Philox, KnownAnswerVectors) {
    using Block = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameTripleGivesSameDraws) {
    RngStream a(7, 0, StreamRole::wiener);
    RngStream b(7, 0, StreamRole::wiener);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
    for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(a.normal_at(i), b.normal_at(i));
}

TEST(RngStream, DifferentPathOrRoleGivesDifferentDraws) {
    RngStream a(7, 0, StreamRole::wiener);
    RngStream b(7, 1, StreamRole::wiener);
    RngStream c(7, 0, StreamRole::jump_times);
    RngStream d(8, 0, StreamRole::wiener);
    int same_b = 0, same_c = 0, same_d = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        same_b += x == b();
        same_c += x == c();
        same_d += x == d();
    }
    EXPECT_EQ(same_b, 0);
    EXPECT_EQ(same_c, 0);
    EXPECT_EQ(same_d, 0);
}

TEST(RngStream, SequentialMatchesRandomAccess) {
    RngStream s(3, 9, StreamRole::jump_marks);
    for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(s(), s.word_at(i));
    EXPECT_EQ(s.position(), 50u);
    s.rewind();
    EXPECT_EQ(s.position(), 0u);
    EXPECT_EQ(s(), s.word_at(0));
}

TEST(RngStream, CopiesAreIndependentCursors) {
    RngStream a(1, 2, StreamRole::wiener);
    a();
    RngStream b = a;
    EXPECT_EQ(a, b);
    EXPECT_EQ(a(), b());
    a();
    EXPECT_FALSE(a == b);
}

TEST(RngStream, UniformsAreInOpenUnitInterval) {
    EXPECT_GT(bits_to_open_unit(0), 0.0);
    EXPECT_LT(bits_to_open_unit(~std::uint64_t{0}), 1.0);
    RngStream s(11, 0, StreamRole::jump_times);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RngStream, LagOneCorrelationIsNearZero) {
    RngStream s(7, 0, StreamRole::wiener);
    constexpr std::size_t n = 100000;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = s.normal_at(i);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + 1 < n) num += (x[i] - mean) * (x[i + 1] - mean);
    }
    EXPECT_LT(std::abs(num / den), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(RngStream, NormalsHaveUnitMoments) {
    RngStream s(5, 0, StreamRole::wiener);
    constexpr std::size_t n = 200000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = s.normal_at(i);
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_LT(std::abs(var - 1.0), 3.0 * std::sqrt(2.0 / n));
}

TEST(RngStream, AuxiliaryRegionDoesNotAliasSequentialRegion) {
    RngStream s(1, 0, StreamRole::wiener);
    std::set<std::uint64_t> seq;
    for (std::uint64_t i = 0; i < 1000; ++i) seq.insert(s.word_at(i));
    const std::uint64_t aux = 4 * RngStream::kAuxBlockOffset;
    for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_EQ(seq.count(s.word_at(aux + i)), 0u);
}

TEST(RngStream, WorksWithStandardDistributions) {
    RngStream s(2, 0, StreamRole::jump_marks);
    std::uniform_int_distribution<int> die(1, 6);
    for (int i = 0; i < 1000; ++i) {
        const int v = die(s);
        ASSERT_GE(v, 1);
        ASSERT_LE(v, 6);
    }
}

TEST(RngStream, RoleNames) {
    EXPECT_EQ(to_string(StreamRole::wiener), "wiener");
    EXPECT_EQ(to_string(StreamRole::jump_times), "jump_times");
    EXPECT_EQ(to_string(StreamRole::jump_marks), "jump_marks");
}
