#include "jumpflow/noise.hpp"
#include "jumpflow/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace jumpflow;

namespace {

std::pair<RngStream, RngStream> jump_streams(std::uint64_t seed, std::uint64_t path) {
    return {make_stream(seed, path, StreamRole::jump_times), make_stream(seed, path, StreamRole::jump_marks)};
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& x) {
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= static_cast<double>(x.size() - 1);
    return m;
}

}  // namespace

TEST(TimeGrid, PointsSpanTheHorizonExactly) {
    const TimeGrid grid(1.0, 3);
    EXPECT_DOUBLE_EQ(grid.step(), 1.0 / 3.0);
    const auto pts = grid.points();
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts.front(), 0.0);
    EXPECT_EQ(pts.back(), 1.0);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i - 1], pts[i]);
}

TEST(TimeGrid, RejectsBadHorizon) {
    EXPECT_THROW(TimeGrid(0.0, 10), std::invalid_argument);
    EXPECT_THROW(TimeGrid(-1.0, 10), std::invalid_argument);
    EXPECT_THROW(TimeGrid(std::numeric_limits<double>::infinity(), 10), std::invalid_argument);
}

TEST(SampleWiener, EmptyGridGivesEmptyMatrix) {
    const auto w = sample_wiener(TimeGrid(1.0, 0), 2, make_stream(1, 0, StreamRole::wiener));
    EXPECT_EQ(w.increments.rows(), 0);
}

TEST(SampleWiener, PooledMeanIsNearZero) {
    const TimeGrid grid(1.0, 100);
    std::vector<double> pooled;
    for (std::uint64_t p = 0; p < 1000; ++p) {
        const auto w = sample_wiener(grid, 1, make_stream(3, p, StreamRole::wiener));
        for (Eigen::Index i = 0; i < w.increments.rows(); ++i) pooled.push_back(w.increments(i, 0));
    }
    ASSERT_EQ(pooled.size(), 100000u);
    const double h = grid.step();
    EXPECT_LT(std::abs(moments(pooled).mean), 3.0 * std::sqrt(h / 1e5));
}

TEST(SampleWiener, ColumnVarianceMatchesStep) {
    const TimeGrid grid(1.0, 100);
    std::vector<double> col0, col1;
    for (std::uint64_t p = 0; p < 1000; ++p) {
        const auto w = sample_wiener(grid, 2, make_stream(4, p, StreamRole::wiener));
        for (Eigen::Index i = 0; i < w.increments.rows(); ++i) {
            col0.push_back(w.increments(i, 0));
            col1.push_back(w.increments(i, 1));
        }
    }
    EXPECT_NEAR(moments(col0).var, 0.01, 0.0005);
    EXPECT_NEAR(moments(col1).var, 0.01, 0.0005);
}

TEST(SampleWiener, StandardizedIncrementsPassNormalMomentCheck) {
    const TimeGrid grid(2.0, 50);
    std::vector<double> z;
    for (std::uint64_t p = 0; p < 2000; ++p) {
        const auto w = sample_wiener(grid, 1, make_stream(9, p, StreamRole::wiener));
        for (Eigen::Index i = 0; i < w.increments.rows(); ++i) z.push_back(w.increments(i, 0) / std::sqrt(grid.step()));
    }
    const auto m = moments(z);
    const double n = static_cast<double>(z.size());
    EXPECT_LT(std::abs(m.mean), 3.0 / std::sqrt(n));
    EXPECT_LT(std::abs(m.var - 1.0), 3.0 * std::sqrt(2.0 / n));
}

TEST(SampleWiener, CoarsenSumsIncrements) {
    const auto fine = sample_wiener(TimeGrid(1.0, 8), 2, make_stream(1, 1, StreamRole::wiener));
    const auto coarse = coarsen(fine, 4);
    ASSERT_EQ(coarse.increments.rows(), 2);
    EXPECT_NEAR(coarse.increments(0, 1), fine.increments.block(0, 1, 4, 1).sum(), 1e-15);
    EXPECT_NEAR(coarse.increments.sum(), fine.increments.sum(), 1e-14);
    EXPECT_THROW(coarsen(fine, 3), std::invalid_argument);
}

TEST(JumpMeasureSpec, ZeroMassGivesNoEvents) {
    const auto js = sample_jumps(JumpMeasureSpec::none(), 5.0, jump_streams(1, 0));
    EXPECT_TRUE(js.empty());
}

TEST(JumpMeasureSpec, RejectsInconsistentMasses) {
    const MarkSampler unit = [](RngStream&) { return Vector::Ones(1); };
    EXPECT_THROW(JumpMeasureSpec::finite(1, 0.0, unit), std::invalid_argument);
    EXPECT_THROW(JumpMeasureSpec::finite(1, -1.0, unit), std::invalid_argument);
    EXPECT_THROW(JumpMeasureSpec::finite(1, std::nan(""), unit), std::invalid_argument);
    EXPECT_THROW(JumpMeasureSpec::finite(1, 1.0, nullptr), std::invalid_argument);
}

TEST(JumpMeasureSpec, RejectsZeroMarks) {
    const auto spec = JumpMeasureSpec::finite(1, 1.0, [](RngStream&) { return Vector::Zero(1); });
    RngStream s(1, 0, StreamRole::jump_marks);
    EXPECT_THROW(spec.draw_mark(s), std::invalid_argument);
}

TEST(SamplePoisson, SmallAndLargeMeansHaveMatchingMoments) {
    for (double mean : {0.5, 6.0, 40.0}) {
        RngStream s(21, 0, StreamRole::jump_times);
        std::vector<double> draws(50000);
        for (auto& d : draws) d = static_cast<double>(sample_poisson(mean, s));
        const auto m = moments(draws);
        const double se = std::sqrt(mean / draws.size());
        EXPECT_LT(std::abs(m.mean - mean), 4.0 * se) << "mean " << mean;
        EXPECT_NEAR(m.var / mean, 1.0, 0.05) << "mean " << mean;
    }
    RngStream s(1, 0, StreamRole::jump_times);
    EXPECT_EQ(sample_poisson(0.0, s), 0u);
}

TEST(SampleJumps, CountsArePoissonWithIndependentWindows) {
    const auto spec = compound_poisson(2.0, unit_marks());
    constexpr std::size_t runs = 100000;
    std::vector<double> total(runs), first(runs), second(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        const auto js = sample_jumps(spec, 3.0, jump_streams(5, r));
        total[r] = static_cast<double>(js.size());
        first[r] = static_cast<double>(js.count_in(0.0, 1.5));
        second[r] = static_cast<double>(js.count_in(1.5, 3.0));
    }
    const auto m = moments(total);
    EXPECT_LT(std::abs(m.mean - 6.0), 3.0 * std::sqrt(6.0 / runs));
    EXPECT_NEAR(m.var, 6.0, 0.3);

    const auto m1 = moments(first), m2 = moments(second);
    std::vector<double> prod(runs);
    for (std::size_t r = 0; r < runs; ++r) prod[r] = (first[r] - m1.mean) * (second[r] - m2.mean);
    const auto mp = moments(prod);
    EXPECT_LT(std::abs(mp.mean), 3.0 * std::sqrt(mp.var / runs));
}

TEST(SampleJumps, EventsAreSortedInsideTheWindow) {
    const auto spec = compound_poisson(5.0, uniform_marks(0.5, 1.5));
    const auto js = sample_jumps(spec, 2.0, jump_streams(8, 3));
    ASSERT_FALSE(js.empty());
    for (std::size_t i = 0; i < js.size(); ++i) {
        EXPECT_GT(js.events[i].time, 0.0);
        EXPECT_LE(js.events[i].time, 2.0);
        if (i > 0) EXPECT_LE(js.events[i - 1].time, js.events[i].time);
        EXPECT_GE(js.events[i].mark(0), 0.5);
        EXPECT_LE(js.events[i].mark(0), 1.5);
    }
}

TEST(SampleJumps, MarksFollowTheLaw) {
    const auto spec = compound_poisson(50.0, exponential_marks(2.0));
    std::vector<double> marks;
    for (std::uint64_t p = 0; p < 400; ++p) {
        for (const auto& e : sample_jumps(spec, 1.0, jump_streams(2, p)).events) marks.push_back(e.mark(0));
    }
    const auto m = moments(marks);
    EXPECT_LT(std::abs(m.mean - 0.5), 4.0 * 0.5 / std::sqrt(static_cast<double>(marks.size())));
}

TEST(SampleNoise, IsAPureFunctionOfItsInputs) {
    const auto spec = compound_poisson(3.0, normal_marks(0.0, 1.0));
    const TimeGrid grid(1.0, 64);
    const auto a = sample_noise(42, 17, grid, 2, spec);
    const auto b = sample_noise(42, 17, grid, 2, spec);
    EXPECT_EQ(a.wiener.increments, b.wiener.increments);
    ASSERT_EQ(a.jumps.size(), b.jumps.size());
    for (std::size_t i = 0; i < a.jumps.size(); ++i) {
        EXPECT_EQ(a.jumps.events[i].time, b.jumps.events[i].time);
        EXPECT_EQ(a.jumps.events[i].mark, b.jumps.events[i].mark);
    }
    const auto c = sample_noise(42, 18, grid, 2, spec);
    EXPECT_NE(a.wiener.increments, c.wiener.increments);
}

TEST(SampleNoise, TruncatedMeasureSamplesOnlyOuterJumps) {
    TruncatedInfinite part;
    part.truncation_level = 0.1;
    part.outer_mass = 4.0;
    part.outer_sampler = [](RngStream& s) { return Vector::Constant(1, s.uniform() < 0.5 ? -0.5 : 0.5); };
    part.small_jump_policy = SmallJumpPolicy::gaussian_moment_match;
    part.small_jump_covariance = Matrix::Constant(1, 1, 0.04);
    const auto spec = JumpMeasureSpec::truncated(1, part);
    const TimeGrid grid(1.0, 100);

    std::vector<double> small;
    std::size_t events = 0;
    for (std::uint64_t p = 0; p < 1000; ++p) {
        const auto noise = sample_noise(6, p, grid, 1, spec);
        events += noise.jumps.size();
        for (const auto& e : noise.jumps.events) ASSERT_GT(std::abs(e.mark(0)), 0.1);
        ASSERT_EQ(noise.small_jumps.rows(), 100);
        for (Eigen::Index i = 0; i < noise.small_jumps.rows(); ++i) small.push_back(noise.small_jumps(i, 0));
    }
    EXPECT_NEAR(static_cast<double>(events) / 1000.0, 4.0, 4.0 * std::sqrt(4.0 / 1000.0));
    EXPECT_NEAR(moments(small).var, 0.04 * grid.step(), 0.05 * 0.04 * grid.step());
}

TEST(CovarianceRoot, ReproducesSemidefiniteCovariance) {
    Matrix cov(3, 3);
    cov << 4, 2, 0, 2, 1, 0, 0, 0, 0;
    const Matrix root = covariance_root(cov);
    EXPECT_TRUE((root * root.transpose()).isApprox(cov, 1e-12));
}
