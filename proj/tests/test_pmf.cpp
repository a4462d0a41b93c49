#include <gtest/gtest.h>

#include <random>

#include "cmrw/pmf.hpp"
#include "oracles.hpp"

namespace cmrw {
namespace {

TargetPMF symmetric() { return TargetPMF(StateGrid({-1.0, 0.0, 1.0}), {0.25, 0.5, 0.25}); }
TargetPMF asymmetric() { return TargetPMF(StateGrid({0.0, 1.0, 3.0}), {0.5, 0.25, 0.25}); }

TEST(Expectation, Examples) {
    EXPECT_DOUBLE_EQ(expectation(symmetric()), 0.0);
    EXPECT_DOUBLE_EQ(expectation(asymmetric()), 1.0);
    TargetPMF quarters(StateGrid({0.25, 0.5, 0.75, 1.0}), {0.25, 0.25, 0.25, 0.25});
    EXPECT_DOUBLE_EQ(expectation(quarters), 0.625);
}

TEST(SpliceIndex, EqualityBranchAndInterior) {
    // 0-based: l = 1 is the second state.
    EXPECT_EQ(splice_index(symmetric()), 1u);
    EXPECT_EQ(splice_index(asymmetric()), 1u);
    TargetPMF off_grid(StateGrid({0.0, 2.0, 3.0}), {0.5, 0.25, 0.25});
    EXPECT_EQ(splice_index(off_grid), 1u);
}

TEST(SpliceIndex, DegenerateGrid) {
    TargetPMF single(StateGrid({2.0}), {1.0});
    try {
        splice_index(single);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateGrid);
    }
}

TEST(InitialVector, Examples) {
    EXPECT_EQ(initial_vector(asymmetric()).weights, (std::vector<double>{0.0, 1.0, 0.0}));
    TargetPMF two(StateGrid({-1.0, 1.0}), {0.5, 0.5});
    const auto v2 = initial_vector(two);
    EXPECT_DOUBLE_EQ(v2[0], 0.5);
    EXPECT_DOUBLE_EQ(v2[1], 0.5);
    TargetPMF off_grid(StateGrid({0.0, 2.0, 3.0}), {0.5, 0.25, 0.25});
    const auto v3 = initial_vector(off_grid);
    EXPECT_DOUBLE_EQ(v3[0], 0.375);
    EXPECT_DOUBLE_EQ(v3[1], 0.625);
    EXPECT_DOUBLE_EQ(v3[2], 0.0);
}

TEST(InitialVector, RandomPmfsKeepMassAndMean) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 2 + trial % 9;
        const TargetPMF p = oracle::random_pmf(rng, m, 0.01);
        const InitialVector v = initial_vector(p);
        double mass = 0.0;
        int nonzero = 0;
        std::size_t first = m;
        std::size_t last = 0;
        for (std::size_t j = 0; j < m; ++j) {
            ASSERT_GE(v[j], 0.0);
            mass += v[j];
            if (v[j] != 0.0) {
                ++nonzero;
                first = std::min(first, j);
                last = j;
            }
        }
        EXPECT_NEAR(mass, 1.0, 1e-12);
        EXPECT_NEAR(mean_on_grid(p.grid(), v.weights), expectation(p), 1e-12);
        EXPECT_LE(nonzero, 2);
        EXPECT_LE(last - first, 1u);
    }
}

TEST(StateGrid, RejectsUnsortedAndNonFinite) {
    EXPECT_THROW(StateGrid({0.0, 0.0}), Error);
    EXPECT_THROW(StateGrid({1.0, 0.0}), Error);
    EXPECT_THROW(StateGrid({0.0, std::nan("")}), Error);
    EXPECT_THROW(StateGrid(std::vector<double>{}), Error);
}

TEST(TargetPMF, ValidatesMasses) {
    EXPECT_THROW(TargetPMF(StateGrid({0.0, 1.0}), {0.5, 0.6}), Error);
    EXPECT_THROW(TargetPMF(StateGrid({0.0, 1.0}), {1.5, -0.5}), Error);
    EXPECT_THROW(TargetPMF(StateGrid({0.0, 1.0}), {1.0}), Error);
    TargetPMF with_zero(StateGrid({0.0, 1.0, 2.0}), {0.5, 0.0, 0.5});
    try {
        with_zero.require_positive();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveMass);
    }
}

TEST(TargetPMF, FromRawDropsDustAndRenormalizes) {
    const std::vector<double> s{80, 90, 100, 110, 120};
    const std::vector<double> m{0.0, 0.5, 1e-12, 0.5, 0.0};
    const TargetPMF p = TargetPMF::from_raw(s, m);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p.grid()[0], 90.0);
    EXPECT_EQ(p.grid()[1], 110.0);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);
}

}  // namespace
}  // namespace cmrw
