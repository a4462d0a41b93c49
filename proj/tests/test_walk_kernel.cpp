#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmrw/walk_kernel.hpp"
#include "oracles.hpp"

namespace cmrw {
namespace {

const StateGrid kSym({-1.0, 0.0, 1.0});
const StateGrid kAsym({0.0, 1.0, 3.0});
const StateGrid kOff({0.0, 2.0, 3.0});

TEST(Alpha, Examples) {
    auto w = alpha(kSym);
    EXPECT_DOUBLE_EQ(w.up[1], 0.5);
    EXPECT_DOUBLE_EQ(w.down[1], 0.5);
    w = alpha(kAsym);
    EXPECT_DOUBLE_EQ(w.up[1], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(w.down[1], 2.0 / 3.0);
    w = alpha(kOff);
    EXPECT_DOUBLE_EQ(w.up[1], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(w.down[1], 1.0 / 3.0);
}

TEST(Alpha, TwoStateGridHasNoInterior) {
    const auto w = alpha(StateGrid({-1.0, 1.0}));
    EXPECT_EQ(w.up, (std::vector<double>{0.0, 0.0}));
    EXPECT_THROW(alpha(StateGrid({1.0})), Error);
}

TEST(BuildP, Examples) {
    const Tridiagonal id = build_P(kAsym, QVector::zeros(3));
    EXPECT_TRUE(id.dense().isIdentity());
    const Tridiagonal ps = build_P(kSym, QVector({0.0, 1.0, 0.0}));
    EXPECT_DOUBLE_EQ(ps.at(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(ps.at(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(ps.at(1, 2), 0.5);
    const Tridiagonal pa = build_P(kAsym, QVector({0.0, 1.0, 0.0}));
    EXPECT_DOUBLE_EQ(pa.at(1, 0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(pa.at(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(pa.at(1, 2), 1.0 / 3.0);
}

TEST(BuildP, RejectsJumpProbabilityAboveOne) {
    EXPECT_THROW(build_P(kSym, QVector({0.0, 1.5, 0.0})), Error);
    EXPECT_THROW(QVector({0.1, 0.5, 0.0}), Error);
}

TEST(BuildN, Examples) {
    EXPECT_TRUE(build_N(kSym, LambdaVector::zeros(3)).dense().isIdentity());
    const double l2 = 0.7;
    const Tridiagonal ns = build_N(kSym, LambdaVector({0.0, l2, 0.0}));
    EXPECT_DOUBLE_EQ(ns.at(1, 0), -l2 / 2);
    EXPECT_DOUBLE_EQ(ns.at(1, 1), 1 + l2);
    EXPECT_DOUBLE_EQ(ns.at(1, 2), -l2 / 2);
    const Tridiagonal na = build_N(kAsym, LambdaVector({0.0, 1.0, 0.0}));
    EXPECT_DOUBLE_EQ(na.at(1, 0), -2.0 / 3.0);
    EXPECT_DOUBLE_EQ(na.at(1, 1), 2.0);
    EXPECT_DOUBLE_EQ(na.at(1, 2), -1.0 / 3.0);
}

TEST(BuildN, MatchesScaledResolventOfP) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 3 + trial % 6;
        const auto s = oracle::random_grid(rng, m);
        std::vector<double> q(m, 0.0);
        for (std::size_t j = 1; j + 1 < m; ++j) q[j] = unit(rng);
        const double a = 0.05 + 0.9 * unit(rng);
        std::vector<double> lambda(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) lambda[j] = a / (1 - a) * q[j];
        const StateGrid g(s);
        const Eigen::MatrixXd lhs =
            (Eigen::MatrixXd::Identity(m, m) - a * build_P(g, QVector(q)).dense()) / (1 - a);
        EXPECT_LT((lhs - build_N(g, LambdaVector(lambda)).dense()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Ell, Examples) {
    EXPECT_NEAR(ell(kSym, std::vector<double>{0.25, 0.5, 0.25}, 1), 0.5, 1e-15);
    EXPECT_NEAR(ell(kAsym, std::vector<double>{0.5, 0.25, 0.25}, 1), 0.75, 1e-15);
    EXPECT_EQ(ell(kAsym, std::vector<double>{0.5, 0.25, 0.25}, 0), 0.0);
    EXPECT_EQ(ell(kAsym, std::vector<double>{0.5, 0.25, 0.25}, 2), 0.0);
}

TEST(Ell, MeanOutsideHullIsAnError) {
    // Signed vector with mass 1 and mean 5 on a grid ending at 3.
    EXPECT_THROW(ell(kAsym, std::vector<double>{-1.0, 0.0, 2.0}, 1), Error);
}

TEST(Ell, BranchesAgreeWhenMeanSitsOnState) {
    // Direct evaluation of both sums at a state equal to the mean.
    const StateGrid g({-2.0, -0.5, 0.0, 1.0, 4.0});
    const std::vector<double> w{0.15, 0.2, 0.4, 0.2, 0.05};  // mean 0 = state 2
    ASSERT_NEAR(mean_on_grid(g, w), 0.0, 1e-15);
    double left = 0.0;
    double right = 0.0;
    for (std::size_t k = 0; k < 2; ++k) left += (g[2] - g[k]) * w[k];
    for (std::size_t k = 3; k < 5; ++k) right += (g[k] - g[2]) * w[k];
    EXPECT_NEAR(left, right, 1e-15);
    const double c = (g[3] - g[1]) / ((g[3] - g[2]) * (g[2] - g[1]));
    EXPECT_NEAR(ell(g, w, 2), c * right, 1e-14);
}

TEST(Eff, Examples) {
    auto f = eff(kSym, std::vector<double>{0.25, 0.5, 0.25});
    EXPECT_NEAR(f[1], 1.0, 1e-15);
    EXPECT_EQ(f[0], 0.0);
    EXPECT_EQ(f[2], 0.0);
    f = eff(kAsym, std::vector<double>{0.5, 0.25, 0.25});
    EXPECT_NEAR(f[1], 3.0, 1e-15);
}

TEST(Eff, ZeroBranch) {
    // No weight above state 2, which sits right of the mean, so L there is 0.
    const StateGrid g2({0.0, 1.0, 2.0, 3.0});
    const std::vector<double> w2{0.2, 0.3, 0.5, 0.0};  // mean 1.3, l = 2 (0-based)
    const auto f = eff(g2, w2);
    EXPECT_EQ(f[2], 0.0);
    EXPECT_GT(f[1], 0.0);
}

TEST(Eff, DivisionGuard) {
    // L > 0 at state 1 but weight there is negative.
    const std::vector<double> w{0.6, -0.2, 0.6};
    try {
        eff(kSym, w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DivisionGuard);
    }
}

TEST(HMap, Examples) {
    const TargetPMF sym(kSym, {0.25, 0.5, 0.25});
    EXPECT_EQ(h_map(sym, LambdaVector({0.0, 3.0, 0.0}), 1), (std::vector<double>{0.25, 0.5, 0.25}));
    const double l2 = 0.3;
    const auto h = h_map(sym, LambdaVector({0.0, l2, 0.0}), 2);
    EXPECT_NEAR(h[0], 0.25 - l2 / 4, 1e-15);
    EXPECT_NEAR(h[1], 0.5 + l2 / 2, 1e-15);
    EXPECT_NEAR(h[2], 0.25 - l2 / 4, 1e-15);
    const TargetPMF asym(kAsym, {0.5, 0.25, 0.25});
    const auto ha = h_map(asym, LambdaVector({0.0, 1.0, 0.0}), 2);
    EXPECT_NEAR(ha[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(ha[1], 0.5, 1e-15);
    EXPECT_NEAR(ha[2], 1.0 / 6.0, 1e-15);
}

TEST(ResolventDist, Examples) {
    const std::vector<double> v{0.0, 1.0, 0.0};
    const auto same = resolvent_dist(v, Tridiagonal::identity(3), 0.37, 4);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(same[j], v[j], 1e-15);
    const auto s = resolvent_dist(v, build_P(kSym, QVector({0.0, 1.0, 0.0})), 0.5, 1);
    EXPECT_NEAR(s[0], 0.25, 1e-15);
    EXPECT_NEAR(s[1], 0.5, 1e-15);
    EXPECT_NEAR(s[2], 0.25, 1e-15);
    const auto a = resolvent_dist(v, build_P(kAsym, QVector({0.0, 1.0, 0.0})), 0.75, 1);
    EXPECT_NEAR(a[0], 0.5, 1e-15);
    EXPECT_NEAR(a[1], 0.25, 1e-15);
    EXPECT_NEAR(a[2], 0.25, 1e-15);
}

TEST(ResolventDist, RejectsBadA) {
    EXPECT_THROW(resolvent_dist(std::vector<double>{0, 1, 0}, Tridiagonal::identity(3), 1.0, 1), Error);
    EXPECT_THROW(resolvent_dist(std::vector<double>{0, 1, 0}, Tridiagonal::identity(3), 0.0, 1), Error);
}

// --- properties over random instances ---

struct RandomKernelCase {
    std::vector<double> s;
    std::vector<double> q;
    std::vector<double> lambda;
};

RandomKernelCase random_case(std::mt19937_64& rng, std::size_t m, double lambda_scale = 3.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomKernelCase c{oracle::random_grid(rng, m), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t j = 1; j + 1 < m; ++j) {
        c.q[j] = unit(rng);
        c.lambda[j] = 0.01 + lambda_scale * unit(rng);
    }
    return c;
}

TEST(KernelProperties, PRowSumsAndMartingale) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = random_case(rng, 2 + trial % 10);
        const StateGrid g(c.s);
        const Tridiagonal p = build_P(g, QVector(c.q));
        for (std::size_t j = 0; j < g.size(); ++j) {
            EXPECT_NEAR(p.row_sum(j), 1.0, 1e-12);
            EXPECT_NEAR(p.row_dot(j, g.states()), g[j], 1e-12);
            EXPECT_GE(p.lower(j), 0.0);
            EXPECT_GE(p.upper(j), 0.0);
        }
        EXPECT_LT((p.dense() - oracle::dense_P(c.s, c.q)).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(KernelProperties, NPowersHaveUnitRowSums) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = random_case(rng, 3 + trial % 6);
        const Eigen::MatrixXd n = oracle::dense_N(c.s, c.lambda);
        Eigen::MatrixXd power = n;
        for (int r = 1; r <= 6; ++r) {
            const Eigen::VectorXd sums = power.rowwise().sum();
            const double scale = std::max(1.0, power.cwiseAbs().maxCoeff());
            EXPECT_LT((sums.array() - 1.0).abs().maxCoeff(), 1e-10 * scale) << "r = " << r;
            power = power * n;
        }
        const Tridiagonal nt = build_N(StateGrid(c.s), LambdaVector(c.lambda));
        for (std::size_t j = 0; j < c.s.size(); ++j) {
            EXPECT_NEAR(nt.row_sum(j), 1.0, 1e-12);
            EXPECT_LE(nt.lower(j), 0.0);
            EXPECT_LE(nt.upper(j), 0.0);
            EXPECT_GE(nt.diag(j), 1.0);
        }
    }
}

TEST(KernelProperties, InversePowersOfNAreStochastic) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = random_case(rng, 3 + trial % 6);
        const Eigen::MatrixXd inv = oracle::dense_N(c.s, c.lambda).inverse();
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(inv.rows(), inv.cols());
        for (int r = 2; r <= 6; ++r) {
            power = power * inv;  // N^{-(r-1)}
            EXPECT_GE(power.minCoeff(), -1e-12);
            EXPECT_LT((power.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
        }
    }
}

TEST(KernelProperties, HMapPreservesMassAndMean) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 3 + trial % 6;
        const TargetPMF p = oracle::random_pmf(rng, m, 0.01);
        auto c = random_case(rng, m);
        const int r = 1 + trial % 6;
        const auto h = h_map(p, LambdaVector(c.lambda), r);
        double mass = 0.0;
        for (double x : h) mass += x;
        const double scale = std::max(1.0, std::abs(*std::max_element(h.begin(), h.end())));
        EXPECT_NEAR(mass, 1.0, 1e-10 * scale);
        EXPECT_NEAR(mean_on_grid(p.grid(), h), expectation(p), 1e-10 * scale * (p.grid().back() - p.grid().front()));
        // Independent dense route.
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m, m);
        const auto states = oracle::states_of(p);
        for (int k = 1; k < r; ++k) power = power * oracle::dense_N(states, c.lambda);
        const Eigen::RowVectorXd dense = oracle::row(oracle::masses_of(p)) * power;
        for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(h[j], dense[static_cast<Eigen::Index>(j)], 1e-9 * scale);
    }
}

TEST(KernelProperties, ResolventMatchesNegativeBinomialSeries) {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + trial % 5;
        const auto c = random_case(rng, m);
        const auto v = oracle::random_masses(rng, m, 0.0);
        const double a = 0.05 + 0.85 * unit(rng);
        const int r = 1 + trial % 4;
        const auto fast = resolvent_dist(v, build_P(StateGrid(c.s), QVector(c.q)), a, r);
        const auto slow = oracle::series_resolvent(v, oracle::dense_P(c.s, c.q), a, r);
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            EXPECT_NEAR(fast[j], slow[j], 1e-9);
            EXPECT_GE(fast[j], -1e-15);
            total += fast[j];
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(KernelProperties, ColumnOfInverseDecaysAsLambdaGrows) {
    std::mt19937_64 rng(26);
    const auto c = random_case(rng, 6);
    const std::size_t col = 3;
    std::vector<double> previous;
    for (double big : {10.0, 1e2, 1e3, 1e4}) {
        auto lambda = c.lambda;
        lambda[col] = big;
        const Eigen::MatrixXd inv = oracle::dense_N(c.s, lambda).inverse();
        std::vector<double> column;
        for (Eigen::Index j = 0; j < inv.rows(); ++j) column.push_back(inv(j, static_cast<Eigen::Index>(col)));
        if (!previous.empty()) {
            for (std::size_t k = 0; k < column.size(); ++k) EXPECT_LE(column[k], previous[k] + 1e-15);
        }
        previous = column;
    }
    for (double x : previous) EXPECT_LT(x, 1e-3);
}

TEST(Tridiagonal, LeftSolveInvertsLeftMultiply) {
    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = random_case(rng, 2 + trial % 8);
        const Tridiagonal n = build_N(StateGrid(c.s), LambdaVector(c.lambda));
        const auto b = oracle::random_masses(rng, c.s.size(), 0.0);
        const auto y = n.left_solve(b);
        const auto back = n.left_multiply(y);
        for (std::size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(back[j], b[j], 1e-12);
    }
}

}  // namespace
}  // namespace cmrw
