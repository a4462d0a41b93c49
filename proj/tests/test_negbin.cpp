#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmrw/negbin.hpp"
#include "oracles.hpp"

namespace cmrw {
namespace {

const TargetPMF kSym(StateGrid({-1.0, 0.0, 1.0}), {0.25, 0.5, 0.25});
const TargetPMF kAsym(StateGrid({0.0, 1.0, 3.0}), {0.5, 0.25, 0.25});

TEST(SolveNegBin, OrderOneIsTheGeometricFormula) {
    std::mt19937_64 rng(21);
    const TargetPMF p = oracle::random_pmf(rng, 6, 0.05);
    const auto sol = solve_negbin(p, 1);
    const auto f = eff(p);
    EXPECT_EQ(sol.iterations, 1);
    for (std::size_t j = 0; j < p.size(); ++j) EXPECT_DOUBLE_EQ(sol.lambda[j], f[j]);
}

TEST(SolveNegBin, SymmetricOrderTwo) {
    const auto sol = solve_negbin(kSym, 2);
    EXPECT_NEAR(sol.lambda[1], std::sqrt(2.0) - 1.0, 1e-10);
    EXPECT_NEAR(sol.a0, 1.0 - 1.0 / std::sqrt(2.0), 1e-10);
    EXPECT_LE(sol.residual, 1e-10);
}

TEST(SolveNegBin, AsymmetricOrderTwo) {
    const auto sol = solve_negbin(kAsym, 2);
    EXPECT_NEAR(sol.lambda[1], 1.0, 1e-10);
    EXPECT_NEAR(sol.a0, 0.5, 1e-10);
}

TEST(SolveNegBin, DampedIterationAloneReachesTheSameRoot) {
    const TargetPMF p(StateGrid({-2.0, -1.0, 0.0, 1.5, 3.0}), {0.15, 0.2, 0.3, 0.2, 0.15});
    const auto newton = solve_negbin(p, 3);
    FixedPointOptions opts;
    opts.use_newton = false;
    const auto damped = solve_negbin(p, 3, opts);
    EXPECT_EQ(damped.method, "damped");
    EXPECT_GT(damped.iterations, 1);
    EXPECT_LE(sup_distance(newton.lambda.values(), damped.lambda.values()), 1e-8);
}

TEST(SolveNegBin, HonoursWarmStart) {
    FixedPointOptions opts;
    opts.warm_start = LambdaVector({0.0, 1.0, 0.0});
    const auto sol = solve_negbin(kAsym, 2, opts);
    EXPECT_LE(sol.iterations, 1);
    EXPECT_NEAR(sol.lambda[1], 1.0, 1e-12);
    opts.warm_start = LambdaVector({0.0, 1.0, 0.0, 0.0});
    EXPECT_THROW(solve_negbin(kAsym, 2, opts), Error);
}

TEST(SolveNegBin, TwoStatesAndBadInput) {
    const TargetPMF two(StateGrid({0.0, 1.0}), {0.5, 0.5});
    const auto sol = solve_negbin(two, 3);
    EXPECT_EQ(sol.lambda[0], 0.0);
    EXPECT_EQ(sol.lambda[1], 0.0);
    EXPECT_EQ(a_zero(sol.lambda), 0.0);
    EXPECT_THROW(solve_negbin(kSym, 0), Error);
    const TargetPMF hole(StateGrid({0.0, 1.0, 2.0}), {0.5, 0.0, 0.5});
    try {
        solve_negbin(hole, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveMass);
    }
}

TEST(SolveNegBin, ExhaustedBudgetReportsDiagnostics) {
    std::mt19937_64 rng(22);
    const TargetPMF p = oracle::random_pmf(rng, 6, 0.05);
    FixedPointOptions opts;
    opts.use_newton = false;
    opts.max_iterations = 1;
    opts.eps_schedule = {};
    opts.tolerance = 1e-14;
    try {
        solve_negbin(p, 4, opts);
        FAIL();
    } catch (const NoConvergenceError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
        EXPECT_EQ(e.diagnostics().r, 4);
        EXPECT_EQ(e.diagnostics().best_lambda.size(), p.size());
        EXPECT_GT(e.diagnostics().best_residual, 0.0);
        EXPECT_FALSE(e.diagnostics().last_stage.empty());
    }
}

TEST(AZero, Examples) {
    EXPECT_NEAR(a_zero(LambdaVector({0.0, std::sqrt(2.0) - 1.0, 0.0})), 1.0 - 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(a_zero(LambdaVector({0.0, 1.0, 0.0})), 0.5, 1e-15);
    EXPECT_EQ(a_zero(LambdaVector::zeros(2)), 0.0);
}

TEST(QOfA, Examples) {
    const LambdaVector one({0.0, 1.0, 0.0});
    EXPECT_NEAR(q_of_a(one, 0.5)[1], 1.0, 1e-15);
    EXPECT_NEAR(q_of_a(one, 2.0 / 3.0)[1], 0.5, 1e-15);
    EXPECT_NEAR(q_of_a(LambdaVector({0.0, std::sqrt(2.0) - 1.0, 0.0}), 0.9)[1], (std::sqrt(2.0) - 1.0) / 9.0, 1e-15);
    EXPECT_THROW(q_of_a(one, 0.4), Error);
    EXPECT_THROW(q_of_a(one, 1.0), Error);
}

TEST(VerifyNegBin, ClosedFormSolutionsAtSeveralA) {
    const auto sym = solve_negbin(kSym, 2);
    for (double a : {0.3, 0.6, 0.9}) EXPECT_LE(verify_negbin(kSym, sym, a), 1e-9) << a;
    const auto asym = solve_negbin(kAsym, 2);
    for (double a : {0.5, 0.75, 0.95}) EXPECT_LE(verify_negbin(kAsym, asym, a), 1e-9) << a;
}

TEST(VerifyNegBin, PerturbedLambdaIsDetected) {
    auto sol = solve_negbin(kSym, 2);
    sol.lambda = LambdaVector({0.0, sol.lambda[1] + 0.05, 0.0});
    EXPECT_GE(verify_negbin(kSym, sol, 0.6), 1e-3);
}

TEST(NegBinProperties, RandomInstances) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = 3 + trial % 5;
        const int r = 2 + trial % 4;
        const TargetPMF p = oracle::random_pmf(rng, m, 0.03);
        const auto sol = solve_negbin(p, r);
        const auto states = oracle::states_of(p);

        // Fresh evaluation of the fixed point through the dense route.
        const Eigen::MatrixXd n = oracle::dense_N(states, {sol.lambda.values().begin(), sol.lambda.values().end()});
        Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (int k = 1; k < r; ++k) pow = pow * n;
        const Eigen::RowVectorXd h = oracle::row(oracle::masses_of(p)) * pow;
        EXPECT_GT(h.minCoeff(), 0.0);
        const auto image = eff(p.grid(), oracle::to_std(h));
        EXPECT_LE(sup_distance(image, sol.lambda.values()), 1e-8);
        for (std::size_t j = 1; j + 1 < m; ++j) EXPECT_GT(sol.lambda[j], 0.0);

        // Recovery p = h N^{-(r-1)}.
        const Eigen::RowVectorXd back = h * pow.inverse();
        EXPECT_LE(sup_distance(oracle::to_std(back), p.masses()), 1e-9);

        // Law at NB(r, a) does not depend on a.
        for (double a : sample_a_values(sol.a0, 10)) {
            EXPECT_LE(verify_negbin(p, sol, a), 1e-8) << "trial " << trial << " a " << a;
        }
    }
}

TEST(NegBinProperties, ThreeStateClosedForm) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_real_distribution<double> mid(0.05, 0.9);
        std::uniform_real_distribution<double> gap(0.3, 3.0);
        const double p2 = mid(rng);
        const double lo = gap(rng);
        const double hi = gap(rng);
        // Masses chosen so the mean sits on the middle state.
        const double p1 = (1.0 - p2) * hi / (lo + hi);
        const TargetPMF p(StateGrid({-lo, 0.0, hi}), {p1, p2, 1.0 - p1 - p2});
        for (int r : {1, 2, 4, 8}) {
            const auto sol = solve_negbin(p, r);
            EXPECT_NEAR(sol.lambda[1], std::pow(p2, -1.0 / r) - 1.0, 1e-10) << "p2 " << p2 << " r " << r;
        }
    }
}

TEST(SampleAValues, SpreadsOverRange) {
    const auto a = sample_a_values(0.25, 10, 0.95);
    ASSERT_EQ(a.size(), 10u);
    EXPECT_DOUBLE_EQ(a.front(), 0.25);
    EXPECT_DOUBLE_EQ(a.back(), 0.95);
}

}  // namespace
}  // namespace cmrw
