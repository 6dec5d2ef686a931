#include "support.hpp"

#include "sylkrylov/driver.hpp"
#include "sylkrylov/problems.hpp"
#include "sylkrylov/sylvester.hpp"

#include <gtest/gtest.h>

using namespace sylkrylov;
using sylkrylov::testing::random_matrix;
using sylkrylov::testing::rel_diff;

namespace {

Matrix dense_solution(const LowRankSolution& sol, std::size_t k) {
    return sol.decompA.basis * sol.trajectory.G[k] * sol.decompB.basis.transpose();
}

}  // namespace

TEST(Methods, ParseAndPrint) {
    for (Method m : {Method::ExpQuadrature, Method::BDF1, Method::BDF2, Method::BDF3, Method::ROS2})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_EQ(bdf_order(Method::BDF2), 2);
    EXPECT_EQ(bdf_order(Method::ROS2), 0);
    try {
        parse_method("bdf7");
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        for (const char* name : {"exp", "bdf1", "bdf2", "bdf3", "ros2"})
            EXPECT_NE(msg.find(name), std::string::npos) << msg;
    }
}

TEST(Problem, Validation) {
    auto pr = example1(3, 3, 1, 1);
    EXPECT_NO_THROW(pr.validate());
    auto bad = pr;
    bad.E = Matrix::Ones(5, 1);
    EXPECT_THROW(bad.validate(), DimensionError);
    bad = pr;
    bad.F = Matrix::Ones(9, 2);
    EXPECT_THROW(bad.validate(), DimensionError);
    bad = pr;
    bad.Tf = pr.t0;
    EXPECT_THROW(bad.validate(), Error);
    bad = pr;
    bad.sign = 2.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = pr;
    bad.E = Matrix::Zero(9, 1);
    EXPECT_THROW(bad.validate(), Error);
    EXPECT_NO_THROW(bad.validate(true));
}

TEST(Config, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.tol = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = SolverConfig{};
    c.m_max = 0;
    EXPECT_THROW(c.validate(), Error);
    c = SolverConfig{};
    c.h = -1.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Solve, ZeroConstantTerm) {
    auto pr = example1(3, 3, 1, 1);
    pr.E.setZero();
    SolverConfig c;
    c.allow_rank_deficient = true;
    c.h = 0.1;
    const auto sol = solve(pr, c);
    EXPECT_TRUE(sol.converged);
    EXPECT_EQ(sol.m_final, 1);
    EXPECT_EQ(sol.residual_history.front(), 0.0);
    EXPECT_EQ(reconstruct_dense(sol, 0).norm(), 0.0);
    EXPECT_EQ(sol.factors.front().rank(), 0);
}

TEST(Solve, Example1MatchesReference) {
    const auto pr = example1(10, 10, 2, 42);
    SolverConfig c;
    const auto sol = solve(pr, c);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(sol.m_final, 20);
    EXPECT_LE(sol.residual_history.back(), 1e-10);
    EXPECT_EQ(sol.times.size(), 201u);
    const Matrix ref = integral_reference(pr, {pr.t0, pr.Tf}, {}).back();
    EXPECT_LE(rel_diff(reconstruct_dense(sol, 0), ref), 1e-6);
    // history is non-increasing near convergence and its last entry is the final residual
    double worst = 0.0;
    for (const auto& r : sol.final_residuals)
        worst = std::max(worst, r.frobenius);
    EXPECT_EQ(worst, sol.residual_history.back());
}

TEST(Solve, HistoryCanBeRecomputed) {
    const auto pr = example1(6, 6, 2, 5);
    SolverConfig c;
    c.tol = 1e-6;
    const auto sol = solve(pr, c);
    const auto again = residual_norms(sol.trajectory, sol.projected);
    ASSERT_EQ(again.size(), sol.final_residuals.size());
    for (std::size_t k = 0; k < again.size(); ++k) {
        EXPECT_EQ(again[k].frobenius, sol.final_residuals[k].frobenius);
        EXPECT_EQ(again[k].two, sol.final_residuals[k].two);
    }
}

TEST(Solve, BasesArePrefixesOfLargerRuns) {
    const auto pr = example1(6, 6, 1, 6);
    SolverConfig c;
    c.m_max = 2;
    c.tol = 1e-30;
    const auto small = solve(pr, c);
    c.m_max = 4;
    const auto large = solve(pr, c);
    ASSERT_EQ(small.m_final, 2);
    EXPECT_EQ(large.decompA.basis.leftCols(small.decompA.size()), small.decompA.basis);
    EXPECT_EQ(large.residual_history[0], small.residual_history[0]);
    EXPECT_EQ(large.residual_history[1], small.residual_history[1]);
}

TEST(Solve, TwoNormMonitor) {
    const auto pr = example1(5, 5, 1, 7);
    SolverConfig c;
    c.norm = NormChoice::Two;
    c.tol = 1e-8;
    const auto sol = solve(pr, c);
    double worst = 0.0;
    for (const auto& r : sol.final_residuals)
        worst = std::max(worst, r.two);
    EXPECT_EQ(worst, sol.residual_history.back());
}

TEST(Solve, SignFlipsTheSolution) {
    auto pr = example1(5, 5, 1, 8);
    SolverConfig c;
    c.tol = 1e-9;
    const auto plus = solve(pr, c);
    pr.sign = -1.0;
    const auto minus = solve(pr, c);
    EXPECT_LE(rel_diff(reconstruct_dense(minus, 0), -reconstruct_dense(plus, 0)), 1e-10);
}

TEST(Solve, ReconstructWithinTruncation) {
    const auto pr = example1(6, 6, 2, 9);
    SolverConfig c;
    c.tol = 1e-8;
    c.dtol = 1e-6;
    c.store = StoreFactors::All;
    const auto sol = solve(pr, c);
    ASSERT_EQ(sol.factors.size(), sol.trajectory.size());
    for (std::size_t k : {std::size_t{50}, sol.trajectory.size() - 1}) {
        const auto sigma = svd(sol.trajectory.G[k]).sigma;
        const Index l = sol.factors[k].rank();
        const double next = l < sigma.size() ? sigma(l) : 0.0;
        EXPECT_LE(norm2(reconstruct_dense(sol, k) - dense_solution(sol, k)), next + 1e-14);
        EXPECT_LE(next, c.dtol);
    }
    EXPECT_THROW(reconstruct_dense(sol, sol.factors.size()), Error);
}

TEST(Solve, NoFactorsStored) {
    const auto pr = example1(4, 4, 1, 10);
    SolverConfig c;
    c.store = StoreFactors::None;
    c.tol = 1e-6;
    EXPECT_TRUE(solve(pr, c).factors.empty());
}

TEST(Solve, NonzeroInitialValue) {
    auto pr = example1(5, 5, 1, 11);
    pr.Z0 = random_matrix(25, 1, 12);
    pr.Z0t = random_matrix(25, 1, 13);
    SolverConfig c;
    EXPECT_THROW(solve(pr, c), UnsupportedError);
    c.method = Method::BDF2;
    c.tol = 1e-6;
    const auto sol = solve(pr, c);
    EXPECT_GT(sol.unprojected_initial_norm, 0.0);
    EXPECT_FALSE(sol.warnings.empty());

    // X0 inside the bases: start from the E, F blocks themselves
    pr.Z0 = pr.E.col(0);
    pr.Z0t = pr.F.col(0);
    const auto inside = solve(pr, c);
    EXPECT_LE(inside.unprojected_initial_norm, 1e-10 * pr.initial_value().norm());
    const Matrix ref = integral_reference(pr, {pr.t0, pr.Tf}, {}).back();
    EXPECT_LE(rel_diff(dense_solution(inside, inside.trajectory.size() - 1), ref), 1e-3);
}

TEST(Solve, AllMethodsAgreeOnSmallProblem) {
    const auto pr = example1(6, 6, 2, 14);
    const Matrix ref = integral_reference(pr, {pr.t0, pr.Tf}, {}).back();
    for (Method m : {Method::ExpQuadrature, Method::BDF1, Method::BDF2, Method::BDF3, Method::ROS2}) {
        SolverConfig c;
        c.method = m;
        c.tol = 1e-8;
        const auto sol = solve(pr, c);
        EXPECT_TRUE(sol.converged) << to_string(m);
        const double err = rel_diff(reconstruct_dense(sol, 0), ref);
        // BDF1 at h = 0.01 is the crudest; the problem reaches steady state by Tf
        EXPECT_LE(err, m == Method::BDF1 ? 1e-3 : 1e-5) << to_string(m);
    }
}

TEST(Solve, BlockArnoldiFlavor) {
    const auto pr = example1(5, 5, 1, 15);
    SolverConfig c;
    c.basis = BasisFlavor::BA;
    c.tol = 1e-6;
    const auto sol = solve(pr, c);
    EXPECT_EQ(sol.decompA.block_width, 1);
    EXPECT_EQ(sol.decompA.flavor, BasisFlavor::BA);
}

TEST(Solve, StopsAtOperatorDimension) {
    const auto pr = example1(2, 2, 1, 16);
    SolverConfig c;
    c.tol = 1e-300;
    c.m_max = 10;
    const auto sol = solve(pr, c);
    EXPECT_LE(sol.decompA.size(), 4);
    EXPECT_LT(sol.m_final, 10);
}

TEST(Solve, SpectralClashIsAnnotated) {
    // h (a + b) = 1 makes the BDF1 step matrix singular
    DSEProblem pr;
    pr.A = SparseOperator::from_dense(50.0 * Matrix::Identity(4, 4));
    pr.B = SparseOperator::from_dense(50.0 * Matrix::Identity(4, 4));
    pr.E = random_matrix(4, 1, 17);
    pr.F = random_matrix(4, 1, 18);
    SolverConfig c;
    c.method = Method::BDF1;
    c.h = 0.01;
    try {
        solve(pr, c);
        FAIL();
    } catch (const SpectralClashError& e) {
        EXPECT_NE(std::string(e.what()).find("m = 1"), std::string::npos) << e.what();
    }
}

TEST(Solve, LargeExample1BDF1) {
    const auto pr = example1(50, 50, 2, 42);
    SolverConfig c;
    c.method = Method::BDF1;
    const auto sol = solve(pr, c);
    EXPECT_TRUE(sol.converged);
    EXPECT_LE(sol.residual_history.back(), 1e-9);
    EXPECT_GE(sol.m_final, 15);
    EXPECT_LE(sol.m_final, 25);
}
