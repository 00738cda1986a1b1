#include <gtest/gtest.h>
#include "test_support.hpp"

using namespace sgmc;
using sgmc::testing::duplicated_pair;
using sgmc::testing::gaussian_instance;

TEST(Correlation, MatchesDenseFormula)
{
    const auto inst = gaussian_instance(3, 5, 0.7, 2, 0.3, true);
    const auto mm = build_model_matrices(inst);
    std::mt19937_64 rng(1);
    const vector_t w = sgmc::testing::gaussian_vector(10, rng);
    const vector_t expected = mm.C.transpose() * (inst.b() - mm.D * mm.C * w);
    EXPECT_LE((correlation(inst, w) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CheckOpt, ZeroIsOptimalAboveLambdaMax)
{
    auto inst = gaussian_instance(4, 6, 0.3, 3);
    const auto mm = build_model_matrices(inst);
    inst.lambda = lambda_max(mm, inst.b());
    EXPECT_TRUE(check_opt(inst, vector_t::Zero(12)).satisfied);
}

TEST(CheckOpt, ZeroSignal)
{
    matrix_t A = matrix_t::Ones(2, 3);
    const ProblemInstance inst(A, 0.2, vector_t::Zero(2), 1.0);
    const auto report = check_opt(inst, vector_t::Zero(6));
    EXPECT_TRUE(report.satisfied);
    EXPECT_EQ(report.worst_violation, 0.0);
    EXPECT_TRUE(report.violations.empty());
}

TEST(CheckOpt, OracleSolutionPasses)
{
    const auto inst = gaussian_instance(4, 8, 0.5, 7);
    const auto sol = solve_saddle(inst);
    ASSERT_TRUE(sol.converged);
    EXPECT_TRUE(check_opt(inst, sol.w, 1e-6).satisfied);
}

TEST(CheckOpt, ReportsViolatorAndExcess)
{
    const auto inst = duplicated_pair(2.0, 1.0);
    // w = 0: xi = (2, 2, 0, 0) exceeds lambda = 1 at the two primal entries.
    const auto report = check_opt(inst, vector_t::Zero(4), 1e-9);
    EXPECT_FALSE(report.satisfied);
    ASSERT_EQ(report.violations.size(), 2u);
    EXPECT_EQ(report.violations[0].index, 0);
    EXPECT_NEAR(report.worst_violation, 1.0 - 2e-9, 1e-12);
    EXPECT_THROW(check_opt(inst, vector_t::Zero(4), 0.0), input_error);
}

TEST(EncodeSopt, AllZeroAboveLambdaMax)
{
    auto inst = gaussian_instance(3, 4, 0.3, 8);
    inst.lambda = 1.5 * lambda_max(build_model_matrices(inst), inst.b());
    EXPECT_TRUE(encode_sopt(inst, vector_t::Zero(8)).is_zero());
}

TEST(EncodeSopt, DuplicatedColumnsExample)
{
    const auto inst = duplicated_pair(2.0, 1.0);
    vector_t w(4);
    w << 0.5, 0.5, 0, 0;
    EXPECT_EQ(encode_sopt(inst, w).to_string(), "++00");
}

TEST(EncodeSopt, SameIndicatorForDistinctSolutions)
{
    // Columns 1 and 3 are replicas, so the solution set is a segment.
    std::mt19937_64 rng(12);
    const matrix_t Abar = sgmc::testing::gaussian_matrix(3, 2, rng);
    matrix_t A(3, 4);
    A << Abar, Abar;
    const vector_t y = sgmc::testing::gaussian_vector(3, rng);
    ProblemInstance inst(A, 0.4, y, 1.0);
    const auto mm = build_model_matrices(inst);
    inst.lambda = 0.4 * lambda_max(mm, inst.b());

    const auto w1 = solve_saddle(mm, inst.b(), inst.lambda).w;
    vector_t start = vector_t::Zero(8);
    start << 3, -1, -2, 1, 0.5, 0.5, -1, 2;
    const auto r2 = solve_saddle(mm, inst.b(), inst.lambda, {}, start);
    ASSERT_TRUE(r2.converged);
    EXPECT_GT((w1 - r2.w).cwiseAbs().maxCoeff(), 1e-3) << "starts should reach different solutions";
    EXPECT_EQ(encode_sopt(inst, w1, 1e-7), encode_sopt(inst, r2.w, 1e-7));

    const auto s1 = summarize(inst, w1);
    const auto s2 = summarize(inst, r2.w);
    EXPECT_LE((s1.beta_e - s2.beta_e).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(s1.gamma_e, s2.gamma_e, 1e-6);
}

TEST(Summarize, HandValues)
{
    const auto inst = duplicated_pair(2.0, 1.0);
    const auto zero = summarize(inst, vector_t::Zero(4));
    EXPECT_TRUE(zero.beta_e.isZero(0.0));
    EXPECT_EQ(zero.gamma_e, 0.0);
    vector_t w(4);
    w << 0.5, 0.5, 0, 0;
    const auto s = summarize(inst, w);
    EXPECT_DOUBLE_EQ(s.beta_p[0], 1.0);
    EXPECT_DOUBLE_EQ(s.gamma_e, 1.0);
}

TEST(L1Bound, Cases)
{
    const auto inst = gaussian_instance(4, 6, 0.3, 13, 0.3, true);
    EXPECT_TRUE(l1_bound_holds(inst, vector_t::Zero(12)));
    const auto sol = solve_saddle(inst);
    EXPECT_TRUE(l1_bound_holds(inst, sol.w));
    vector_t huge = vector_t::Zero(12);
    huge[0] = 1e9;
    EXPECT_FALSE(l1_bound_holds(inst, huge));
}

TEST(OptimalityProperties, FitsAndNormsAgreeAcrossSolutions)
{
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = gaussian_instance(3, 6, 0.2 + 0.03 * trial, 1000 + trial, 0.25, trial % 2 == 1);
        const auto mm = build_model_matrices(inst);
        vector_t start(12);
        for (index_t i = 0; i < 12; ++i) start[i] = g(rng);
        const auto a = solve_saddle(mm, inst.b(), inst.lambda);
        const auto b = solve_saddle(mm, inst.b(), inst.lambda, {}, start);
        ASSERT_TRUE(a.converged && b.converged);
        ASSERT_TRUE(check_opt(inst, a.w, 1e-8).satisfied);
        ASSERT_TRUE(check_opt(inst, b.w, 1e-8).satisfied);
        EXPECT_LE((mm.C * (a.w - b.w)).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(a.w.lpNorm<1>(), b.w.lpNorm<1>(), 1e-6);
        EXPECT_EQ(encode_sopt(inst, a.w, 1e-7), encode_sopt(inst, b.w, 1e-7));
        EXPECT_TRUE(l1_bound_holds(inst, a.w));
    }
}
