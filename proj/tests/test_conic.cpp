#include <starris/conic.hpp>
#include <starris/random.hpp>

#include <gtest/gtest.h>

#include <complex>
#include <memory>
#include <vector>

using namespace starris;
using namespace starris::conic;
using cd = std::complex<double>;

namespace
{
    std::vector<std::unique_ptr<ConvexBackend>> backends()
    {
        std::vector<std::unique_ptr<ConvexBackend>> b;
        b.push_back(make_backend(BackendKind::ComplexHkm));
        b.push_back(make_backend(BackendKind::RealEmbeddingNt));
        return b;
    }

    CMatrix random_hermitian(Rng &rng, Eigen::Index n)
    {
        CMatrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                a(i, j) = rng.complex_normal();
        return 0.5 * (a + a.adjoint());
    }

    CMatrix test_cost()
    {
        CMatrix C(3, 3);
        C << 2.0, cd(1, -1), 0.5,
             cd(1, 1), -3.0, cd(0, 1),
             0.5, cd(0, -1), 1.0;
        return C;
    }
}

TEST(ReTraceProduct, MatchesDefinition)
{
    Rng rng(1);
    CMatrix A = random_hermitian(rng, 4), V(4, 4);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            V(i, j) = rng.complex_normal();
    EXPECT_NEAR(detail::re_trace_product<cd>(A, V), (A * V).trace().real(), 1e-12);
}

TEST(ConicSolver, TraceConstraintGivesSmallestEigenvalue)
{
    Rng rng(2);
    for (auto &be : backends())
        for (int trial = 0; trial < 5; ++trial)
        {
            const CMatrix C = random_hermitian(rng, 5);
            Problem p;
            const auto x = p.add_block(5);
            p.add_objective(x, C);
            p.add_constraint({{x, CMatrix::Identity(5, 5)}}, Relation::Eq, 1.0);
            const auto sol = be->solve(p);
            ASSERT_EQ(sol.status, Status::Optimal) << be->name();
            Eigen::SelfAdjointEigenSolver<CMatrix> es(C);
            EXPECT_NEAR(sol.objective, es.eigenvalues()(0), 1e-7) << be->name();
            // optimum is the projector on the lowest eigenvector
            const CMatrix P = es.eigenvectors().col(0) * es.eigenvectors().col(0).adjoint();
            EXPECT_LT((sol.X[x] - P).norm(), 1e-4) << be->name();
        }
}

TEST(ConicSolver, ComplexUnitDiagonalReference)
{
    // Reference optimum from an independent conic solver
    for (auto &be : backends())
    {
        Problem p;
        const auto x = p.add_block(3);
        p.add_objective(x, test_cost());
        for (Eigen::Index i = 0; i < 3; ++i)
            p.add_constraint({{x, Problem::entry(3, i, i)}}, Relation::Eq, 1.0);
        const auto sol = be->solve(p);
        ASSERT_EQ(sol.status, Status::Optimal) << be->name();
        EXPECT_NEAR(sol.objective, -4.4772161, 1e-6) << be->name();
        for (Eigen::Index i = 0; i < 3; ++i)
            EXPECT_NEAR(sol.X[x](i, i).real(), 1.0, 1e-7);
    }
}

TEST(ConicSolver, InequalityReference)
{
    CMatrix A(3, 3);
    A << 1.0, cd(0, 0.5), 0.0,
         cd(0, -0.5), 2.0, 0.0,
         0.0, 0.0, 0.5;
    for (auto &be : backends())
    {
        Problem p;
        const auto x = p.add_block(3);
        p.add_objective(x, test_cost());
        p.add_constraint({{x, CMatrix::Identity(3, 3)}}, Relation::Eq, 2.0);
        p.add_constraint({{x, A}}, Relation::Le, 1.5);
        const auto sol = be->solve(p);
        ASSERT_EQ(sol.status, Status::Optimal) << be->name();
        EXPECT_NEAR(sol.objective, -1.3599597, 1e-6) << be->name();
        EXPECT_LE((A * sol.X[x]).trace().real(), 1.5 + 1e-7);
    }
}

TEST(ConicSolver, ScalarBlocksBehaveAsLinearProgram)
{
    for (auto &be : backends())
    {
        Problem p;
        const auto a = p.add_block(1);
        const auto b = p.add_block(1);
        p.add_objective(a, CMatrix::Constant(1, 1, 1.0));
        p.add_objective(b, CMatrix::Constant(1, 1, 2.0));
        p.add_constraint({{a, CMatrix::Ones(1, 1)}, {b, CMatrix::Ones(1, 1)}}, Relation::Ge, 1.0);
        p.add_constraint({{a, CMatrix::Ones(1, 1)}}, Relation::Le, 0.25);
        const auto sol = be->solve(p);
        ASSERT_EQ(sol.status, Status::Optimal) << be->name();
        EXPECT_NEAR(sol.X[a](0, 0).real(), 0.25, 1e-7);
        EXPECT_NEAR(sol.X[b](0, 0).real(), 0.75, 1e-7);
        EXPECT_NEAR(sol.objective, 1.75, 1e-7);
    }
}

TEST(ConicSolver, ImaginaryOffDiagonal)
{
    // min Tr X with Im X_12 = 1 gives X = [[1, i], [-i, 1]]
    CMatrix im(2, 2);
    im << 0.0, cd(0, 0.5), cd(0, -0.5), 0.0;
    for (auto &be : backends())
    {
        Problem p;
        const auto x = p.add_block(2);
        p.add_objective(x, CMatrix::Identity(2, 2));
        p.add_constraint({{x, im}}, Relation::Eq, 1.0);
        const auto sol = be->solve(p);
        ASSERT_EQ(sol.status, Status::Optimal) << be->name();
        EXPECT_NEAR(sol.objective, 2.0, 1e-7);
        EXPECT_NEAR(std::abs(sol.X[x](0, 1) - cd(0, 1)), 0.0, 1e-6) << be->name();
    }
}

TEST(ConicSolver, InfeasibleProblemNotReportedOptimal)
{
    for (auto &be : backends())
    {
        Problem p;
        const auto x = p.add_block(2);
        p.add_objective(x, CMatrix::Identity(2, 2));
        p.add_constraint({{x, CMatrix::Identity(2, 2)}}, Relation::Eq, 1.0);
        p.add_constraint({{x, Problem::entry(2, 0, 0)}}, Relation::Ge, 2.0);
        const auto sol = be->solve(p);
        EXPECT_FALSE(sol.usable()) << be->name() << " " << to_string(sol.status);
    }
}

TEST(ConicSolver, BackendsAgreeOnRandomProblems)
{
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial)
    {
        Problem p;
        const auto x = p.add_block(4);
        const auto y = p.add_block(2);
        p.add_objective(x, random_hermitian(rng, 4));
        p.add_objective(y, random_hermitian(rng, 2));
        p.add_constraint({{x, CMatrix::Identity(4, 4)}, {y, CMatrix::Identity(2, 2)}}, Relation::Eq, 3.0);
        for (int i = 0; i < 3; ++i)
        {
            const CMatrix a = random_hermitian(rng, 4);
            p.add_constraint({{x, a}, {y, random_hermitian(rng, 2)}}, Relation::Le, 1.0 + rng.uniform());
        }
        auto s1 = ComplexHkmBackend().solve(p);
        auto s2 = RealEmbeddingNtBackend().solve(p);
        ASSERT_TRUE(s1.usable());
        ASSERT_TRUE(s2.usable());
        EXPECT_NEAR(s1.objective, s2.objective, 1e-6 * std::max(1.0, std::abs(s1.objective)));
    }
}

TEST(ConicSolver, RejectsMismatchedCoefficients)
{
    Problem p;
    const auto x = p.add_block(2);
    EXPECT_THROW(p.add_objective(x, CMatrix::Identity(3, 3)), BadDimensions);
    EXPECT_THROW(p.add_constraint({{x + 1, CMatrix::Identity(2, 2)}}, Relation::Eq, 1.0), BadDimensions);
    EXPECT_THROW(p.add_block(0), BadDimensions);
}
