#include <starris/beamform.hpp>
#include <starris/grouping.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace starris;

namespace
{
    constexpr double pi = std::numbers::pi;

    CVector random_vector(Rng &rng, Eigen::Index n)
    {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = rng.complex_normal();
        return v;
    }

    // Synthetic channel set with unit-variance entries and a common path loss
    ChannelSet synthetic(Rng &rng, Eigen::Index M, Eigen::Index Na, std::size_t K, double loss = 1e-10)
    {
        ChannelSet cs;
        cs.G.resize(M, Na);
        for (Eigen::Index i = 0; i < M; ++i)
            for (Eigen::Index j = 0; j < Na; ++j)
                cs.G(i, j) = rng.complex_normal();
        for (std::size_t k = 0; k < K; ++k)
        {
            cs.v.push_back(random_vector(rng, M));
            cs.path_loss.push_back(loss);
        }
        return cs;
    }

    Scenario desk_scenario(std::size_t M, std::size_t Na)
    {
        Scenario scn;
        scn.users = {Vec3(28, -6, 0), Vec3(32, -3, 0), Vec3(60, 8, 0), Vec3(70, 2, 0)};
        scn.deploy_box = {Vec3(25, -10, 2), Vec3(80, 20, 2)};
        scn.n_elements = M;
        scn.n_rows = 2;
        scn.n_antennas = Na;
        return scn;
    }

    double f_rate(double A, double B) { return std::log2(1.0 + 1.0 / (A * B)); }

    std::vector<Side> sides_for(const Scenario &scn, const Vec3 &s, double phi)
    {
        return grouping_from_orientation(s, Orientation(phi), scn.users, scn.bs_location);
    }
}

TEST(InitHybrid, CouplingAndPower)
{
    Rng rng(3);
    const auto g = init_hybrid(rng, 3, 6, 4, 0.1);
    ASSERT_EQ(g.w.size(), 4u);
    EXPECT_EQ(g.passive.theta_t.size(), 6);
    EXPECT_LT(g.passive.max_coupling_error(), 1e-12);
    for (Eigen::Index m = 0; m < 6; ++m)
        EXPECT_NEAR(std::norm(g.passive.theta_t(m)), 0.5, 1e-12);
    EXPECT_NEAR(g.total_power(), 0.1, 1e-12);
    for (const auto &wk : g.w)
        EXPECT_NEAR(wk.squaredNorm(), 0.025, 1e-12);
}

TEST(InitHybrid, DeterministicAndChecked)
{
    Rng a(11), b(11);
    const auto ga = init_hybrid(a, 2, 4, 2, 1.0);
    const auto gb = init_hybrid(b, 2, 4, 2, 1.0);
    EXPECT_EQ((ga.passive.theta_r - gb.passive.theta_r).norm(), 0.0);
    EXPECT_EQ((ga.w[1] - gb.w[1]).norm(), 0.0);
    EXPECT_THROW(init_hybrid(a, 0, 4, 2, 1.0), BadDimensions);
    EXPECT_THROW(init_hybrid(a, 2, 4, 0, 1.0), BadDimensions);
}

TEST(Slack, ReciprocalProductIsSinr)
{
    Rng rng(5);
    const auto cs = synthetic(rng, 4, 2, 3);
    const auto g = init_hybrid(rng, 2, 4, 3, 0.1);
    const std::vector<Side> grouping{Side::Transmission, Side::Reflection, Side::Transmission};
    const auto s = slack_from(g, cs, grouping, 1e-12);
    const auto r = rates(cs, g.passive, grouping, g.w, 1e-12, 0.0);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(f_rate(s.A[k], s.B[k]), r.per_user_rate[k], 1e-9);
}

TEST(Slack, MismatchedSizesThrow)
{
    std::vector<CRowVector> h(2, CRowVector::Ones(2));
    std::vector<CVector> w(1, CVector::Ones(2));
    EXPECT_THROW(slack_from(h, w, 1.0), BadDimensions);
}

TEST(TaylorBound, ExactAtExpansionPoint)
{
    for (double A : {0.01, 0.3, 1.0, 7.0})
        for (double B : {1.0, 1.5, 40.0})
            EXPECT_NEAR(taylor_rate_lb(A, B, A, B), f_rate(A, B), 1e-12);
}

TEST(TaylorBound, UnitPointClosedForm)
{
    const double c = std::numbers::log2e / 2.0;
    for (double A : {0.5, 1.0, 2.0})
        for (double B : {0.5, 1.0, 3.0})
            EXPECT_NEAR(taylor_rate_lb(A, B, 1.0, 1.0), 1.0 - c * (A - 1.0) - c * (B - 1.0), 1e-12);
}

TEST(TaylorBound, GlobalUnderestimator)
{
    Rng rng(17);
    for (int i = 0; i < 1000; ++i)
    {
        const double Ah = std::exp(rng.uniform(-5, 3)), Bh = std::exp(rng.uniform(0, 4));
        const double A = std::exp(rng.uniform(-5, 3)), B = std::exp(rng.uniform(0, 4));
        EXPECT_LE(taylor_rate_lb(A, B, Ah, Bh), f_rate(A, B) + 1e-9);
    }
}

TEST(TaylorBound, GradientMatchesFiniteDifference)
{
    const double A = 0.7, B = 2.5, h = 1e-6;
    const double dA = (taylor_rate_lb(A + h, B, A, B) - taylor_rate_lb(A - h, B, A, B)) / (2 * h);
    const double dB = (taylor_rate_lb(A, B + h, A, B) - taylor_rate_lb(A, B - h, A, B)) / (2 * h);
    EXPECT_NEAR(dA, (f_rate(A + h, B) - f_rate(A - h, B)) / (2 * h), 1e-6);
    EXPECT_NEAR(dB, (f_rate(A, B + h) - f_rate(A, B - h)) / (2 * h), 1e-6);
}

TEST(RankOne, ExtractsExactRankOne)
{
    Rng rng(2);
    const CVector v = random_vector(rng, 5);
    const CMatrix H = v * v.adjoint();
    EXPECT_NEAR(rank1_ratio(H), 1.0, 1e-12);
    const CVector e = extract_rank1(H);
    EXPECT_NEAR((e * e.adjoint() - H).norm() / H.norm(), 0.0, 1e-10);
}

TEST(RankOne, RejectsFullRank)
{
    const CMatrix I = CMatrix::Identity(4, 4);
    EXPECT_NEAR(rank1_ratio(I), 0.25, 1e-12);
    EXPECT_THROW(extract_rank1(I), NotNearRank1);
}

TEST(RankOne, NegligibleMatrixCountsAsRankOne)
{
    const CMatrix tiny = 1e-9 * CMatrix::Identity(3, 3);
    EXPECT_TRUE(negligible(tiny));
    EXPECT_EQ(rank1_ratio(tiny), 1.0);
    EXPECT_EQ(extract_rank1(CMatrix::Zero(3, 3)).norm(), 0.0);
}

TEST(ProjectCoupling, Examples)
{
    CVector t(3), r(3);
    t << 0.6, std::complex<double>(0, 3), 1.0;
    r << 0.6, 4.0, 0.0;
    const auto pp = project_coupling(t, r);
    EXPECT_NEAR(std::abs(pp.theta_t(0)), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(std::abs(pp.theta_t(1) - std::complex<double>(0, 0.6)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(pp.theta_r(1) - 0.8), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(pp.theta_t(2)), 1.0, 1e-12);
    EXPECT_LT(pp.max_coupling_error(), 1e-12);
}

TEST(ProjectCoupling, DegenerateElement)
{
    CVector t = CVector::Zero(2), r = CVector::Zero(2);
    t(0) = 1.0;
    EXPECT_THROW(project_coupling(t, r), DegenerateElement);
    const auto pp = project_coupling(t, r, DegeneratePolicy::Split);
    EXPECT_NEAR(std::norm(pp.theta_t(1)), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(pp.theta_r(1)), 0.5, 1e-12);
    EXPECT_THROW(project_coupling(CVector::Ones(2), CVector::Ones(3)), BadDimensions);
}

TEST(SolveActive, SingleUserReachesMaximumRatioTransmission)
{
    Rng rng(8);
    for (auto kind : {conic::BackendKind::ComplexHkm, conic::BackendKind::RealEmbeddingNt})
    {
        const auto cs = synthetic(rng, 3, 3, 1);
        const auto init = init_hybrid(rng, 3, 3, 1, 0.1);
        const std::vector<Side> grouping{Side::Transmission};
        const LinkBudget lb{0.1, 1e-12, 0.1};
        auto be = conic::make_backend(kind, {});
        const auto out = solve_active(cs, grouping, init, lb, *be);
        const auto h = cascaded_channel(cs, 0, init.passive, Side::Transmission);
        const double mrt = std::log2(1.0 + lb.p_max * h.squaredNorm() / lb.noise_power);
        EXPECT_NEAR(out.rates.sum_rate, mrt, 1e-3) << be->name();
        EXPECT_NEAR(out.active.w[0].squaredNorm(), lb.p_max, 1e-6 * lb.p_max) << be->name();
    }
}

TEST(SolveActive, PowerBudgetHolds)
{
    Rng rng(9);
    conic::ComplexHkmBackend be;
    const auto cs = synthetic(rng, 4, 2, 3);
    const auto init = init_hybrid(rng, 2, 4, 3, 0.1);
    const std::vector<Side> grouping{Side::Transmission, Side::Reflection, Side::Reflection};
    const auto out = solve_active(cs, grouping, init, {0.1, 1e-12, 0.1}, be);
    double total = 0.0;
    for (const auto &wk : out.active.w)
        total += wk.squaredNorm();
    EXPECT_LE(total, 0.1 * (1 + 1e-6));
    double lifted = 0.0;
    for (const auto &W : out.active.W)
    {
        lifted += W.trace().real();
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<CMatrix>(W).eigenvalues()(0), -1e-6);
    }
    EXPECT_LE(lifted, 1.0 + 1e-6);
}

TEST(SolveActive, TangentSurrogateIsALowerBound)
{
    Rng rng(10);
    conic::ComplexHkmBackend be;
    const auto cs = synthetic(rng, 4, 2, 2);
    const auto init = init_hybrid(rng, 2, 4, 2, 0.1);
    const std::vector<Side> grouping{Side::Transmission, Side::Reflection};
    const auto out = solve_active(cs, grouping, init, {0.1, 1e-12, 0.0}, be);
    // the surrogate refers to the lifted solution, which is rank one here
    EXPECT_LE(out.surrogate, out.rates.sum_rate + 1e-4);
    const auto before = rates(cs, init.passive, grouping, init.w, 1e-12, 0.0);
    EXPECT_GE(out.rates.sum_rate, before.sum_rate - 1e-6);
}

TEST(SolveActive, UnreachableQosIsInfeasibleWhenEnforced)
{
    Rng rng(12);
    conic::ComplexHkmBackend be;
    const auto cs = synthetic(rng, 2, 2, 2);
    const auto init = init_hybrid(rng, 2, 2, 2, 0.1);
    const std::vector<Side> grouping{Side::Transmission, Side::Transmission};
    BeamformSettings st;
    st.qos = QosMode::Enforced;
    EXPECT_THROW(solve_active(cs, grouping, init, {0.1, 1e-12, 1e3}, be, st), SolverInfeasible);
    st.qos = QosMode::Elastic;
    const auto out = solve_active(cs, grouping, init, {0.1, 1e-12, 1e3}, be, st);
    EXPECT_GT(out.rates.qos_violation, 0.0);
}

TEST(SolvePassive, SingleElementUsesFullAmplitude)
{
    Rng rng(13);
    conic::ComplexHkmBackend be;
    const auto cs = synthetic(rng, 1, 2, 1);
    const auto init = init_hybrid(rng, 2, 1, 1, 0.1);
    const std::vector<Side> grouping{Side::Reflection};
    const LinkBudget lb{0.1, 1e-12, 0.0};
    const auto out = solve_passive(cs, grouping, init, lb, be);
    EXPECT_NEAR(std::abs(out.passive.theta_r(0)), 1.0, 1e-3);
    const double g = cs.path_loss[0] * std::norm(cs.v[0](0)) * std::norm((cs.G * init.w[0])(0));
    EXPECT_NEAR(out.rates.sum_rate, std::log2(1.0 + g / lb.noise_power), 1e-3);
}

TEST(SolvePassive, TwoElementsMatchAmplitudeGrid)
{
    // One antenna, one user per side: phases align per side, so the optimum is a search over
    // the two transmission amplitudes
    Rng rng(21);
    conic::ComplexHkmBackend be;
    for (int trial = 0; trial < 3; ++trial)
    {
        const auto cs = synthetic(rng, 2, 1, 2, 3e-11);
        auto g = init_hybrid(rng, 1, 2, 2, 0.1);
        const std::vector<Side> grouping{Side::Transmission, Side::Reflection};
        const LinkBudget lb{0.1, 1e-12, 0.0};

        Eigen::Vector2d a, b; // |per-element gain| for each user
        for (int m = 0; m < 2; ++m)
        {
            a(m) = std::abs(cs.v[0](m) * cs.G(m, 0));
            b(m) = std::abs(cs.v[1](m) * cs.G(m, 0));
        }
        const double p0 = g.w[0].squaredNorm(), p1 = g.w[1].squaredNorm();
        auto sum_rate = [&](double b1, double b2)
        {
            const double ht = cs.path_loss[0] * std::pow(std::sqrt(b1) * a(0) + std::sqrt(b2) * a(1), 2);
            const double hr = cs.path_loss[1] * std::pow(std::sqrt(1 - b1) * b(0) + std::sqrt(1 - b2) * b(1), 2);
            return std::log2(1 + ht * p0 / (ht * p1 + lb.noise_power)) +
                   std::log2(1 + hr * p1 / (hr * p0 + lb.noise_power));
        };
        double best = 0.0;
        const int n = 512;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                best = std::max(best, sum_rate(double(i) / n, double(j) / n));

        double got = 0.0;
        for (int it = 0; it < 15; ++it)
        {
            const auto out = solve_passive(cs, grouping, g, lb, be);
            g.passive = out.passive;
            got = out.rates.sum_rate;
        }
        EXPECT_GE(got, 0.99 * best) << "trial " << trial;
        EXPECT_LE(got, best + 1e-3) << "trial " << trial;
    }
}

TEST(SolvePassive, CouplingAndRankInvariants)
{
    const auto scn = desk_scenario(8, 2);
    Rng rng(30);
    const auto real = ChannelRealization::draw(scn, rng, false);
    const Vec3 s(50, 0, 2);
    const double phi = 0.4;
    const auto cs = real.at(s, Orientation(phi));
    const auto grouping = sides_for(scn, s, phi);
    conic::ComplexHkmBackend be;
    const auto init = init_hybrid(rng, 2, 8, 4, scn.p_max);
    const auto out = solve_passive(cs, grouping, init, link_budget(scn), be);
    EXPECT_LT(out.passive.max_coupling_error(), 1e-9);
    EXPECT_GE(std::min(out.rank_ratio_t, out.rank_ratio_r), 0.999);
    EXPECT_GE(out.tightening_steps, 1);
    for (Eigen::Index m = 0; m < 8; ++m)
        EXPECT_NEAR((out.lift.theta_hat_t(m, m) + out.lift.theta_hat_r(m, m)).real(), 1.0, 1e-6);
}

TEST(Alternate, SingleElementSingleUserAnalytic)
{
    Rng rng(40);
    conic::ComplexHkmBackend be;
    const auto cs = synthetic(rng, 1, 2, 1);
    const std::vector<Side> grouping{Side::Transmission};
    const LinkBudget lb{0.1, 1e-12, 0.1};
    const auto res = alternate(cs, grouping, lb, be, rng);
    // |theta| = 1 and MRT: L |v|^2 ||G||^2 P / noise
    const double opt = std::log2(1.0 + cs.path_loss[0] * std::norm(cs.v[0](0)) * cs.G.row(0).squaredNorm() *
                                           lb.p_max / lb.noise_power);
    EXPECT_NEAR(res.rates.sum_rate, opt, 1e-3);
    EXPECT_TRUE(res.converged);
}

TEST(Alternate, MonotoneWithInvariants)
{
    const auto scn = desk_scenario(8, 2);
    conic::ComplexHkmBackend be;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        Rng rng(100 + seed);
        const auto real = ChannelRealization::draw(scn, rng, false);
        const Vec3 s(rng.uniform(25, 80), rng.uniform(-10, 20), 2);
        const double phi = rng.uniform(0, 2 * pi);
        std::vector<Side> grouping;
        try
        {
            grouping = sides_for(scn, s, phi);
        }
        catch (const OnBoundary &)
        {
            continue;
        }
        const auto cs = real.at(s, Orientation(phi));
        const auto res = alternate(cs, grouping, link_budget(scn), be, rng);
        for (std::size_t i = 1; i < res.merit_trace.size(); ++i)
            EXPECT_GE(res.merit_trace[i], res.merit_trace[i - 1] - 1e-6) << "seed " << seed;
        EXPECT_LE(res.beamforming.total_power(), scn.p_max * (1 + 1e-6));
        EXPECT_LT(res.beamforming.passive.max_coupling_error(), 1e-9);
        const auto check = rates(cs, res.beamforming.passive, grouping, res.beamforming.w,
                                 scn.constants.noise_power, scn.r_min);
        EXPECT_NEAR(check.sum_rate, res.rates.sum_rate, 1e-9);
        EXPECT_NEAR(merit(check, BeamformSettings{}), res.merit_trace.back(), 1e-9);
    }
}

TEST(Alternate, BackendsAgree)
{
    const auto scn = desk_scenario(4, 2);
    Rng rng(55);
    const auto real = ChannelRealization::draw(scn, rng, false);
    const Vec3 s(45, 2, 2);
    const double phi = 1.1;
    const auto cs = real.at(s, Orientation(phi));
    const auto grouping = sides_for(scn, s, phi);
    const auto init = init_hybrid(rng, 2, 4, 4, scn.p_max);
    auto a = conic::make_backend(conic::BackendKind::ComplexHkm, {});
    auto b = conic::make_backend(conic::BackendKind::RealEmbeddingNt, {});
    const auto ra = alternate(cs, grouping, link_budget(scn), *a, init);
    const auto rb = alternate(cs, grouping, link_budget(scn), *b, init);
    EXPECT_NEAR(ra.rates.sum_rate, rb.rates.sum_rate, 1e-3 * std::max(1.0, ra.rates.sum_rate));
}

TEST(Alternate, ZeroIterationsKeepsInit)
{
    Rng rng(60);
    conic::ComplexHkmBackend be;
    const auto cs = synthetic(rng, 2, 2, 2);
    const auto init = init_hybrid(rng, 2, 2, 2, 0.1);
    const std::vector<Side> grouping{Side::Transmission, Side::Reflection};
    BeamformSettings st;
    st.max_iterations = 0;
    const auto res = alternate(cs, grouping, {0.1, 1e-12, 0.1}, be, init, st);
    EXPECT_EQ(res.merit_trace.size(), 1u);
    EXPECT_EQ((res.beamforming.w[0] - init.w[0]).norm(), 0.0);
}
