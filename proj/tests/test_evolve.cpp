#include <starris/evolve.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

using namespace starris;

namespace
{
    constexpr double pi = std::numbers::pi;

    Scenario tiny_scenario(std::size_t K = 3)
    {
        Scenario scn;
        const std::vector<Vec3> all{Vec3(30, -5, 0), Vec3(62, 9, 0), Vec3(33, -2, 0), Vec3(70, 0, 0)};
        scn.users.assign(all.begin(), all.begin() + static_cast<long>(K));
        scn.deploy_box = {Vec3(25, -10, 2), Vec3(80, 20, 2)};
        scn.n_elements = 2;
        scn.n_rows = 1;
        scn.n_antennas = 2;
        return scn;
    }

    DEConfig small_config()
    {
        DEConfig cfg;
        cfg.population = 4;
        cfg.max_generations = 3;
        cfg.beamform.max_iterations = 10;
        return cfg;
    }

    Individual with(double fitness, double violation)
    {
        Individual ind;
        ind.fitness = fitness;
        ind.violation = violation;
        return ind;
    }
}

TEST(Mutate, ZeroDifferenceGivesBest)
{
    Rng rng(1);
    const std::vector<Vec3> pop{Vec3(1, 2, 2), Vec3(5, 5, 2), Vec3(5, 5, 2), Vec3(5, 5, 2)};
    for (int t = 0; t < 20; ++t)
        EXPECT_EQ(mutate(pop, 0, 0, 0.5, rng), Vec3(1, 2, 2));
}

TEST(Mutate, Arithmetic)
{
    // with three members and i = 0 the donors are {1, 2} in either order
    Rng rng(2);
    const std::vector<Vec3> pop{Vec3(0, 0, 2), Vec3(3, 5, 2), Vec3(1, 1, 2)};
    bool plus = false, minus = false;
    for (int t = 0; t < 50; ++t)
    {
        const Vec3 v = mutate(pop, 0, 0, 0.5, rng);
        if (v.isApprox(Vec3(1, 2, 2)))
            plus = true;
        else if (v.isApprox(Vec3(-1, -2, 2)))
            minus = true;
        else
            ADD_FAILURE() << v.transpose();
    }
    EXPECT_TRUE(plus && minus);
}

TEST(Mutate, ZeroFactorCollapsesOntoBest)
{
    Rng rng(3);
    const std::vector<Vec3> pop{Vec3(30, 0, 2), Vec3(40, 1, 2), Vec3(50, 2, 2), Vec3(60, 3, 2), Vec3(70, 4, 2)};
    for (std::size_t i = 0; i < pop.size(); ++i)
        EXPECT_EQ(mutate(pop, i, 3, 0.0, rng), pop[3]);
}

TEST(Mutate, DonorPairsAreUniform)
{
    const std::size_t N = 5, i = 2;
    std::vector<Vec3> pop(N);
    for (std::size_t k = 0; k < N; ++k)
        pop[k] = k == i ? Vec3::Zero() : Vec3(10.0 * double(k), double(k * k), 0);
    Rng rng(4);
    std::map<std::pair<long, long>, int> counts;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t)
    {
        const Vec3 v = mutate(pop, i, i, 1.0, rng);
        long a1 = -1, a2 = -1;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = 0; q < N; ++q)
                if (p != q && p != i && q != i && (pop[p] - pop[q]).isApprox(v))
                    a1 = long(p), a2 = long(q);
        ASSERT_GE(a1, 0);
        ++counts[{a1, a2}];
    }
    ASSERT_EQ(counts.size(), 12u);
    const double expect = draws / 12.0, sigma = std::sqrt(draws * (1.0 / 12) * (11.0 / 12));
    for (const auto &[pair, n] : counts)
        EXPECT_NEAR(n, expect, 3 * sigma);
}

TEST(Mutate, NeedsThreeMembers)
{
    Rng rng(5);
    const std::vector<Vec3> pop{Vec3::Zero(), Vec3::Ones()};
    EXPECT_THROW(mutate(pop, 0, 0, 0.5, rng), PopulationTooSmall);
}

TEST(Crossover, RateOneCopiesMutant)
{
    Rng rng(6);
    const Vec3 p(1, 2, 3), v(4, 5, 6);
    for (int t = 0; t < 50; ++t)
        EXPECT_EQ(crossover(p, v, 1.0, rng), v);
}

TEST(Crossover, RateZeroTakesExactlyOneCoordinate)
{
    Rng rng(7);
    const Vec3 p(1, 2, 3), v(4, 5, 6);
    for (int t = 0; t < 200; ++t)
    {
        const Vec3 trial = crossover(p, v, 0.0, rng);
        int from_mutant = 0;
        for (int j = 0; j < 3; ++j)
            from_mutant += trial(j) == v(j);
        EXPECT_EQ(from_mutant, 1);
    }
}

TEST(Crossover, InheritanceFrequency)
{
    Rng rng(8);
    const Vec3 p(0, 0, 0), v(1, 1, 1);
    const int draws = 10000;
    Vec3 hits = Vec3::Zero();
    for (int t = 0; t < draws; ++t)
        hits += crossover(p, v, 0.4, rng);
    const double q = 0.4 + 0.6 / 3.0;
    const double sigma = std::sqrt(draws * q * (1 - q));
    for (int j = 0; j < 3; ++j)
        EXPECT_NEAR(hits(j), draws * q, 3 * sigma);
}

TEST(Crossover, LiteralRuleKeepsParentAtRateOne)
{
    Rng rng(9);
    const Vec3 p(1, 2, 3), v(4, 5, 6);
    EXPECT_EQ(crossover(p, v, 1.0, rng, CrossoverRule::Literal), p);
}

TEST(ClampBox, Examples)
{
    const Box box{Vec3(25, -10, 2), Vec3(80, 20, 2)};
    EXPECT_EQ(clamp_box(Vec3(50, 0, 2), box), Vec3(50, 0, 2));
    EXPECT_EQ(clamp_box(Vec3(100, 0, 2), box), Vec3(80, 0, 2));
    const Vec3 once = clamp_box(Vec3(-4, 33, 7), box);
    EXPECT_EQ(once, Vec3(25, 20, 2));
    EXPECT_EQ(clamp_box(once, box), once);
}

TEST(Compare, FeasibilityRules)
{
    EXPECT_EQ(compare(with(60, 0), with(65, 0)).fitness, 65);
    EXPECT_EQ(compare(with(10, 0), with(100, 0.01)).fitness, 10);
    EXPECT_EQ(compare(with(1, 0.2), with(2, 0.1)).violation, 0.1);
}

TEST(Compare, TiesAndFailuresKeepIncumbent)
{
    const Individual a = with(5, 0), b = with(5, 0);
    EXPECT_EQ(&compare(a, b), &a);
    const Individual fa = with(0, infeasible_violation), fb = with(9, infeasible_violation);
    EXPECT_EQ(&compare(fa, fb), &fa);
    EXPECT_FALSE(better(fb, with(0, 1e6)));
    EXPECT_TRUE(with(3, 5e-7).feasible());
}

TEST(Evaluate, InvariantsAndSelfConsistency)
{
    const auto scn = tiny_scenario();
    Rng crng(10);
    const auto real = ChannelRealization::draw(scn, crng, false);
    const auto cfg = small_config();
    conic::ComplexHkmBackend be;
    for (std::uint64_t t = 0; t < 4; ++t)
    {
        Rng rng = Rng::stream(77, {t});
        const Vec3 s = uniform_in_box(scn.deploy_box, rng);
        const auto ind = evaluate(s, scn, real, cfg, rng, be);
        ASSERT_FALSE(ind.failed()) << ind.failure;
        EXPECT_TRUE(scn.deploy_box.contains(ind.s));
        EXPECT_TRUE(ind.band.contains(ind.phi.roll()));
        EXPECT_EQ(ind.grouping, grouping_from_orientation(ind.s, ind.phi, scn.users, scn.bs_location));
        const auto r = rates(real.at(ind.s, ind.phi), ind.beamforming.passive, ind.grouping, ind.beamforming.w,
                             scn.constants.noise_power, scn.r_min);
        EXPECT_NEAR(r.sum_rate, ind.fitness, 1e-6);
        EXPECT_NEAR(r.qos_violation, ind.violation, 1e-6);
        EXPECT_LT(ind.beamforming.passive.max_coupling_error(), 1e-9);
    }
}

TEST(Evaluate, Deterministic)
{
    const auto scn = tiny_scenario();
    Rng crng(11);
    const auto real = ChannelRealization::draw(scn, crng, false);
    const auto cfg = small_config();
    conic::ComplexHkmBackend b1, b2;
    Rng r1 = Rng::stream(5, {1}), r2 = Rng::stream(5, {1});
    const auto a = evaluate(Vec3(50, 3, 2), scn, real, cfg, r1, b1);
    const auto b = evaluate(Vec3(50, 3, 2), scn, real, cfg, r2, b2);
    EXPECT_EQ(a.fitness, b.fitness);
    EXPECT_EQ(a.phi.roll(), b.phi.roll());
    EXPECT_EQ(a.c, b.c);
    EXPECT_EQ((a.beamforming.w[0] - b.beamforming.w[0]).norm(), 0.0);
}

TEST(Evaluate, SingleUserHasOneBoundary)
{
    const auto scn = tiny_scenario(1);
    Rng crng(12);
    const auto real = ChannelRealization::draw(scn, crng, true);
    const auto cfg = small_config();
    conic::ComplexHkmBackend be;
    Rng rng(3);
    const auto ind = evaluate(Vec3(40, 0, 2), scn, real, cfg, rng, be, false);
    EXPECT_EQ(ind.c, 0u);
    EXPECT_EQ(ind.boundary_user, 0u);
    const auto r = rates(real.at(ind.s, ind.phi), ind.beamforming.passive, ind.grouping, ind.beamforming.w,
                         scn.constants.noise_power, scn.r_min);
    EXPECT_NEAR(ind.fitness, r.sum_rate, 1e-9);
}

TEST(RefineOrientation, NeverWorseAndNearDenseGrid)
{
    auto scn = tiny_scenario();
    scn.p_max = 10.0; // QoS reachable with two elements, so fitness is comparable
    Rng crng(13);
    const auto real = ChannelRealization::draw(scn, crng, false);
    const auto cfg = small_config();
    conic::ComplexHkmBackend be;
    int compared = 0;
    for (std::uint64_t t = 0; t < 6; ++t)
    {
        Rng rng = Rng::stream(99, {t});
        const Vec3 s = uniform_in_box(scn.deploy_box, rng);
        const auto raw = evaluate(s, scn, real, cfg, rng, be, false);
        if (raw.failed())
            continue;
        const auto coarse = refine_orientation(raw, scn, real, cfg.grid);
        EXPECT_FALSE(better(raw, coarse));
        if (raw.band.width() < cfg.grid || !coarse.feasible())
            continue;
        const auto dense = refine_orientation(raw, scn, real, cfg.grid / 100);
        EXPECT_GE(coarse.fitness, 0.99 * dense.fitness) << "instance " << t;
        ++compared;
    }
    EXPECT_GT(compared, 0);
}

TEST(RefineOrientation, NarrowBandUnchanged)
{
    const auto scn = tiny_scenario();
    Rng crng(14);
    const auto real = ChannelRealization::draw(scn, crng, false);
    auto cfg = small_config();
    conic::ComplexHkmBackend be;
    Rng rng(1);
    const auto raw = evaluate(Vec3(45, 0, 2), scn, real, cfg, rng, be, false);
    ASSERT_FALSE(raw.failed());
    const auto out = refine_orientation(raw, scn, real, raw.band.width() * 1.5);
    EXPECT_EQ(out.phi.roll(), raw.phi.roll());
    EXPECT_EQ(out.fitness, raw.fitness);
}

TEST(RunDebg, BudgetTraceAndDeterminism)
{
    const auto scn = tiny_scenario();
    Rng crng(15);
    const auto real = ChannelRealization::draw(scn, crng, false);
    const auto cfg = small_config();
    conic::ComplexHkmBackend be;
    const auto a = run_debg(scn, real, cfg, 42, be);
    EXPECT_EQ(a.evaluations, cfg.budget());
    ASSERT_EQ(a.trace.size(), cfg.max_generations);
    for (std::size_t g = 1; g < a.trace.size(); ++g)
    {
        Individual prev = with(a.trace[g - 1].best_fitness, a.trace[g - 1].best_violation);
        Individual now = with(a.trace[g].best_fitness, a.trace[g].best_violation);
        EXPECT_FALSE(better(prev, now)) << "generation " << g + 1;
    }
    EXPECT_TRUE(scn.deploy_box.contains(a.best.s));
    const auto b = run_debg(scn, real, cfg, 42, be);
    EXPECT_EQ(a.best.fitness, b.best.fitness);
    EXPECT_EQ(a.best.s, b.best.s);
}

TEST(DEConfig, Validation)
{
    DEConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.budget(), 1200u);
    cfg.population = 3;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.Cr = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.grid = 0.3;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
