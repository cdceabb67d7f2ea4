// SPDX-License-Identifier: Apache-2.0
//
// starris - joint deployment and hybrid beamforming for STAR-RIS aided downlinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef STARRIS_EVOLVE_HPP
#define STARRIS_EVOLVE_HPP

#include "beamform.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "geom.hpp"
#include "grouping.hpp"
#include "random.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

// Differential evolution over the surface location. Each candidate location is completed by a
// boundary-user choice (balanced grouping), a beamforming design at the band midpoint, and a
// grid refinement of the orientation inside the band.

namespace starris
{
    inline constexpr double infeasible_violation = std::numeric_limits<double>::infinity();

    struct Individual
    {
        Vec3 s = Vec3::Zero();
        std::size_t c = 0;             // sorted position of the boundary user (0-based)
        std::size_t boundary_user = 0; // index into Scenario::users
        Band band;
        Orientation phi;
        std::vector<Side> grouping;
        HybridBeamforming beamforming;
        RateReport rates;
        double fitness = 0.0;                     // sum rate [bits/s/Hz]
        double violation = infeasible_violation; // QoS shortfall; +inf marks a failed evaluation
        std::string failure;                      // reason when the evaluation failed

        // QoS shortfalls up to this size are solver round-off
        static constexpr double feasibility_tol = 1e-6;

        bool feasible() const { return violation <= feasibility_tol; }
        bool failed() const { return std::isinf(violation); }
    };

    enum class CrossoverRule
    {
        Standard, // trial takes the mutant coordinate when rand < Cr or j = j_rand
        Literal   // trial keeps the parent coordinate when rand <= Cr or j = j_rand
    };

    enum class GroupingPolicy
    {
        Balanced, // roulette on the differential distance
        Uniform   // boundary user drawn uniformly among usable bands (RandGrouping)
    };

    struct DEConfig
    {
        std::size_t population = 20;
        std::size_t max_generations = 60; // the initial population counts as generation 1
        double F = 0.5;
        double Cr = 0.4;
        double grid = 0.1;     // orientation refinement step [rad]
        double grid_max = 0.2; // upper bound accepted for `grid`
        double offset = default_band_offset;
        CrossoverRule crossover = CrossoverRule::Standard;
        GroupingPolicy grouping = GroupingPolicy::Balanced;
        SelectionLaw law = SelectionLaw::InverseDistance;
        bool refine_initial = true;
        BeamformSettings beamform{};

        std::size_t budget() const { return population * max_generations; }

        void validate() const
        {
            if (population < 4)
                throw ConfigError("de.population", "must be at least 4");
            if (max_generations < 1)
                throw ConfigError("de.generations", "must be at least 1");
            if (!(F > 0.0))
                throw ConfigError("de.F", "must be positive");
            if (!(Cr >= 0.0 && Cr <= 1.0))
                throw ConfigError("de.Cr", "must lie in [0, 1]");
            if (!(grid > 0.0) || grid > grid_max)
                throw ConfigError("de.grid", "must lie in (0, grid_max]");
            if (!(offset >= 0.0))
                throw ConfigError("de.offset", "must be non-negative");
        }
    };

    inline Vec3 clamp_box(const Vec3 &s, const Box &box)
    {
        return s.cwiseMax(box.lo).cwiseMin(box.hi);
    }

    inline Vec3 uniform_in_box(const Box &box, Rng &rng)
    {
        return {rng.uniform(box.lo.x(), box.hi.x()), rng.uniform(box.lo.y(), box.hi.y()),
                rng.uniform(box.lo.z(), box.hi.z())};
    }

    // DE/best/1: s_best + F (s_a1 - s_a2) with a1, a2, i pairwise distinct
    inline Vec3 mutate(std::span<const Vec3> population, std::size_t i, std::size_t best, double F, Rng &rng)
    {
        const std::size_t n = population.size();
        if (n < 3)
            throw PopulationTooSmall("mutate: need at least 3 individuals, have " + std::to_string(n));
        if (i >= n || best >= n)
            throw BadDimensions("mutate: index out of range");
        std::size_t a1 = rng.index(n - 1);
        if (a1 >= i)
            ++a1;
        std::size_t a2 = rng.index(n - 2);
        const std::size_t lo = std::min(i, a1), hi = std::max(i, a1);
        if (a2 >= lo)
            ++a2;
        if (a2 >= hi)
            ++a2;
        return population[best] + F * (population[a1] - population[a2]);
    }

    inline Vec3 crossover(const Vec3 &parent, const Vec3 &mutant, double Cr, Rng &rng,
                          CrossoverRule rule = CrossoverRule::Standard)
    {
        const std::size_t j_rand = rng.index(3);
        Vec3 trial;
        for (std::size_t j = 0; j < 3; ++j)
        {
            const double u = rng.uniform();
            const auto jj = static_cast<Eigen::Index>(j);
            if (rule == CrossoverRule::Standard)
                trial(jj) = (u < Cr || j == j_rand) ? mutant(jj) : parent(jj);
            else
                trial(jj) = (u <= Cr || j == j_rand) ? parent(jj) : mutant(jj);
        }
        return trial;
    }

    // Feasibility rules: true when `cand` beats `inc`; ties go to the incumbent
    inline bool better(const Individual &cand, const Individual &inc)
    {
        const bool fc = cand.feasible(), fi = inc.feasible();
        if (fc && fi)
            return cand.fitness > inc.fitness;
        if (fc != fi)
            return fc;
        return cand.violation < inc.violation;
    }

    inline const Individual &compare(const Individual &a, const Individual &b)
    {
        return better(b, a) ? b : a;
    }

    inline void score(Individual &ind, const ChannelSet &cs, const LinkBudget &lb)
    {
        ind.rates = rates(cs, ind.beamforming.passive, ind.grouping, ind.beamforming.w, lb.noise_power, lb.r_min);
        ind.fitness = ind.rates.sum_rate;
        ind.violation = ind.rates.qos_violation;
    }

    namespace detail
    {
        inline std::vector<Side> complement(std::span<const Side> flags)
        {
            std::vector<Side> out;
            out.reserve(flags.size());
            for (auto f : flags)
                out.push_back(f == Side::Transmission ? Side::Reflection : Side::Transmission);
            return out;
        }

        inline bool same(std::span<const Side> a, std::span<const Side> b)
        {
            return std::equal(a.begin(), a.end(), b.begin(), b.end());
        }

        // Coefficients that keep every user on the vector it was designed with when the
        // labels of the two groups are swapped
        inline PassivePair aligned(const PassivePair &pp, std::span<const Side> designed, std::span<const Side> now)
        {
            if (same(designed, now))
                return pp;
            if (same(complement(designed), now))
                return {pp.theta_r, pp.theta_t};
            throw BadDimensions("aligned: groupings describe different partitions");
        }
    }

    // Grid search over the individual's band (and its half-turn copy, which yields the same
    // partition) with the beamforming fixed. The incumbent orientation competes too, so the
    // result never loses to the input. Bands narrower than the grid step are left alone.
    inline Individual refine_orientation(const Individual &ind, const Scenario &scn, const ChannelRealization &real,
                                         double grid)
    {
        if (ind.failed() || !(grid > 0.0) || ind.band.width() < grid)
            return ind;
        const LinkBudget lb = link_budget(scn);
        Individual best = ind;
        for (double half : {0.0, std::numbers::pi})
        {
            for (double t = ind.band.lo; t < ind.band.hi; t += grid)
            {
                const Orientation phi(t + half);
                std::vector<Side> flags;
                try
                {
                    flags = grouping_from_orientation(ind.s, phi, scn.users, scn.bs_location);
                }
                catch (const OnBoundary &)
                {
                    continue;
                }
                Individual cand = ind;
                try
                {
                    cand.beamforming.passive = detail::aligned(ind.beamforming.passive, ind.grouping, flags);
                }
                catch (const BadDimensions &)
                {
                    continue; // grid point on a band edge
                }
                cand.phi = phi;
                cand.grouping = std::move(flags);
                score(cand, real.at(ind.s, phi), lb);
                if (better(cand, best))
                    best = std::move(cand);
            }
        }
        return best;
    }

    inline Individual failed_individual(const Vec3 &s, const std::string &why)
    {
        Individual ind;
        ind.s = s;
        ind.failure = why;
        ind.violation = infeasible_violation;
        return ind;
    }

    // Completes a location with the boundary user at sorted position `c`: band midpoint,
    // beamforming (from `warm` when given, else random), then orientation refinement.
    inline Individual complete_deployment(const Vec3 &s, std::size_t c, const GroupingCandidates &gc,
                                          const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                          Rng &rng, conic::ConvexBackend &backend, bool refine = true,
                                          const Individual *warm = nullptr)
    {
        Individual ind;
        ind.s = s;
        ind.c = c;
        ind.boundary_user = gc.order.user_perm.at(c);
        ind.band = gc.bands.at(c);
        ind.phi = Orientation(ind.band.mid());
        try
        {
            ind.grouping = band_grouping(s, scn.users, scn.bs_location, ind.band, ind.band.mid());
            const ChannelSet cs = real.at(s, ind.phi);
            const LinkBudget lb = link_budget(scn);
            HybridBeamforming init;
            if (warm && !warm->failed())
            {
                init = warm->beamforming;
                init.passive = detail::aligned(warm->beamforming.passive, warm->grouping, ind.grouping);
            }
            else
                init = init_hybrid(rng, scn.n_antennas, scn.n_elements, scn.n_users(), scn.p_max);
            auto res = alternate(cs, ind.grouping, lb, backend, init, cfg.beamform);
            ind.beamforming = std::move(res.beamforming);
            score(ind, cs, lb);
        }
        catch (const Error &e)
        {
            return failed_individual(s, e.what());
        }
        return refine ? refine_orientation(ind, scn, real, cfg.grid) : ind;
    }

    inline std::size_t choose_boundary(const GroupingCandidates &gc, const DEConfig &cfg, Rng &rng)
    {
        if (cfg.grouping == GroupingPolicy::Balanced)
            return roulette(gc, rng, cfg.law);
        std::vector<std::size_t> usable;
        for (std::size_t c = 0; c < gc.usable.size(); ++c)
            if (gc.usable[c])
                usable.push_back(c);
        if (usable.empty())
            throw OnBoundary("choose_boundary: no orientation band yields a well-defined grouping");
        return usable[rng.index(usable.size())];
    }

    // One explored deployment: grouping choice, beamforming and refinement at location s
    inline Individual evaluate(const Vec3 &s, const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                               Rng &rng, conic::ConvexBackend &backend, bool refine = true)
    {
        try
        {
            const auto gc = grouping_candidates(s, scn.users, scn.bs_location, cfg.offset);
            const std::size_t c = choose_boundary(gc, cfg, rng);
            return complete_deployment(s, c, gc, scn, real, cfg, rng, backend, refine);
        }
        catch (const Error &e)
        {
            return failed_individual(s, e.what());
        }
    }

    struct GenerationRecord
    {
        std::size_t generation = 0; // 1-based
        std::size_t evaluations = 0;
        double best_fitness = 0.0;
        double best_violation = 0.0;
        double mean_fitness = 0.0; // over members that did not fail
    };

    struct SearchResult
    {
        Individual best;
        std::vector<GenerationRecord> trace;
        std::size_t evaluations = 0;
    };

    namespace detail
    {
        inline GenerationRecord record(std::size_t generation, std::size_t evaluations, const Individual &best,
                                       std::span<const Individual> pop)
        {
            GenerationRecord r{generation, evaluations, best.fitness, best.violation, 0.0};
            std::size_t n = 0;
            for (const auto &p : pop)
                if (!p.failed())
                {
                    r.mean_fitness += p.fitness;
                    ++n;
                }
            if (n)
                r.mean_fitness /= static_cast<double>(n);
            return r;
        }
    }

    // DEBG outer loop. Every evaluation draws from its own stream derived from (seed,
    // generation, index), so the result depends only on the inputs.
    inline SearchResult run_debg(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                 std::uint64_t seed, conic::ConvexBackend &backend)
    {
        cfg.validate();
        const std::size_t N = cfg.population;
        SearchResult out;
        std::vector<Individual> pop;
        pop.reserve(N);
        for (std::size_t i = 0; i < N; ++i)
        {
            Rng rng = Rng::stream(seed, {0, i});
            const Vec3 s = uniform_in_box(scn.deploy_box, rng);
            pop.push_back(evaluate(s, scn, real, cfg, rng, backend, cfg.refine_initial));
            ++out.evaluations;
        }
        auto best_index = [&]
        {
            std::size_t b = 0;
            for (std::size_t i = 1; i < N; ++i)
                if (better(pop[i], pop[b]))
                    b = i;
            return b;
        };
        std::size_t b = best_index();
        out.best = pop[b];
        out.trace.push_back(detail::record(1, out.evaluations, out.best, pop));

        std::vector<Vec3> locations(N);
        for (std::size_t g = 2; g <= cfg.max_generations; ++g)
        {
            for (std::size_t i = 0; i < N; ++i)
                locations[i] = pop[i].s;
            std::vector<Individual> offspring;
            offspring.reserve(N);
            for (std::size_t i = 0; i < N; ++i)
            {
                Rng rng = Rng::stream(seed, {g, i});
                const Vec3 v = mutate(locations, i, b, cfg.F, rng);
                const Vec3 trial = clamp_box(crossover(locations[i], v, cfg.Cr, rng, cfg.crossover), scn.deploy_box);
                offspring.push_back(evaluate(trial, scn, real, cfg, rng, backend));
                ++out.evaluations;
            }
            for (std::size_t i = 0; i < N; ++i)
                if (better(offspring[i], pop[i]))
                    pop[i] = std::move(offspring[i]);
            b = best_index();
            if (better(pop[b], out.best))
                out.best = pop[b];
            out.trace.push_back(detail::record(g, out.evaluations, out.best, pop));
        }
        return out;
    }
}

#endif
