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

#ifndef STARRIS_HARNESS_HPP
#define STARRIS_HARNESS_HPP

#include "beamform.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "evolve.hpp"
#include "grouping.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Baselines, robustness evaluation, the brute-force oracle and the experiment driver.
// Every algorithm gets the same number of explored deployments (population x generations).

namespace starris
{
    enum class Algorithm
    {
        Debg,
        RandBeamforming,
        RandDeploy,
        RandLoc,
        RandGrouping,
        AoFixedGrouping
    };

    inline constexpr Algorithm all_algorithms[] = {Algorithm::Debg,        Algorithm::RandBeamforming,
                                                   Algorithm::RandDeploy,  Algorithm::RandLoc,
                                                   Algorithm::RandGrouping, Algorithm::AoFixedGrouping};

    inline std::string_view algorithm_id(Algorithm a)
    {
        switch (a)
        {
        case Algorithm::Debg: return "debg";
        case Algorithm::RandBeamforming: return "rand-beamforming";
        case Algorithm::RandDeploy: return "rand-deploy";
        case Algorithm::RandLoc: return "rand-loc";
        case Algorithm::RandGrouping: return "rand-grouping";
        case Algorithm::AoFixedGrouping: return "ao-fixed";
        }
        return "?";
    }

    inline Algorithm parse_algorithm(std::string_view id)
    {
        for (auto a : all_algorithms)
            if (algorithm_id(a) == id)
                return a;
        throw ConfigError("algo", "unknown algorithm '" + std::string(id) + "'");
    }

    namespace detail
    {
        // Sorted position whose band contains phi, if the candidates could be built
        inline void locate_band(Individual &ind, const GroupingCandidates &gc)
        {
            for (std::size_t c = 0; c < gc.bands.size(); ++c)
                if (gc.bands[c].contains(ind.phi.roll()))
                {
                    ind.c = c;
                    ind.boundary_user = gc.order.user_perm[c];
                    ind.band = gc.bands[c];
                    return;
                }
        }

        // Book-keeping shared by the best-of-budget loops: one trace record per `chunk` evaluations
        class Tracker
        {
        public:
            explicit Tracker(std::size_t chunk) : chunk_(std::max<std::size_t>(chunk, 1)) {}

            void add(Individual ind)
            {
                ++out_.evaluations;
                if (out_.evaluations == 1 || better(ind, out_.best))
                    out_.best = ind;
                window_.push_back(std::move(ind));
                if (window_.size() == chunk_)
                    flush();
            }

            std::size_t evaluations() const { return out_.evaluations; }

            SearchResult finish()
            {
                if (!window_.empty())
                    flush();
                return std::move(out_);
            }

        private:
            void flush()
            {
                out_.trace.push_back(record(out_.trace.size() + 1, out_.evaluations, out_.best, window_));
                window_.clear();
            }

            std::size_t chunk_;
            std::vector<Individual> window_;
            SearchResult out_;
        };

        // Random location and roll; the grouping follows from the roll. With `optimise` false the
        // random hybrid beamforming is scored as drawn.
        inline Individual random_deployment(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                            Rng &rng, conic::ConvexBackend &backend, bool optimise)
        {
            Individual ind;
            ind.s = uniform_in_box(scn.deploy_box, rng);
            ind.phi = Orientation(rng.uniform(0.0, two_pi));
            const HybridBeamforming init = init_hybrid(rng, scn.n_antennas, scn.n_elements, scn.n_users(), scn.p_max);
            try
            {
                locate_band(ind, grouping_candidates(ind.s, scn.users, scn.bs_location, cfg.offset));
                ind.grouping = grouping_from_orientation(ind.s, ind.phi, scn.users, scn.bs_location);
                const ChannelSet cs = real.at(ind.s, ind.phi);
                const LinkBudget lb = link_budget(scn);
                ind.beamforming = optimise ? alternate(cs, ind.grouping, lb, backend, init, cfg.beamform).beamforming
                                           : init;
                score(ind, cs, lb);
            }
            catch (const Error &e)
            {
                return failed_individual(ind.s, e.what());
            }
            return ind;
        }

        // Usable sorted position whose band realizes the partition `key` at s (widest if several)
        inline std::optional<std::size_t> band_for_partition(const Vec3 &s, const GroupingCandidates &gc,
                                                             const Scenario &scn, std::uint64_t key)
        {
            std::optional<std::size_t> found;
            for (std::size_t c = 0; c < gc.bands.size(); ++c)
            {
                if (!gc.usable[c])
                    continue;
                try
                {
                    const auto flags = band_grouping(s, scn.users, scn.bs_location, gc.bands[c], gc.bands[c].mid());
                    if (partition_key(flags) == key && (!found || gc.bands[c].width() > gc.bands[*found].width()))
                        found = c;
                }
                catch (const OnBoundary &)
                {
                }
            }
            return found;
        }
    }

    // Best of `budget` random deployments, each scored with its random hybrid beamforming
    inline SearchResult run_rand_beamforming(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                             std::uint64_t seed, conic::ConvexBackend &backend)
    {
        cfg.validate();
        detail::Tracker t(cfg.population);
        for (std::size_t e = 0; e < cfg.budget(); ++e)
        {
            Rng rng = Rng::stream(seed, {e});
            t.add(detail::random_deployment(scn, real, cfg, rng, backend, false));
        }
        return t.finish();
    }

    // Best of `budget` random (location, roll) pairs, each with full beamforming design
    inline SearchResult run_rand_deploy(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                        std::uint64_t seed, conic::ConvexBackend &backend)
    {
        cfg.validate();
        detail::Tracker t(cfg.population);
        for (std::size_t e = 0; e < cfg.budget(); ++e)
        {
            Rng rng = Rng::stream(seed, {e});
            t.add(detail::random_deployment(scn, real, cfg, rng, backend, true));
        }
        return t.finish();
    }

    // Best of `budget` random locations, each completed with the balanced grouping and refinement
    inline SearchResult run_rand_loc(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                     std::uint64_t seed, conic::ConvexBackend &backend)
    {
        cfg.validate();
        detail::Tracker t(cfg.population);
        for (std::size_t e = 0; e < cfg.budget(); ++e)
        {
            Rng rng = Rng::stream(seed, {e});
            const Vec3 s = uniform_in_box(scn.deploy_box, rng);
            t.add(evaluate(s, scn, real, cfg, rng, backend));
        }
        return t.finish();
    }

    // DEBG with the boundary user drawn uniformly instead of by balance
    inline SearchResult run_rand_grouping(const Scenario &scn, const ChannelRealization &real, DEConfig cfg,
                                          std::uint64_t seed, conic::ConvexBackend &backend)
    {
        cfg.grouping = GroupingPolicy::Uniform;
        return run_debg(scn, real, cfg, seed, backend);
    }

    // Partition fixed at random once, then coordinate descent over (x, y) with a shrinking step;
    // each probe re-designs the beamforming warm-started from the incumbent. A random restart
    // follows once the step falls below 1 cm.
    inline SearchResult run_ao_fixed_grouping(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                              std::uint64_t seed, conic::ConvexBackend &backend)
    {
        cfg.validate();
        const std::size_t budget = cfg.budget();
        const Box &box = scn.deploy_box;
        const Eigen::Vector2d full_step = 0.25 * (box.hi - box.lo).head<2>();
        constexpr double min_step = 0.01;
        constexpr std::size_t max_misses = 1000; // random draws without a matching band, per restart

        detail::Tracker t(cfg.population);
        std::size_t draws = 0;
        std::optional<std::uint64_t> key;
        Individual current;
        Eigen::Vector2d step = full_step;

        // Fresh start at a random location; the first one also fixes the partition
        auto restart = [&]() -> bool
        {
            for (std::size_t miss = 0; miss < max_misses && t.evaluations() < budget; ++miss)
            {
                Rng rng = Rng::stream(seed, {0, draws++});
                const Vec3 s = uniform_in_box(box, rng);
                GroupingCandidates gc;
                try
                {
                    gc = grouping_candidates(s, scn.users, scn.bs_location, cfg.offset);
                }
                catch (const Error &)
                {
                    continue;
                }
                std::optional<std::size_t> c;
                if (!key)
                {
                    try
                    {
                        DEConfig uniform = cfg;
                        uniform.grouping = GroupingPolicy::Uniform;
                        c = choose_boundary(gc, uniform, rng);
                    }
                    catch (const OnBoundary &)
                    {
                        continue;
                    }
                }
                else
                    c = detail::band_for_partition(s, gc, scn, *key);
                if (!c)
                    continue;
                Individual ind = complete_deployment(s, *c, gc, scn, real, cfg, rng, backend);
                if (!key && !ind.failed())
                    key = partition_key(ind.grouping);
                t.add(ind);
                if (key)
                {
                    current = std::move(ind);
                    step = full_step;
                    return true;
                }
            }
            return false;
        };

        if (!restart())
            return t.finish();
        std::size_t probe = 0;
        while (t.evaluations() < budget)
        {
            bool improved = false;
            for (int axis = 0; axis < 2 && t.evaluations() < budget; ++axis)
                for (double sign : {1.0, -1.0})
                {
                    if (t.evaluations() >= budget)
                        break;
                    Vec3 s = current.s;
                    s(axis) += sign * step(axis);
                    s = clamp_box(s, box);
                    if (s == current.s)
                        continue;
                    Rng rng = Rng::stream(seed, {1, probe++});
                    Individual cand;
                    try
                    {
                        const auto gc = grouping_candidates(s, scn.users, scn.bs_location, cfg.offset);
                        const auto c = detail::band_for_partition(s, gc, scn, *key);
                        cand = c ? complete_deployment(s, *c, gc, scn, real, cfg, rng, backend, true, &current)
                                 : failed_individual(s, "fixed partition not realizable here");
                    }
                    catch (const Error &e)
                    {
                        cand = failed_individual(s, e.what());
                    }
                    t.add(cand);
                    if (better(cand, current))
                    {
                        current = std::move(cand);
                        improved = true;
                    }
                }
            if (!improved)
            {
                step *= 0.5;
                if (step.maxCoeff() < min_step && !restart())
                    break;
            }
        }
        return t.finish();
    }

    inline SearchResult run_algorithm(Algorithm algo, const Scenario &scn, const ChannelRealization &real,
                                      const DEConfig &cfg, std::uint64_t seed, conic::ConvexBackend &backend)
    {
        switch (algo)
        {
        case Algorithm::Debg: return run_debg(scn, real, cfg, seed, backend);
        case Algorithm::RandBeamforming: return run_rand_beamforming(scn, real, cfg, seed, backend);
        case Algorithm::RandDeploy: return run_rand_deploy(scn, real, cfg, seed, backend);
        case Algorithm::RandLoc: return run_rand_loc(scn, real, cfg, seed, backend);
        case Algorithm::RandGrouping: return run_rand_grouping(scn, real, cfg, seed, backend);
        case Algorithm::AoFixedGrouping: return run_ao_fixed_grouping(scn, real, cfg, seed, backend);
        }
        throw ConfigError("algo", "unknown algorithm");
    }

    // Approximate worst-case sum rate under bounded CSI error, beamforming held fixed. For each
    // level, user k's channel is perturbed by n_samples draws uniform on the sphere of radius
    // level * |h_k|. The error model is a ball, so a level's worst case also covers every smaller
    // level (and the nominal point); the returned values are running minima over sorted levels.
    inline std::vector<double> worst_case_sum_rates(const Individual &ind, const ChannelRealization &real,
                                                    const Scenario &scn, std::span<const double> levels,
                                                    std::size_t n_samples, Rng &rng)
    {
        for (double l : levels)
            if (!(l >= 0.0 && l <= 0.05))
                throw ConfigError("robustness.levels", "levels must lie in [0, 0.05]");
        if (ind.failed())
            return std::vector<double>(levels.size(), 0.0);
        const ChannelSet cs = real.at(ind.s, ind.phi);
        const auto h = cascaded_channels(cs, ind.beamforming.passive, ind.grouping);
        const auto &W = ind.beamforming.w;
        const double noise = scn.constants.noise_power;
        const double nominal = rates_from_channels(h, W, noise, scn.r_min).sum_rate;

        std::vector<std::size_t> order(levels.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return levels[a] < levels[b]; });

        std::vector<double> out(levels.size());
        double worst = nominal;
        std::vector<CRowVector> hp(h.size());
        for (std::size_t i : order)
        {
            const double level = levels[i];
            if (level > 0.0)
                for (std::size_t n = 0; n < n_samples; ++n)
                {
                    for (std::size_t k = 0; k < h.size(); ++k)
                    {
                        CRowVector d(h[k].size());
                        for (Eigen::Index j = 0; j < d.size(); ++j)
                            d(j) = rng.complex_normal();
                        const double dn = d.norm();
                        hp[k] = dn > 0.0 ? CRowVector(h[k] + (level * h[k].norm() / dn) * d) : h[k];
                    }
                    worst = std::min(worst, rates_from_channels(hp, W, noise, scn.r_min).sum_rate);
                }
            out[i] = worst;
        }
        return out;
    }

    struct OracleEntry
    {
        Vec3 s = Vec3::Zero();
        std::size_t c = 0;
        double fitness = 0.0;
        double violation = 0.0;
    };

    struct OracleResult
    {
        Individual best;
        std::vector<OracleEntry> entries;
    };

    // n x n grid over the box in (x, y) including the edges (the centre when n = 1), z at the
    // middle of its range
    inline std::vector<Vec3> grid_locations(const Box &box, std::size_t n)
    {
        std::vector<Vec3> out;
        out.reserve(n * n);
        auto at = [&](int axis, std::size_t i)
        {
            if (n == 1)
                return 0.5 * (box.lo(axis) + box.hi(axis));
            return box.lo(axis) + (box.hi(axis) - box.lo(axis)) * static_cast<double>(i) / static_cast<double>(n - 1);
        };
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out.emplace_back(at(0, i), at(1, j), 0.5 * (box.lo.z() + box.hi.z()));
        return out;
    }

    // Every grid location x every usable boundary user, each completed with full beamforming
    // and orientation refinement; the best under compare()
    inline OracleResult oracle_bruteforce(const Scenario &scn, const ChannelRealization &real, std::size_t grid,
                                          const DEConfig &cfg, std::uint64_t seed, conic::ConvexBackend &backend)
    {
        if (grid == 0)
            throw ConfigError("grid", "must be at least 1");
        if (scn.n_users() > 4 || scn.n_elements > 4 || scn.n_antennas > 2 || grid > 6)
            throw BudgetExceeded("oracle_bruteforce: limited to K <= 4, M <= 4, N_a <= 2 and a 6 x 6 grid");
        OracleResult out;
        out.best = failed_individual(Vec3::Zero(), "no grid point evaluated");
        const auto points = grid_locations(scn.deploy_box, grid);
        for (std::size_t p = 0; p < points.size(); ++p)
        {
            GroupingCandidates gc;
            try
            {
                gc = grouping_candidates(points[p], scn.users, scn.bs_location, cfg.offset);
            }
            catch (const Error &)
            {
                continue;
            }
            for (std::size_t c = 0; c < gc.bands.size(); ++c)
            {
                if (!gc.usable[c])
                    continue;
                Rng rng = Rng::stream(seed, {p, c});
                Individual ind = complete_deployment(points[p], c, gc, scn, real, cfg, rng, backend);
                out.entries.push_back({points[p], c, ind.fitness, ind.violation});
                if (better(ind, out.best))
                    out.best = std::move(ind);
            }
        }
        return out;
    }

    // ---- experiment driver ----

    enum class SweepAxis
    {
        M,
        Na,
        Pmax
    };

    inline SweepAxis parse_sweep(std::string_view s)
    {
        if (s == "m")
            return SweepAxis::M;
        if (s == "na")
            return SweepAxis::Na;
        if (s == "pmax")
            return SweepAxis::Pmax;
        throw ConfigError("sweep", "expected m, na or pmax");
    }

    struct RunRequest
    {
        Algorithm algo = Algorithm::Debg;
        std::uint64_t seed = 0;
        std::optional<SweepAxis> sweep;
        bool los_only = false;
        bool record_runtime = false;
    };

    struct ResultRow
    {
        std::string algo;
        std::uint64_t seed = 0;
        std::size_t M = 0;
        std::size_t N_a = 0;
        double P_max_dBm = 0.0;
        double mean_sum_rate = 0.0;
        double std_sum_rate = 0.0;
        std::optional<double> runtime_s; // omitted (NA) unless requested: wall time breaks determinism

        bool operator==(const ResultRow &) const = default;
    };

    struct TraceRow
    {
        std::size_t distribution = 0;
        std::size_t run = 0;
        GenerationRecord record;
    };

    struct RobustnessRow
    {
        std::size_t distribution = 0;
        std::size_t run = 0;
        double level = 0.0;
        double worst_sum_rate = 0.0;
    };

    struct CellResult
    {
        ResultRow row;
        Individual best;              // best over all distributions and runs of the cell
        std::vector<double> run_rates; // best sum rate of every (distribution, run)
        std::vector<TraceRow> trace;
        std::vector<RobustnessRow> robustness;
    };

    // Stream tags. Users and channels depend on (seed, distribution) only, so every algorithm
    // and every sweep value of a distribution sees the same users and, for equal dimensions,
    // the same channels.
    namespace tags
    {
        inline constexpr std::uint64_t users = 1, channels = 2, algorithm = 3, robustness = 4;
    }

    inline Scenario scenario_for(const ExperimentConfig &cfg, std::uint64_t seed, std::size_t distribution)
    {
        Rng rng = Rng::stream(seed, {tags::users, distribution});
        return generate_scenario(cfg, rng);
    }

    inline ChannelRealization channels_for(const Scenario &scn, std::uint64_t seed, std::size_t distribution,
                                           bool los_only)
    {
        Rng rng = Rng::stream(seed, {tags::channels, distribution});
        return ChannelRealization::draw(scn, rng, los_only);
    }

    inline std::uint64_t algorithm_seed(std::uint64_t seed, std::size_t distribution, std::size_t run)
    {
        return Rng::stream(seed, {tags::algorithm, distribution, run}).next();
    }

    // Configuration of every cell of the request: one per sweep value, or the base alone
    inline std::vector<ExperimentConfig> sweep_cells(const ExperimentConfig &cfg, std::optional<SweepAxis> axis)
    {
        std::vector<ExperimentConfig> out;
        if (!axis)
        {
            out.push_back(cfg);
            return out;
        }
        switch (*axis)
        {
        case SweepAxis::M:
            for (auto m : cfg.sweep.m)
                out.push_back(cfg), out.back().n_elements = m;
            break;
        case SweepAxis::Na:
            for (auto n : cfg.sweep.na)
                out.push_back(cfg), out.back().n_antennas = n;
            break;
        case SweepAxis::Pmax:
            for (auto p : cfg.sweep.pmax_dbm)
                out.push_back(cfg), out.back().pmax_dbm = p;
            break;
        }
        if (out.empty())
            throw ConfigError("experiment.sweep", "the requested sweep has no values");
        for (const auto &c : out)
            c.validate();
        return out;
    }

    using Progress = std::function<void(const std::string &)>;

    inline CellResult run_cell(const ExperimentConfig &cfg, const RunRequest &req, const Progress &progress = {})
    {
        cfg.validate();
        CellResult cell;
        cell.row.algo = std::string(algorithm_id(req.algo));
        cell.row.seed = req.seed;
        cell.row.M = cfg.n_elements;
        cell.row.N_a = cfg.n_antennas;
        cell.row.P_max_dBm = cfg.pmax_dbm;
        cell.best = failed_individual(Vec3::Zero(), "no run");

        auto backend = conic::make_backend(cfg.backend, cfg.de.beamform.solver);
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t d = 0; d < cfg.distributions; ++d)
        {
            const Scenario scn = scenario_for(cfg, req.seed, d);
            const ChannelRealization real = channels_for(scn, req.seed, d, req.los_only);
            for (std::size_t r = 0; r < cfg.runs; ++r)
            {
                const auto res = run_algorithm(req.algo, scn, real, cfg.de, algorithm_seed(req.seed, d, r), *backend);
                cell.run_rates.push_back(res.best.failed() ? 0.0 : res.best.fitness);
                for (const auto &g : res.trace)
                    cell.trace.push_back({d, r, g});
                Rng rng = Rng::stream(req.seed, {tags::robustness, d, r});
                const auto worst = worst_case_sum_rates(res.best, real, scn, cfg.csi_levels, cfg.csi_samples, rng);
                for (std::size_t i = 0; i < worst.size(); ++i)
                    cell.robustness.push_back({d, r, cfg.csi_levels[i], worst[i]});
                if (better(res.best, cell.best))
                    cell.best = res.best;
                if (progress)
                    progress(cell.row.algo + " M=" + std::to_string(cfg.n_elements) +
                             " N_a=" + std::to_string(cfg.n_antennas) + " distribution " + std::to_string(d) +
                             " run " + std::to_string(r) + ": " + std::to_string(res.best.fitness));
            }
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const double n = static_cast<double>(cell.run_rates.size());
        double mean = 0.0;
        for (double v : cell.run_rates)
            mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : cell.run_rates)
            var += (v - mean) * (v - mean);
        cell.row.mean_sum_rate = mean;
        cell.row.std_sum_rate = cell.run_rates.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        if (req.record_runtime)
            cell.row.runtime_s = elapsed / n;
        return cell;
    }

    inline std::vector<CellResult> run_experiment(const ExperimentConfig &cfg, const RunRequest &req,
                                                  const Progress &progress = {})
    {
        std::vector<CellResult> out;
        for (const auto &c : sweep_cells(cfg, req.sweep))
            out.push_back(run_cell(c, req, progress));
        return out;
    }

    // Evaluates a user-given deployment: grouping from the roll, then full beamforming design
    inline Individual evaluate_deployment(const Scenario &scn, const ChannelRealization &real, const DEConfig &cfg,
                                          const Vec3 &s, Orientation phi, std::uint64_t seed,
                                          conic::ConvexBackend &backend)
    {
        if (!scn.deploy_box.contains(s))
            throw ConfigError("location", "outside the deployment region");
        Rng rng = Rng::stream(seed, {0});
        Individual ind;
        ind.s = s;
        ind.phi = phi;
        try
        {
            detail::locate_band(ind, grouping_candidates(s, scn.users, scn.bs_location, cfg.offset));
            ind.grouping = grouping_from_orientation(s, phi, scn.users, scn.bs_location);
            const ChannelSet cs = real.at(s, phi);
            const LinkBudget lb = link_budget(scn);
            const auto init = init_hybrid(rng, scn.n_antennas, scn.n_elements, scn.n_users(), scn.p_max);
            ind.beamforming = alternate(cs, ind.grouping, lb, backend, init, cfg.beamform).beamforming;
            score(ind, cs, lb);
        }
        catch (const Error &e)
        {
            return failed_individual(s, e.what());
        }
        return ind;
    }
}

#endif
