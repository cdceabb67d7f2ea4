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

// Command-line front end: run, oracle and eval.

#include <starris/results_io.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace
{
    using namespace starris;

    std::optional<Preset> preset_flag(bool desk, bool paper)
    {
        if (desk)
            return Preset::Desk;
        if (paper)
            return Preset::Paper;
        return std::nullopt;
    }

    int run_command(const std::string &config, std::uint64_t seed, const std::string &algo,
                    const std::string &sweep, const std::string &out, bool los_only, bool desk, bool paper,
                    bool record_runtime, bool quiet)
    {
        const ExperimentConfig cfg = load_config(config, preset_flag(desk, paper));
        RunRequest req;
        req.algo = parse_algorithm(algo);
        req.seed = seed;
        if (!sweep.empty())
            req.sweep = parse_sweep(sweep);
        req.los_only = los_only;
        req.record_runtime = record_runtime;
        Progress progress;
        if (!quiet)
            progress = [](const std::string &msg) { std::cerr << msg << '\n'; };
        const auto cells = run_experiment(cfg, req, progress);
        write_results(cells, out);
        std::cout << results_csv([&]
                                 {
                                     std::vector<ResultRow> rows;
                                     for (const auto &c : cells)
                                         rows.push_back(c.row);
                                     return rows;
                                 }());
        return 0;
    }

    int oracle_command(const std::string &config, std::size_t grid, std::uint64_t seed, const std::string &out,
                       bool los_only)
    {
        const ExperimentConfig cfg = load_config(config);
        const Scenario scn = scenario_for(cfg, seed, 0);
        const ChannelRealization real = channels_for(scn, seed, 0, los_only);
        auto backend = conic::make_backend(cfg.backend, cfg.de.beamform.solver);
        const OracleResult res = oracle_bruteforce(scn, real, grid, cfg.de, seed, *backend);

        std::filesystem::create_directories(out);
        std::string csv = "x,y,z,c,sum_rate,qos_violation\n";
        for (const auto &e : res.entries)
        {
            const GroupingCandidates gc = grouping_candidates(e.s, scn.users, scn.bs_location, cfg.de.offset);
            csv += format_double(e.s.x()) + "," + format_double(e.s.y()) + "," + format_double(e.s.z()) + "," +
                   std::to_string(gc.order.user_perm[e.c]) + "," + format_double(e.fitness) + "," +
                   format_double(e.violation) + "\n";
        }
        write_atomic(std::filesystem::path(out) / "oracle.csv", csv);
        write_atomic(std::filesystem::path(out) / "best.json", dump_json(deployment_json(res.best)));
        std::cout << "oracle best sum rate " << format_double(res.best.fitness) << " over " << res.entries.size()
                  << " candidates\n";
        return 0;
    }

    int eval_command(const std::string &config, double x, double y, double z, double phi_deg, std::uint64_t seed,
                     const std::string &out, bool los_only, bool desk, bool paper)
    {
        const ExperimentConfig cfg = load_config(config, preset_flag(desk, paper));
        const Scenario scn = scenario_for(cfg, seed, 0);
        const ChannelRealization real = channels_for(scn, seed, 0, los_only);
        auto backend = conic::make_backend(cfg.backend, cfg.de.beamform.solver);
        const Individual ind =
            evaluate_deployment(scn, real, cfg.de, Vec3(x, y, z), Orientation::from_degrees(phi_deg), seed, *backend);
        std::filesystem::create_directories(out);
        write_atomic(std::filesystem::path(out) / "best.json", dump_json(deployment_json(ind)));
        if (ind.failed())
        {
            std::cerr << "evaluation failed: " << ind.failure << '\n';
            return 1;
        }
        std::cout << "sum rate " << format_double(ind.fitness) << ", QoS violation " << format_double(ind.violation)
                  << '\n';
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"STAR-RIS deployment and hybrid beamforming experiments"};
    app.require_subcommand(1);

    std::string config, algo = "debg", sweep, out;
    std::uint64_t seed = 0;
    bool los_only = false, desk = false, paper = false, record_runtime = false, quiet = false;

    auto *run = app.add_subcommand("run", "Run one algorithm over the configured distributions and runs");
    run->add_option("--config", config, "YAML configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Master seed")->required();
    run->add_option("--algo", algo, "debg|rand-beamforming|rand-deploy|rand-loc|rand-grouping|ao-fixed")
        ->check(CLI::IsMember({"debg", "rand-beamforming", "rand-deploy", "rand-loc", "rand-grouping", "ao-fixed"}));
    run->add_option("--sweep", sweep, "Sweep the element count, antenna count or power budget")
        ->check(CLI::IsMember({"m", "na", "pmax"}));
    run->add_option("--out", out, "Output directory")->required();
    run->add_flag("--los-only", los_only, "Drop the NLoS components");
    auto *desk_flag = run->add_flag("--desk-scale", desk, "Start from the desk-scale preset");
    auto *paper_flag = run->add_flag("--paper-scale", paper, "Start from the full-scale preset");
    desk_flag->excludes(paper_flag);
    run->add_flag("--record-runtime", record_runtime, "Fill runtime_s (outputs are then not reproducible)");
    run->add_flag("--quiet", quiet, "No progress on stderr");

    std::size_t grid = 5;
    auto *oracle = app.add_subcommand("oracle", "Exhaustive grid x boundary-user search on a tiny instance");
    oracle->add_option("--config", config, "YAML configuration")->required()->check(CLI::ExistingFile);
    oracle->add_option("--grid", grid, "Grid points per axis")->required();
    oracle->add_option("--seed", seed, "Master seed");
    oracle->add_option("--out", out, "Output directory")->required();
    oracle->add_flag("--los-only", los_only, "Drop the NLoS components");

    double x = 0, y = 0, z = 0, phi_deg = 0;
    auto *eval = app.add_subcommand("eval", "Design the beamforming for a given deployment");
    eval->add_option("--config", config, "YAML configuration")->required()->check(CLI::ExistingFile);
    eval->add_option("--x", x)->required();
    eval->add_option("--y", y)->required();
    eval->add_option("--z", z)->required();
    eval->add_option("--phi-deg", phi_deg, "Surface roll in degrees")->required();
    eval->add_option("--seed", seed, "Master seed");
    eval->add_option("--out", out, "Output directory")->required();
    eval->add_flag("--los-only", los_only, "Drop the NLoS components");
    auto *eval_desk = eval->add_flag("--desk-scale", desk, "Start from the desk-scale preset");
    auto *eval_paper = eval->add_flag("--paper-scale", paper, "Start from the full-scale preset");
    eval_desk->excludes(eval_paper);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
            return run_command(config, seed, algo, sweep, out, los_only, desk, paper, record_runtime, quiet);
        if (*oracle)
            return oracle_command(config, grid, seed, out, los_only);
        return eval_command(config, x, y, z, phi_deg, seed, out, los_only, desk, paper);
    }
    catch (const starris::ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
