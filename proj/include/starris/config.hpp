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

#ifndef STARRIS_CONFIG_HPP
#define STARRIS_CONFIG_HPP

#include "conic.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "geom.hpp"
#include "random.hpp"
#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

// Experiment configuration: world layout, radio constants in dB, search and beamforming
// settings, and the experiment protocol. Two presets exist; a YAML file overrides any subset of
// the keys on top of the preset it names.

namespace starris
{
    struct ClusterSpec
    {
        Vec3 centre = Vec3::Zero();
        double radius = 0.0;
        std::size_t users = 0;
    };

    struct SweepSpec
    {
        std::vector<std::size_t> m;
        std::vector<std::size_t> na;
        std::vector<double> pmax_dbm;
    };

    enum class Preset
    {
        Paper,
        Desk
    };

    struct ExperimentConfig
    {
        Preset preset = Preset::Paper;

        // world
        Vec3 bs = Vec3::Zero();
        std::vector<ClusterSpec> clusters{{Vec3(30, -5, 0), 5.0, 4}, {Vec3(65, 5, 0), 15.0, 4}};
        Box box{Vec3(25, -10, 2), Vec3(80, 20, 2)};
        double pmax_dbm = 20.0;
        double r_min = 0.1;
        std::size_t n_antennas = 4;
        std::size_t n_elements = 20;
        std::size_t n_rows = 5;

        // radio, dB inputs
        double wavelength = 0.125;
        double spacing = 0.0625;
        double rho0_db = -30.0;
        double alpha = 2.2;
        double rician_bs_db = 3.0;
        double rician_su_db = 3.0;
        double noise_dbm = -90.0;

        DEConfig de{};
        conic::BackendKind backend = conic::BackendKind::ComplexHkm;

        // protocol
        std::size_t distributions = 50;
        std::size_t runs = 30;
        SweepSpec sweep{{20, 30, 40, 50, 60}, {4, 5, 6, 7, 8}, {10, 20, 30, 40, 50}};
        std::vector<double> csi_levels{0.0, 0.01, 0.03, 0.05};
        std::size_t csi_samples = 100;

        ExperimentConfig() { de.beamform.max_iterations = 10; }

        RadioConstants constants() const
        {
            RadioConstants c;
            c.wavelength = wavelength;
            c.spacing = spacing;
            c.rho0 = db_to_linear(rho0_db);
            c.alpha = alpha;
            c.rician_bs = db_to_linear(rician_bs_db);
            c.rician_su = db_to_linear(rician_su_db);
            c.noise_power = dbm_to_watts(noise_dbm);
            return c;
        }

        std::size_t n_users() const
        {
            std::size_t k = 0;
            for (const auto &c : clusters)
                k += c.users;
            return k;
        }

        void validate() const
        {
            if (clusters.empty() || n_users() == 0)
                throw ConfigError("scenario.clusters", "at least one user is required");
            for (std::size_t i = 0; i < clusters.size(); ++i)
                if (!(clusters[i].radius >= 0.0) || !std::isfinite(clusters[i].radius))
                    throw ConfigError("scenario.clusters[" + std::to_string(i) + "].radius", "must be >= 0");
            if ((box.hi.array() < box.lo.array()).any())
                throw ConfigError("scenario.box", "empty deployment region");
            if (!std::isfinite(pmax_dbm))
                throw ConfigError("scenario.pmax_dbm", "must be finite");
            if (r_min < 0.0)
                throw ConfigError("scenario.rmin", "must be non-negative");
            if (n_antennas == 0)
                throw ConfigError("scenario.n_antennas", "must be at least 1");
            if (n_rows == 0 || n_elements == 0 || n_elements % n_rows != 0)
                throw ConfigError("scenario.n_elements", "must be a positive multiple of n_rows");
            for (auto m : sweep.m)
                if (m == 0 || m % n_rows != 0)
                    throw ConfigError("experiment.sweep.m", "values must be positive multiples of n_rows");
            for (auto n : sweep.na)
                if (n == 0)
                    throw ConfigError("experiment.sweep.na", "values must be at least 1");
            if (distributions == 0)
                throw ConfigError("experiment.distributions", "must be at least 1");
            if (runs == 0)
                throw ConfigError("experiment.runs", "must be at least 1");
            for (double l : csi_levels)
                if (!(l >= 0.0 && l <= 0.05))
                    throw ConfigError("experiment.robustness.levels", "levels must lie in [0, 0.05]");
            try
            {
                constants().validate();
            }
            catch (const ConfigError &e)
            {
                std::string f = e.field;
                if (f == "noise_power")
                    f = "noise_dbm";
                else if (f == "rho0" || f.starts_with("rician"))
                    f += "_db";
                const std::string what = e.what();
                throw ConfigError("radio." + f, what.substr(what.find(": ") + 2));
            }
            try
            {
                de.validate();
            }
            catch (const ConfigError &e)
            {
                // field names of the search block in the file
                std::string f = e.field.substr(e.field.find('.') + 1);
                if (f == "offset")
                    f = "offset_deg";
                const std::string what = e.what();
                throw ConfigError("search." + f, what.substr(what.find(": ") + 2));
            }
        }
    };

    inline ExperimentConfig paper_preset() { return ExperimentConfig{}; }

    // K = 4 (two users per cluster), M = 8 with 2 rows, N_a = 2, N x G = 10 x 30 = 300 evaluations
    inline ExperimentConfig desk_preset()
    {
        ExperimentConfig c;
        c.preset = Preset::Desk;
        c.clusters[0].users = 2;
        c.clusters[1].users = 2;
        c.n_antennas = 2;
        c.n_elements = 8;
        c.n_rows = 2;
        c.de.population = 10;
        c.de.max_generations = 30;
        c.distributions = 1;
        c.runs = 1;
        c.sweep = {{4, 8, 16}, {1, 2, 4}, {10, 20, 30}};
        return c;
    }

    namespace detail
    {
        template <class T>
        T scalar(const YAML::Node &n, const std::string &path)
        {
            try
            {
                return n.as<T>();
            }
            catch (const YAML::Exception &)
            {
                throw ConfigError(path, "expected a scalar of the right type");
            }
        }

        template <class T>
        void read(const YAML::Node &parent, const char *key, T &out, const std::string &prefix)
        {
            if (const auto n = parent[key])
                out = scalar<T>(n, prefix + key);
        }

        inline Vec3 vec3(const YAML::Node &n, const std::string &path)
        {
            if (!n.IsSequence() || n.size() != 3)
                throw ConfigError(path, "expected [x, y, z]");
            return {scalar<double>(n[0], path + "[0]"), scalar<double>(n[1], path + "[1]"),
                    scalar<double>(n[2], path + "[2]")};
        }

        inline void interval(const YAML::Node &n, const std::string &path, double &lo, double &hi)
        {
            if (!n.IsSequence() || n.size() != 2)
                throw ConfigError(path, "expected [min, max]");
            lo = scalar<double>(n[0], path + "[0]");
            hi = scalar<double>(n[1], path + "[1]");
        }

        template <class T>
        std::vector<T> list(const YAML::Node &n, const std::string &path)
        {
            if (!n.IsSequence())
                throw ConfigError(path, "expected a list");
            std::vector<T> out;
            for (std::size_t i = 0; i < n.size(); ++i)
                out.push_back(scalar<T>(n[i], path + "[" + std::to_string(i) + "]"));
            return out;
        }

        inline void check_keys(const YAML::Node &n, const std::string &path, std::initializer_list<const char *> known)
        {
            if (!n.IsMap())
                throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
            for (const auto &kv : n)
            {
                const auto key = kv.first.as<std::string>();
                bool ok = false;
                for (const char *k : known)
                    ok = ok || key == k;
                if (!ok)
                    throw ConfigError(path + key, "unknown key");
            }
        }

        inline void apply(const YAML::Node &root, ExperimentConfig &c)
        {
            check_keys(root, "", {"preset", "scenario", "radio", "search", "beamform", "experiment"});
            if (const auto s = root["scenario"])
            {
                const std::string p = "scenario.";
                check_keys(s, p, {"bs", "clusters", "box", "pmax_dbm", "rmin", "n_antennas", "n_elements", "n_rows"});
                if (s["bs"])
                    c.bs = vec3(s["bs"], p + "bs");
                if (const auto cl = s["clusters"])
                {
                    if (!cl.IsSequence())
                        throw ConfigError(p + "clusters", "expected a list");
                    c.clusters.clear();
                    for (std::size_t i = 0; i < cl.size(); ++i)
                    {
                        const std::string q = p + "clusters[" + std::to_string(i) + "].";
                        check_keys(cl[i], q, {"centre", "radius", "users"});
                        ClusterSpec spec;
                        if (!cl[i]["centre"] || !cl[i]["radius"] || !cl[i]["users"])
                            throw ConfigError(q.substr(0, q.size() - 1), "needs centre, radius and users");
                        spec.centre = vec3(cl[i]["centre"], q + "centre");
                        spec.radius = scalar<double>(cl[i]["radius"], q + "radius");
                        spec.users = scalar<std::size_t>(cl[i]["users"], q + "users");
                        c.clusters.push_back(spec);
                    }
                }
                if (const auto b = s["box"])
                {
                    check_keys(b, p + "box.", {"x", "y", "z"});
                    const char *axes[] = {"x", "y", "z"};
                    for (int a = 0; a < 3; ++a)
                        if (b[axes[a]])
                            interval(b[axes[a]], p + "box." + axes[a], c.box.lo(a), c.box.hi(a));
                }
                read(s, "pmax_dbm", c.pmax_dbm, p);
                read(s, "rmin", c.r_min, p);
                read(s, "n_antennas", c.n_antennas, p);
                read(s, "n_elements", c.n_elements, p);
                read(s, "n_rows", c.n_rows, p);
            }
            if (const auto r = root["radio"])
            {
                const std::string p = "radio.";
                check_keys(r, p, {"wavelength", "spacing", "rho0_db", "alpha", "rician_bs_db", "rician_su_db", "noise_dbm"});
                read(r, "wavelength", c.wavelength, p);
                read(r, "spacing", c.spacing, p);
                read(r, "rho0_db", c.rho0_db, p);
                read(r, "alpha", c.alpha, p);
                read(r, "rician_bs_db", c.rician_bs_db, p);
                read(r, "rician_su_db", c.rician_su_db, p);
                read(r, "noise_dbm", c.noise_dbm, p);
            }
            if (const auto d = root["search"])
            {
                const std::string p = "search.";
                check_keys(d, p, {"population", "generations", "F", "Cr", "grid", "grid_max", "offset_deg", "crossover",
                                  "selection", "refine_initial"});
                read(d, "population", c.de.population, p);
                read(d, "generations", c.de.max_generations, p);
                read(d, "F", c.de.F, p);
                read(d, "Cr", c.de.Cr, p);
                read(d, "grid", c.de.grid, p);
                read(d, "grid_max", c.de.grid_max, p);
                read(d, "refine_initial", c.de.refine_initial, p);
                if (d["offset_deg"])
                    c.de.offset = deg_to_rad(scalar<double>(d["offset_deg"], p + "offset_deg"));
                if (d["crossover"])
                {
                    const auto v = scalar<std::string>(d["crossover"], p + "crossover");
                    if (v == "standard")
                        c.de.crossover = CrossoverRule::Standard;
                    else if (v == "literal")
                        c.de.crossover = CrossoverRule::Literal;
                    else
                        throw ConfigError(p + "crossover", "expected standard or literal");
                }
                if (d["selection"])
                {
                    const auto v = scalar<std::string>(d["selection"], p + "selection");
                    if (v == "inverse-distance")
                        c.de.law = SelectionLaw::InverseDistance;
                    else if (v == "literal")
                        c.de.law = SelectionLaw::Literal;
                    else
                        throw ConfigError(p + "selection", "expected inverse-distance or literal");
                }
            }
            if (const auto b = root["beamform"])
            {
                const std::string p = "beamform.";
                check_keys(b, p, {"tolerance", "max_iterations", "qos", "backend", "solver_tolerance",
                                  "solver_max_iterations", "qos_penalty"});
                auto &bf = c.de.beamform;
                read(b, "tolerance", bf.tolerance, p);
                read(b, "max_iterations", bf.max_iterations, p);
                read(b, "qos_penalty", bf.qos_penalty, p);
                read(b, "solver_tolerance", bf.solver.tolerance, p);
                read(b, "solver_max_iterations", bf.solver.max_iterations, p);
                if (b["qos"])
                {
                    const auto v = scalar<std::string>(b["qos"], p + "qos");
                    if (v == "elastic")
                        bf.qos = QosMode::Elastic;
                    else if (v == "enforced")
                        bf.qos = QosMode::Enforced;
                    else
                        throw ConfigError(p + "qos", "expected elastic or enforced");
                }
                if (b["backend"])
                {
                    const auto v = scalar<std::string>(b["backend"], p + "backend");
                    if (v == "complex-hkm")
                        c.backend = conic::BackendKind::ComplexHkm;
                    else if (v == "real-nt")
                        c.backend = conic::BackendKind::RealEmbeddingNt;
                    else
                        throw ConfigError(p + "backend", "expected complex-hkm or real-nt");
                }
                if (!(bf.tolerance > 0.0))
                    throw ConfigError(p + "tolerance", "must be positive");
                if (bf.max_iterations < 0)
                    throw ConfigError(p + "max_iterations", "must be non-negative");
            }
            if (const auto e = root["experiment"])
            {
                const std::string p = "experiment.";
                check_keys(e, p, {"distributions", "runs", "sweep", "robustness"});
                read(e, "distributions", c.distributions, p);
                read(e, "runs", c.runs, p);
                if (const auto sw = e["sweep"])
                {
                    check_keys(sw, p + "sweep.", {"m", "na", "pmax_dbm"});
                    if (sw["m"])
                        c.sweep.m = list<std::size_t>(sw["m"], p + "sweep.m");
                    if (sw["na"])
                        c.sweep.na = list<std::size_t>(sw["na"], p + "sweep.na");
                    if (sw["pmax_dbm"])
                        c.sweep.pmax_dbm = list<double>(sw["pmax_dbm"], p + "sweep.pmax_dbm");
                }
                if (const auto rb = e["robustness"])
                {
                    check_keys(rb, p + "robustness.", {"levels", "samples"});
                    if (rb["levels"])
                        c.csi_levels = list<double>(rb["levels"], p + "robustness.levels");
                    read(rb, "samples", c.csi_samples, p + "robustness.");
                }
            }
        }

        inline Preset preset_named(const YAML::Node &root)
        {
            if (!root.IsMap() || !root["preset"])
                return Preset::Paper;
            const auto v = scalar<std::string>(root["preset"], "preset");
            if (v == "paper")
                return Preset::Paper;
            if (v == "desk")
                return Preset::Desk;
            throw ConfigError("preset", "expected paper or desk");
        }
    }

    // Parses YAML text. The preset comes from `force` if given, else from the `preset` key,
    // else the full-scale values; the file's keys are applied on top.
    inline ExperimentConfig parse_config(const std::string &text, std::optional<Preset> force = std::nullopt)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::Exception &e)
        {
            throw ConfigError("<file>", std::string("malformed YAML: ") + e.what());
        }
        if (root.IsNull())
            root = YAML::Node(YAML::NodeType::Map);
        const Preset p = force ? *force : detail::preset_named(root);
        ExperimentConfig c = p == Preset::Desk ? desk_preset() : paper_preset();
        detail::apply(root, c);
        c.validate();
        return c;
    }

    inline ExperimentConfig load_config(const std::filesystem::path &path, std::optional<Preset> force = std::nullopt)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot read configuration " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str(), force);
    }

    // Users uniform in each cluster disk at the cluster centre's height
    inline Scenario generate_scenario(const ExperimentConfig &c, Rng &rng)
    {
        c.validate();
        Scenario s;
        s.bs_location = c.bs;
        for (const auto &cl : c.clusters)
            for (std::size_t u = 0; u < cl.users; ++u)
            {
                const double r = cl.radius * std::sqrt(rng.uniform());
                const double a = rng.uniform(0.0, two_pi);
                s.users.push_back(cl.centre + Vec3(r * std::cos(a), r * std::sin(a), 0.0));
            }
        s.deploy_box = c.box;
        s.constants = c.constants();
        s.p_max = dbm_to_watts(c.pmax_dbm);
        s.r_min = c.r_min;
        s.n_antennas = c.n_antennas;
        s.n_elements = c.n_elements;
        s.n_rows = c.n_rows;
        s.validate();
        return s;
    }
}

#endif
