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

#ifndef STARRIS_RESULTS_IO_HPP
#define STARRIS_RESULTS_IO_HPP

#include "harness.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// Result files. Numbers are printed with 17 significant digits so that parsing a file gives
// back the exact doubles; every file is written to a temporary name and renamed into place.

namespace starris
{
    inline constexpr const char *results_header = "algo,seed,M,N_a,P_max_dBm,mean_sum_rate,std_sum_rate,runtime_s";
    inline constexpr const char *trace_header =
        "algo,seed,M,N_a,P_max_dBm,distribution,run,generation,evaluations,best_fitness,best_violation,mean_fitness";
    inline constexpr const char *robustness_header =
        "algo,seed,M,N_a,P_max_dBm,distribution,run,csi_error_level,worst_sum_rate";

    inline std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    // Writes `text` to `path` through a sibling temporary file
    inline void write_atomic(const std::filesystem::path &path, const std::string &text)
    {
        namespace fs = std::filesystem;
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw IoError("cannot write " + tmp.string());
            out << text;
            out.flush();
            if (!out)
                throw IoError("cannot write " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec)
        {
            fs::remove(tmp, ec);
            throw IoError("cannot rename into " + path.string());
        }
    }

    namespace detail
    {
        inline std::string cell_prefix(const ResultRow &r)
        {
            return r.algo + "," + std::to_string(r.seed) + "," + std::to_string(r.M) + "," + std::to_string(r.N_a) +
                   "," + format_double(r.P_max_dBm);
        }

        inline std::vector<std::string> split_csv(const std::string &line)
        {
            std::vector<std::string> out;
            std::string cur;
            for (char ch : line)
            {
                if (ch == ',')
                    out.push_back(std::move(cur)), cur.clear();
                else if (ch != '\r')
                    cur += ch;
            }
            out.push_back(std::move(cur));
            return out;
        }

        inline double parse_double(const std::string &s, const std::string &where)
        {
            try
            {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used == s.size())
                    return v;
            }
            catch (const std::exception &)
            {
            }
            throw IoError(where + ": not a number '" + s + "'");
        }

        inline std::uint64_t parse_u64(const std::string &s, const std::string &where)
        {
            try
            {
                std::size_t used = 0;
                const auto v = std::stoull(s, &used);
                if (used == s.size() && !s.empty() && s[0] != '-')
                    return v;
            }
            catch (const std::exception &)
            {
            }
            throw IoError(where + ": not an unsigned integer '" + s + "'");
        }
    }

    inline std::string results_csv(const std::vector<ResultRow> &rows)
    {
        std::string out = std::string(results_header) + "\n";
        for (const auto &r : rows)
            out += detail::cell_prefix(r) + "," + format_double(r.mean_sum_rate) + "," +
                   format_double(r.std_sum_rate) + "," + (r.runtime_s ? format_double(*r.runtime_s) : "NA") + "\n";
        return out;
    }

    inline std::vector<ResultRow> parse_results_csv(const std::string &text)
    {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || detail::split_csv(line) != detail::split_csv(results_header))
            throw IoError("results.csv: unexpected header");
        std::vector<ResultRow> rows;
        std::size_t n = 1;
        while (std::getline(in, line))
        {
            ++n;
            if (line.empty())
                continue;
            const auto f = detail::split_csv(line);
            const std::string where = "results.csv line " + std::to_string(n);
            if (f.size() != 8)
                throw IoError(where + ": expected 8 columns");
            ResultRow r;
            r.algo = f[0];
            r.seed = detail::parse_u64(f[1], where);
            r.M = detail::parse_u64(f[2], where);
            r.N_a = detail::parse_u64(f[3], where);
            r.P_max_dBm = detail::parse_double(f[4], where);
            r.mean_sum_rate = detail::parse_double(f[5], where);
            r.std_sum_rate = detail::parse_double(f[6], where);
            if (f[7] != "NA")
                r.runtime_s = detail::parse_double(f[7], where);
            rows.push_back(std::move(r));
        }
        return rows;
    }

    inline std::string trace_csv(const std::vector<CellResult> &cells)
    {
        std::string out = std::string(trace_header) + "\n";
        for (const auto &c : cells)
        {
            const std::string prefix = detail::cell_prefix(c.row);
            for (const auto &t : c.trace)
                out += prefix + "," + std::to_string(t.distribution) + "," + std::to_string(t.run) + "," +
                       std::to_string(t.record.generation) + "," + std::to_string(t.record.evaluations) + "," +
                       format_double(t.record.best_fitness) + "," + format_double(t.record.best_violation) + "," +
                       format_double(t.record.mean_fitness) + "\n";
        }
        return out;
    }

    inline std::string robustness_csv(const std::vector<CellResult> &cells)
    {
        std::string out = std::string(robustness_header) + "\n";
        for (const auto &c : cells)
        {
            const std::string prefix = detail::cell_prefix(c.row);
            for (const auto &r : c.robustness)
                out += prefix + "," + std::to_string(r.distribution) + "," + std::to_string(r.run) + "," +
                       format_double(r.level) + "," + format_double(r.worst_sum_rate) + "\n";
        }
        return out;
    }

    // {x, y, z, phi_deg, c, per_user_rates, sum_rate} plus feasibility details; c is the index
    // of the boundary user in the scenario's user list
    inline nlohmann::ordered_json deployment_json(const Individual &ind)
    {
        nlohmann::ordered_json j;
        j["x"] = ind.s.x();
        j["y"] = ind.s.y();
        j["z"] = ind.s.z();
        j["phi_deg"] = ind.phi.degrees();
        j["c"] = ind.boundary_user;
        j["per_user_rates"] = ind.rates.per_user_rate;
        j["sum_rate"] = ind.failed() ? 0.0 : ind.fitness;
        j["qos_violation"] = ind.failed() ? nullptr : nlohmann::ordered_json(ind.violation);
        j["feasible"] = ind.feasible();
        if (ind.failed())
            j["failure"] = ind.failure;
        return j;
    }

    inline std::string dump_json(const nlohmann::ordered_json &j)
    {
        return j.dump(2) + "\n";
    }

    // Best deployment over all cells at the top level, then one entry per cell
    inline std::string best_json(const std::vector<CellResult> &cells)
    {
        std::size_t b = 0;
        for (std::size_t i = 1; i < cells.size(); ++i)
            if (better(cells[i].best, cells[b].best))
                b = i;
        auto top = deployment_json(cells[b].best);
        top["M"] = cells[b].row.M;
        top["N_a"] = cells[b].row.N_a;
        top["P_max_dBm"] = cells[b].row.P_max_dBm;
        auto arr = nlohmann::ordered_json::array();
        for (const auto &c : cells)
        {
            auto e = deployment_json(c.best);
            e["M"] = c.row.M;
            e["N_a"] = c.row.N_a;
            e["P_max_dBm"] = c.row.P_max_dBm;
            arr.push_back(std::move(e));
        }
        top["cells"] = std::move(arr);
        return dump_json(top);
    }

    // results.csv, best.json, trace.csv and robustness.csv in `dir` (created if needed).
    // Nothing is written for an empty run list.
    inline void write_results(const std::vector<CellResult> &cells, const std::filesystem::path &dir)
    {
        if (cells.empty())
            throw IoError("write_results: no results to write to " + dir.string());
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create directory " + dir.string());
        std::vector<ResultRow> rows;
        for (const auto &c : cells)
            rows.push_back(c.row);
        write_atomic(dir / "results.csv", results_csv(rows));
        write_atomic(dir / "best.json", best_json(cells));
        write_atomic(dir / "trace.csv", trace_csv(cells));
        write_atomic(dir / "robustness.csv", robustness_csv(cells));
    }

    inline std::string read_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot read " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
}

#endif
