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

#ifndef STARRIS_SCENARIO_HPP
#define STARRIS_SCENARIO_HPP

#include "errors.hpp"
#include "geom.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace starris
{
    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
    inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

    // Radio constants, all linear (dB inputs are converted when the configuration is loaded)
    struct RadioConstants
    {
        double wavelength = 0.125;     // [m]
        double spacing = 0.0625;       // element spacing [m], half a wavelength
        double rho0 = 1e-3;            // power gain at 1 m (-30 dB)
        double alpha = 2.2;            // path-loss exponent
        double rician_bs = db_to_linear(3.0);
        double rician_su = db_to_linear(3.0);
        double noise_power = 1e-12;    // [W] (-90 dBm)

        void validate() const
        {
            auto positive = [](double v, const char *name)
            {
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ConfigError(name, "must be strictly positive and finite");
            };
            positive(wavelength, "wavelength");
            positive(spacing, "spacing");
            positive(rho0, "rho0");
            positive(alpha, "alpha");
            positive(rician_bs, "rician_bs");
            positive(rician_su, "rician_su");
            positive(noise_power, "noise_power");
            if (rho0 > 1.0)
                throw ConfigError("rho0", "reference gain must not exceed 1");
        }
    };

    // Immutable world description shared by every algorithm
    struct Scenario
    {
        Vec3 bs_location = Vec3::Zero();
        std::vector<Vec3> users;
        Box deploy_box;
        RadioConstants constants;
        double p_max = 0.1;            // [W]
        double r_min = 0.1;            // [bits/s/Hz]
        std::size_t n_antennas = 4;    // BS antennas
        std::size_t n_elements = 20;   // surface elements
        std::size_t n_rows = 5;        // surface rows stacked along z

        std::size_t n_users() const { return users.size(); }

        void validate() const
        {
            constants.validate();
            if (users.empty())
                throw ConfigError("users", "at least one user is required");
            if ((deploy_box.hi.array() < deploy_box.lo.array()).any())
                throw ConfigError("deploy_box", "empty deployment region");
            if (!(p_max > 0.0))
                throw ConfigError("pmax", "must be positive");
            if (r_min < 0.0)
                throw ConfigError("rmin", "must be non-negative");
            if (n_antennas == 0)
                throw ConfigError("n_antennas", "must be at least 1");
            if (n_elements == 0 || n_rows == 0 || n_elements % n_rows != 0)
                throw ConfigError("n_elements", "must be a positive multiple of n_rows");
        }
    };
}

#endif
