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

#ifndef STARRIS_ERRORS_HPP
#define STARRIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace starris
{
    // Base class of every error raised by the library
    struct Error : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

#define STARRIS_DEFINE_ERROR(Name)           \
    struct Name : Error                      \
    {                                        \
        using Error::Error;                  \
    }

    STARRIS_DEFINE_ERROR(ZeroBaseline);       // two points closer than 1e-9 m
    STARRIS_DEFINE_ERROR(BadDimensions);      // inconsistent array or matrix sizes
    STARRIS_DEFINE_ERROR(ZeroDistance);       // path loss undefined
    STARRIS_DEFINE_ERROR(CoincidentUser);     // user shares (x,y) with the surface
    STARRIS_DEFINE_ERROR(OnBoundary);         // point lies on the boundary line
    STARRIS_DEFINE_ERROR(SolverInfeasible);   // QoS cannot be met by a subproblem
    STARRIS_DEFINE_ERROR(SolverFailure);      // the conic backend did not converge
    STARRIS_DEFINE_ERROR(NotNearRank1);       // lifted matrix too far from rank one
    STARRIS_DEFINE_ERROR(DegenerateElement);  // both surface amplitudes vanish
    STARRIS_DEFINE_ERROR(PopulationTooSmall); // DE mutation cannot draw distinct donors
    STARRIS_DEFINE_ERROR(BudgetExceeded);     // brute-force oracle runtime guard
    STARRIS_DEFINE_ERROR(IoError);            // file could not be read or written

#undef STARRIS_DEFINE_ERROR

    // Configuration error carrying the offending field path, e.g. "clusters[1].radius"
    struct ConfigError : Error
    {
        std::string field;
        ConfigError(std::string field_path, const std::string &what)
            : Error(field_path + ": " + what), field(std::move(field_path)) {}
    };
}

#endif
