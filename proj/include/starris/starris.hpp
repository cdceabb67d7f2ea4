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

#ifndef STARRIS_STARRIS_HPP
#define STARRIS_STARRIS_HPP

// Everything: geometry, channels, grouping, conic solver, beamforming, search, harness and I/O.

#include "beamform.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "conic.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "geom.hpp"
#include "grouping.hpp"
#include "harness.hpp"
#include "random.hpp"
#include "results_io.hpp"
#include "scenario.hpp"

#endif
