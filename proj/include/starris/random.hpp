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

#ifndef STARRIS_RANDOM_HPP
#define STARRIS_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>

namespace starris
{
    // Seeded random stream. The distributions are written out by hand so that a given seed
    // produces the same numbers with every standard library (std:: distributions are not
    // specified bit-exactly).
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

        // Independent sub-stream identified by a master seed and a list of tags
        // (e.g. realization index, generation, individual index).
        static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
        {
            std::uint64_t h = splitmix(master ^ 0x5a17'2f0b'9e37'79b9ULL);
            for (auto t : tags)
                h = splitmix(h ^ splitmix(t + 0x632b'e59b'd9b4'e019ULL));
            return Rng(h);
        }

        std::uint64_t next() { return engine_(); }

        // Uniform double in [0, 1)
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // Uniform integer in [0, n), rejection sampling
        std::size_t index(std::size_t n)
        {
            const std::uint64_t range = n;
            const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                        std::numeric_limits<std::uint64_t>::max() % range;
            std::uint64_t r;
            do
                r = engine_();
            while (r >= limit);
            return static_cast<std::size_t>(r % range);
        }

        // Standard normal, Box-Muller
        double normal()
        {
            double u1 = uniform();
            const double u2 = uniform();
            if (u1 < 1e-300)
                u1 = 1e-300;
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }

        // Circularly-symmetric complex normal with unit variance, CN(0,1)
        std::complex<double> complex_normal()
        {
            const double re = normal();
            const double im = normal();
            return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
        }

    private:
        static std::uint64_t splitmix(std::uint64_t x)
        {
            x += 0x9e37'79b9'7f4a'7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58'476d'1ce4'e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d0'49bb'1331'11ebULL;
            return x ^ (x >> 31);
        }

        std::mt19937_64 engine_;
    };
}

#endif
