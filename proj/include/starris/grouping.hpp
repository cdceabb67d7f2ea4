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

#ifndef STARRIS_GROUPING_HPP
#define STARRIS_GROUPING_HPP

#include "channel.hpp"
#include "errors.hpp"
#include "geom.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

// Point-point representation of the user grouping. A surface at s with roll phi splits the
// plane (top view) by the boundary line through s with direction (cos phi, sin phi). Users on
// the BS side are reflected, the others transmitted.
//
// A line is unchanged by phi -> phi + pi, so the orientation bands used by the optimizer are
// built from user angles taken modulo pi (line_sweep). Inside one such band no user crosses the
// line, but the BS may: crossing it swaps every T/R flag at once. The induced partition of the
// users into two groups is therefore constant over a band, the labels only up to that swap.

namespace starris
{
    // Counterclockwise offset applied to the band edges, 0.001 degrees
    inline const double default_band_offset = deg_to_rad(0.001);

    struct SweepOrder
    {
        std::vector<double> sorted_angles;   // ascending, in [0, period)
        std::vector<std::size_t> user_perm;  // user_perm[i] is the user at sorted position i
        double period = two_pi;

        std::size_t size() const { return sorted_angles.size(); }
    };

    namespace detail
    {
        inline SweepOrder sweep(const Vec3 &s, std::span<const Vec3> users, double period)
        {
            const std::size_t K = users.size();
            std::vector<double> angle(K), dist(K);
            for (std::size_t k = 0; k < K; ++k)
            {
                const double dx = users[k].x() - s.x();
                const double dy = users[k].y() - s.y();
                dist[k] = std::hypot(dx, dy);
                if (dist[k] < 1e-9)
                    throw CoincidentUser("sweep_angles: user " + std::to_string(k) + " shares (x,y) with the surface");
                double a = std::fmod(wrap_two_pi(std::atan2(dy, dx)), period);
                if (a >= period)
                    a = 0.0;
                angle[k] = a;
            }
            SweepOrder so;
            so.period = period;
            so.user_perm.resize(K);
            std::iota(so.user_perm.begin(), so.user_perm.end(), std::size_t{0});
            std::sort(so.user_perm.begin(), so.user_perm.end(), [&](std::size_t a, std::size_t b)
                      {
                          if (angle[a] != angle[b])
                              return angle[a] < angle[b];
                          if (dist[a] != dist[b])
                              return dist[a] < dist[b];
                          return a < b;
                      });
            so.sorted_angles.reserve(K);
            for (auto k : so.user_perm)
                so.sorted_angles.push_back(angle[k]);
            return so;
        }
    }

    // Polar angles of the users seen from s (top view), counterclockwise from +x, in [0, 2 pi).
    // Ties: nearer user first, then lower index.
    inline SweepOrder sweep_angles(const Vec3 &s, std::span<const Vec3> users)
    {
        return detail::sweep(s, users, two_pi);
    }

    // Same ordering for a line through s: angles taken modulo pi
    inline SweepOrder line_sweep(const Vec3 &s, std::span<const Vec3> users)
    {
        return detail::sweep(s, users, std::numbers::pi);
    }

    // Sign of (cos phi, sin phi) x (p - s) in the x-y plane
    inline int side_of_line(const Vec3 &s, Orientation phi, const Vec3 &p)
    {
        const double v = std::cos(phi.roll()) * (p.y() - s.y()) - std::sin(phi.roll()) * (p.x() - s.x());
        if (std::abs(v) < 1e-9)
            throw OnBoundary("side_of_line: point on the boundary line");
        return v > 0.0 ? 1 : -1;
    }

    inline std::vector<Side> grouping_from_orientation(const Vec3 &s, Orientation phi, std::span<const Vec3> users,
                                                       const Vec3 &b)
    {
        const int bs_side = side_of_line(s, phi, b);
        std::vector<Side> flags;
        flags.reserve(users.size());
        for (const auto &u : users)
            flags.push_back(side_of_line(s, phi, u) == bs_side ? Side::Reflection : Side::Transmission);
        return flags;
    }

    // Half-open orientation interval [lo, hi) in radians; hi may exceed the period
    struct Band
    {
        double lo = 0.0;
        double hi = 0.0;
        double period = two_pi;

        double width() const { return hi - lo; }
        double mid() const { return 0.5 * (lo + hi); }

        bool contains(double phi) const
        {
            double r = std::fmod(phi - lo, period);
            if (r < 0.0)
                r += period;
            return r < width();
        }
    };

    // Band of orientations in which the user at sorted position c (0-based) is the last one swept:
    // [phi_(c) + offset, phi_(c+1) + offset), the last band wrapping by one period.
    inline Band orientation_band(const SweepOrder &so, std::size_t c, double offset = default_band_offset)
    {
        const std::size_t K = so.size();
        if (c >= K)
            throw BadDimensions("orientation_band: boundary index out of range");
        Band band;
        band.period = so.period;
        band.lo = so.sorted_angles[c] + offset;
        band.hi = (c + 1 < K ? so.sorted_angles[c + 1] : so.sorted_angles[0] + so.period) + offset;
        return band;
    }

    // Flags inside a band, evaluated at `phi`; if the BS sits on the line there, a nearby point
    // of the same band is used (the partition does not depend on the choice).
    inline std::vector<Side> band_grouping(const Vec3 &s, std::span<const Vec3> users, const Vec3 &b, const Band &band,
                                           double phi)
    {
        const double fracs[] = {0.0, 1e-6, -1e-6, 1e-3, -1e-3, 0.1, -0.1};
        for (double f : fracs)
        {
            const double p = phi + f * band.width();
            if (f != 0.0 && !band.contains(p))
                continue;
            try
            {
                return grouping_from_orientation(s, Orientation(p), users, b);
            }
            catch (const OnBoundary &)
            {
            }
        }
        throw OnBoundary("band_grouping: no well-defined grouping near the requested orientation");
    }

    // Users of group T as a bit mask
    inline std::uint64_t transmission_mask(std::span<const Side> flags)
    {
        if (flags.size() > 64)
            throw BadDimensions("transmission_mask: at most 64 users");
        std::uint64_t m = 0;
        for (std::size_t k = 0; k < flags.size(); ++k)
            if (flags[k] == Side::Transmission)
                m |= std::uint64_t{1} << k;
        return m;
    }

    // Unordered partition {T, R} as a mask in which user 0 is always in the cleared group
    inline std::uint64_t partition_key(std::span<const Side> flags)
    {
        const std::uint64_t m = transmission_mask(flags);
        const std::uint64_t all = flags.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << flags.size()) - 1;
        return (m & 1u) ? (~m & all) : m;
    }

    // D = |mean T distance - mean R distance| * max(|N_T - N_R|, 1e-3). An empty side counts with
    // mean distance 0 and size 0.
    inline double differential_distance(const Vec3 &s, std::span<const Vec3> users, std::span<const Side> flags)
    {
        if (flags.size() != users.size())
            throw BadDimensions("differential_distance: one flag per user");
        double sum_t = 0.0, sum_r = 0.0;
        std::size_t n_t = 0, n_r = 0;
        for (std::size_t k = 0; k < users.size(); ++k)
        {
            const double d = (users[k] - s).norm();
            if (flags[k] == Side::Transmission)
                sum_t += d, ++n_t;
            else
                sum_r += d, ++n_r;
        }
        const double mean_t = n_t ? sum_t / static_cast<double>(n_t) : 0.0;
        const double mean_r = n_r ? sum_r / static_cast<double>(n_r) : 0.0;
        const double dn = std::abs(static_cast<double>(n_t) - static_cast<double>(n_r));
        return std::abs(mean_t - mean_r) * std::max(dn, 1e-3);
    }

    enum class SelectionLaw
    {
        InverseDistance, // p_c proportional to 1 / max(D_c, 1e-9): balanced groupings favoured
        Literal          // p_c = D_c / sum D, kept for comparison
    };

    struct GroupingCandidates
    {
        SweepOrder order;
        std::vector<Band> bands;             // per sorted position
        std::vector<double> distance;        // D_c per sorted position
        std::vector<bool> usable;            // band non-empty and grouping well defined
    };

    inline GroupingCandidates grouping_candidates(const Vec3 &s, std::span<const Vec3> users, const Vec3 &b,
                                                  double offset = default_band_offset)
    {
        GroupingCandidates gc;
        gc.order = line_sweep(s, users);
        const std::size_t K = users.size();
        gc.bands.resize(K);
        gc.distance.assign(K, 0.0);
        gc.usable.assign(K, false);
        for (std::size_t c = 0; c < K; ++c)
        {
            gc.bands[c] = orientation_band(gc.order, c, offset);
            if (!(gc.bands[c].width() > 1e-12))
                continue;
            try
            {
                const auto flags = band_grouping(s, users, b, gc.bands[c], gc.bands[c].mid());
                gc.distance[c] = differential_distance(s, users, flags);
                gc.usable[c] = true;
            }
            catch (const OnBoundary &)
            {
            }
        }
        return gc;
    }

    // Roulette-wheel choice of the boundary user's sorted position (0-based)
    inline std::size_t roulette(const GroupingCandidates &gc, Rng &rng, SelectionLaw law = SelectionLaw::InverseDistance)
    {
        const std::size_t K = gc.distance.size();
        std::vector<double> weight(K, 0.0);
        for (std::size_t c = 0; c < K; ++c)
            if (gc.usable[c])
                weight[c] = law == SelectionLaw::InverseDistance ? 1.0 / std::max(gc.distance[c], 1e-9)
                                                                 : gc.distance[c];
        double total = std::accumulate(weight.begin(), weight.end(), 0.0);
        if (!(total > 0.0))
        {
            for (std::size_t c = 0; c < K; ++c)
                weight[c] = gc.usable[c] ? 1.0 : 0.0;
            total = std::accumulate(weight.begin(), weight.end(), 0.0);
            if (!(total > 0.0))
                throw OnBoundary("balanced_grouping: no orientation band yields a well-defined grouping");
        }
        const double u = rng.uniform() * total;
        double acc = 0.0;
        std::size_t last = 0;
        for (std::size_t c = 0; c < K; ++c)
        {
            if (weight[c] <= 0.0)
                continue;
            acc += weight[c];
            last = c;
            if (u < acc)
                return c;
        }
        return last;
    }

    inline std::size_t balanced_grouping(const Vec3 &s, std::span<const Vec3> users, const Vec3 &b, Rng &rng,
                                         SelectionLaw law = SelectionLaw::InverseDistance)
    {
        return roulette(grouping_candidates(s, users, b), rng, law);
    }
}

#endif
