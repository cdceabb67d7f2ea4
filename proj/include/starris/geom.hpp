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

#ifndef STARRIS_GEOM_HPP
#define STARRIS_GEOM_HPP

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

// 3D geometry: surface rotation, local-frame angles and direction vectors.
//
// Angle naming follows the channel model literally: the arctan2 of the first two local
// components is called "elevation" and the arcsin of the third one "azimuth". This is the
// reverse of the usual convention; the formulas, not the names, are what matter downstream.

namespace starris
{
    using Vec3 = Eigen::Vector3d;
    using RotationMatrix = Eigen::Matrix3d;

    inline constexpr double two_pi = 2.0 * std::numbers::pi;

    inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    // Wraps an angle into [0, 2*pi)
    inline double wrap_two_pi(double a)
    {
        double r = std::fmod(a, two_pi);
        if (r < 0.0)
            r += two_pi;
        if (r >= two_pi) // fmod of a tiny negative number
            r = 0.0;
        return r;
    }

    // Surface roll angle about the z-axis, kept in [0, 2*pi)
    class Orientation
    {
    public:
        Orientation() = default;
        explicit Orientation(double roll_rad) : roll_(wrap_two_pi(roll_rad)) {}
        static Orientation from_degrees(double deg) { return Orientation(deg_to_rad(deg)); }

        double roll() const { return roll_; }
        double degrees() const { return rad_to_deg(roll_); }

    private:
        double roll_ = 0.0;
    };

    struct AnglePair
    {
        double elev = 0.0; // arctan2 of local (y, x), in (-pi, pi]
        double azim = 0.0; // arcsin of local z over distance, in [-pi/2, pi/2]
    };

    // Rotation about the z-axis by the roll angle
    inline RotationMatrix rotation_matrix(Orientation o)
    {
        return Eigen::AngleAxisd(o.roll(), Vec3::UnitZ()).toRotationMatrix();
    }

    // Angles of (to - from) expressed in the local frame T^T (to - from).
    // atan2(0, 0) is taken as 0 for vertical baselines.
    inline AnglePair local_angles(const RotationMatrix &T, const Vec3 &from, const Vec3 &to)
    {
        const Vec3 delta = to - from;
        const double dist = delta.norm();
        if (!(dist >= 1e-9))
            throw ZeroBaseline("local_angles: points closer than 1e-9 m");
        const Vec3 local = T.transpose() * delta;
        AnglePair a;
        a.elev = (local.x() == 0.0 && local.y() == 0.0) ? 0.0 : std::atan2(local.y(), local.x());
        a.azim = std::asin(std::clamp(local.z() / dist, -1.0, 1.0));
        return a;
    }

    // t(elev, azim) = [cos e cos a, sin e cos a, sin a]
    inline Vec3 direction_vector(AnglePair a)
    {
        const double ca = std::cos(a.azim);
        return {std::cos(a.elev) * ca, std::sin(a.elev) * ca, std::sin(a.azim)};
    }

    // Axis-aligned deployment region
    struct Box
    {
        Vec3 lo = Vec3::Zero();
        Vec3 hi = Vec3::Zero();

        bool contains(const Vec3 &p, double tol = 1e-12) const
        {
            return (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
        }
    };
}

#endif
