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

#ifndef STARRIS_CHANNEL_HPP
#define STARRIS_CHANNEL_HPP

#include "errors.hpp"
#include "geom.hpp"
#include "random.hpp"
#include "scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace starris
{
    using CVector = Eigen::VectorXcd;
    using CRowVector = Eigen::RowVectorXcd;
    using CMatrix = Eigen::MatrixXcd;

    // Which surface beam serves a user
    enum class Side
    {
        Transmission, // user and BS on different sides of the boundary line
        Reflection    // user and BS on the same side
    };

    // Element positions in the local frame [m]
    struct ArrayGeometry
    {
        std::vector<Vec3> positions;
        std::size_t size() const { return positions.size(); }
    };

    // Uniform planar array in the local x-z plane, centred at the origin.
    // `rows_along_z` rows are stacked on the z-axis, each with n_elems / rows_along_z columns
    // along the local x-axis (the surface's in-plane horizontal direction).
    inline ArrayGeometry build_array(std::size_t n_elems, std::size_t rows_along_z, double spacing)
    {
        if (n_elems == 0 || rows_along_z == 0 || n_elems % rows_along_z != 0)
            throw BadDimensions("build_array: element count must be a positive multiple of the row count");
        const std::size_t cols = n_elems / rows_along_z;
        const double x0 = 0.5 * static_cast<double>(cols - 1);
        const double z0 = 0.5 * static_cast<double>(rows_along_z - 1);
        ArrayGeometry g;
        g.positions.reserve(n_elems);
        for (std::size_t r = 0; r < rows_along_z; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                g.positions.emplace_back((static_cast<double>(c) - x0) * spacing, 0.0,
                                         (static_cast<double>(r) - z0) * spacing);
        return g;
    }

    // Uniform linear array along the local y-axis (BS antennas)
    inline ArrayGeometry build_linear_array(std::size_t n_elems, double spacing)
    {
        if (n_elems == 0)
            throw BadDimensions("build_linear_array: empty array");
        const double y0 = 0.5 * static_cast<double>(n_elems - 1);
        ArrayGeometry g;
        for (std::size_t n = 0; n < n_elems; ++n)
            g.positions.emplace_back(0.0, (static_cast<double>(n) - y0) * spacing, 0.0);
        return g;
    }

    // Cascaded BS -> surface -> user power gain (rho0 / d_BS^alpha) (rho0 / d_SU^alpha)
    inline double path_loss(const Vec3 &s, const Vec3 &b, const Vec3 &u, const RadioConstants &c)
    {
        const double d_bs = (s - b).norm();
        const double d_su = (s - u).norm();
        if (!(d_bs >= 1e-9) || !(d_su >= 1e-9))
            throw ZeroDistance("path_loss: surface coincides with the BS or a user");
        return (c.rho0 / std::pow(d_bs, c.alpha)) * (c.rho0 / std::pow(d_su, c.alpha));
    }

    // Steering vector, element n: exp(j 2 pi / lambda * p_n^T t(a))
    inline CVector array_response(const ArrayGeometry &g, AnglePair a, double wavelength)
    {
        const Vec3 t = direction_vector(a);
        const double k = 2.0 * std::numbers::pi / wavelength;
        CVector out(static_cast<Eigen::Index>(g.size()));
        for (std::size_t n = 0; n < g.size(); ++n)
            out(static_cast<Eigen::Index>(n)) = std::polar(1.0, k * g.positions[n].dot(t));
        return out;
    }

    inline ArrayGeometry star_array(const Scenario &scn)
    {
        return build_array(scn.n_elements, scn.n_rows, scn.constants.spacing);
    }

    inline ArrayGeometry bs_array(const Scenario &scn)
    {
        return build_linear_array(scn.n_antennas, scn.constants.spacing);
    }

    // Rayleigh (NLoS) components, entries i.i.d. CN(0,1)
    struct NlosDraw
    {
        CMatrix G;              // M x N_a
        std::vector<CVector> v; // K vectors of length M
    };

    inline NlosDraw draw_nlos(Rng &rng, std::size_t n_elements, std::size_t n_antennas, std::size_t n_users)
    {
        NlosDraw d;
        const auto M = static_cast<Eigen::Index>(n_elements);
        const auto Na = static_cast<Eigen::Index>(n_antennas);
        d.G.resize(M, Na);
        for (Eigen::Index j = 0; j < Na; ++j)
            for (Eigen::Index i = 0; i < M; ++i)
                d.G(i, j) = rng.complex_normal();
        d.v.resize(n_users);
        for (auto &vk : d.v)
        {
            vk.resize(M);
            for (Eigen::Index i = 0; i < M; ++i)
                vk(i) = rng.complex_normal();
        }
        return d;
    }

    // One channel realization: BS->surface matrix G (M x N_a), surface->user vectors v_k and
    // the cascaded path losses L_k.
    struct ChannelSet
    {
        CMatrix G;
        std::vector<CVector> v;
        std::vector<double> path_loss;

        std::size_t n_users() const { return v.size(); }
        Eigen::Index n_elements() const { return G.rows(); }
        Eigen::Index n_antennas() const { return G.cols(); }
    };

    // Rician combination of the deterministic LoS part (set by the surface location and roll)
    // with the given NLoS draw. A null draw gives the LoS-only channel.
    inline ChannelSet compose_channels(const Scenario &scn, const Vec3 &s, Orientation o, const NlosDraw *nlos)
    {
        const auto &c = scn.constants;
        const RotationMatrix T_s = rotation_matrix(o);
        const RotationMatrix T_b = RotationMatrix::Identity();
        const ArrayGeometry star = star_array(scn);
        const ArrayGeometry bs = bs_array(scn);

        const CVector a_bs = array_response(bs, local_angles(T_b, scn.bs_location, s), c.wavelength);
        const CVector a_sb = array_response(star, local_angles(T_s, s, scn.bs_location), c.wavelength);

        const double los_bs = std::sqrt(c.rician_bs / (1.0 + c.rician_bs));
        const double nlos_bs = std::sqrt(1.0 / (1.0 + c.rician_bs));
        const double los_su = std::sqrt(c.rician_su / (1.0 + c.rician_su));
        const double nlos_su = std::sqrt(1.0 / (1.0 + c.rician_su));

        ChannelSet cs;
        cs.G = los_bs * (a_sb * a_bs.transpose());
        if (nlos)
        {
            if (nlos->G.rows() != cs.G.rows() || nlos->G.cols() != cs.G.cols() || nlos->v.size() != scn.n_users())
                throw BadDimensions("compose_channels: NLoS draw does not match the scenario");
            cs.G += nlos_bs * nlos->G;
        }
        const std::size_t K = scn.n_users();
        cs.v.resize(K);
        cs.path_loss.resize(K);
        for (std::size_t k = 0; k < K; ++k)
        {
            cs.v[k] = los_su * array_response(star, local_angles(T_s, s, scn.users[k]), c.wavelength);
            if (nlos)
                cs.v[k] += nlos_su * nlos->v[k];
            cs.path_loss[k] = path_loss(s, scn.bs_location, scn.users[k], c);
        }
        return cs;
    }

    inline ChannelSet sample_channels(const Scenario &scn, const Vec3 &s, Orientation o, Rng &rng, bool los_only)
    {
        if (los_only)
            return compose_channels(scn, s, o, nullptr);
        const NlosDraw d = draw_nlos(rng, scn.n_elements, scn.n_antennas, scn.n_users());
        return compose_channels(scn, s, o, &d);
    }

    // A scenario together with one fixed NLoS draw. The LoS part follows whatever deployment is
    // queried, so every algorithm evaluated on the same realization sees identical fading.
    class ChannelRealization
    {
    public:
        ChannelRealization(Scenario scn, NlosDraw nlos, bool los_only)
            : scn_(std::move(scn)), nlos_(std::move(nlos)), los_only_(los_only) {}

        static ChannelRealization draw(const Scenario &scn, Rng &rng, bool los_only)
        {
            return {scn, draw_nlos(rng, scn.n_elements, scn.n_antennas, scn.n_users()), los_only};
        }

        ChannelSet at(const Vec3 &s, Orientation o) const
        {
            return compose_channels(scn_, s, o, los_only_ ? nullptr : &nlos_);
        }

        const Scenario &scenario() const { return scn_; }
        const NlosDraw &nlos() const { return nlos_; }
        bool los_only() const { return los_only_; }

    private:
        Scenario scn_;
        NlosDraw nlos_;
        bool los_only_;
    };

    // Transmission and reflection coefficient vectors. Energy splitting requires
    // |theta_t,m|^2 + |theta_r,m|^2 = 1 for every element.
    struct PassivePair
    {
        CVector theta_t;
        CVector theta_r;

        const CVector &for_side(Side s) const { return s == Side::Transmission ? theta_t : theta_r; }

        double max_coupling_error() const
        {
            return (theta_t.cwiseAbs2() + theta_r.cwiseAbs2() - Eigen::VectorXd::Ones(theta_t.size()))
                .cwiseAbs()
                .maxCoeff();
        }
    };

    // h_k = sqrt(L_k) v_k^H diag(theta) G with theta picked by the user's side
    inline CRowVector cascaded_channel(const ChannelSet &cs, std::size_t k, const PassivePair &pp, Side side)
    {
        const CVector &theta = pp.for_side(side);
        const CVector weighted = cs.v[k].conjugate().cwiseProduct(theta);
        return std::sqrt(cs.path_loss[k]) * (weighted.transpose() * cs.G);
    }

    inline std::vector<CRowVector> cascaded_channels(const ChannelSet &cs, const PassivePair &pp,
                                                     std::span<const Side> grouping)
    {
        if (grouping.size() != cs.n_users())
            throw BadDimensions("cascaded_channels: grouping size differs from user count");
        std::vector<CRowVector> h;
        h.reserve(cs.n_users());
        for (std::size_t k = 0; k < cs.n_users(); ++k)
            h.push_back(cascaded_channel(cs, k, pp, grouping[k]));
        return h;
    }

    struct RateReport
    {
        std::vector<double> per_user_rate; // [bits/s/Hz]
        double sum_rate = 0.0;
        double qos_violation = 0.0; // sum_k max(0, R_min - R_k)
    };

    // SINR rates of every user for given cascaded channels and active beamformers
    inline RateReport rates_from_channels(std::span<const CRowVector> h, std::span<const CVector> W,
                                          double noise_power, double r_min)
    {
        if (h.size() != W.size())
            throw BadDimensions("rates: need one beamformer per user");
        RateReport r;
        r.per_user_rate.resize(h.size());
        for (std::size_t k = 0; k < h.size(); ++k)
        {
            double signal = 0.0;
            double interference = 0.0;
            for (std::size_t j = 0; j < W.size(); ++j)
            {
                if (W[j].size() != h[k].size())
                    throw BadDimensions("rates: beamformer length differs from antenna count");
                const double g = std::norm(h[k].dot(W[j].conjugate()));
                (j == k ? signal : interference) += g;
            }
            const double rate = std::log2(1.0 + signal / (interference + noise_power));
            r.per_user_rate[k] = rate;
            r.sum_rate += rate;
            r.qos_violation += std::max(0.0, r_min - rate);
        }
        return r;
    }

    inline RateReport rates(const ChannelSet &cs, const PassivePair &pp, std::span<const Side> grouping,
                            std::span<const CVector> W, double noise_power, double r_min)
    {
        const auto h = cascaded_channels(cs, pp, grouping);
        return rates_from_channels(h, W, noise_power, r_min);
    }
}

#endif
