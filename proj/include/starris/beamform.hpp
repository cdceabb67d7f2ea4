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

#ifndef STARRIS_BEAMFORM_HPP
#define STARRIS_BEAMFORM_HPP

#include "channel.hpp"
#include "conic.hpp"
#include "errors.hpp"
#include "random.hpp"
#include "scenario.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

// Hybrid beamforming by alternating two convex subproblems: active beamformers W_k at the BS
// for fixed surface coefficients, then the lifted surface matrices for fixed beamformers.
//
// Both subproblems use the slack form SINR_k = 1 / (A_k B_k) and replace each rate by its
// tangent plane at the previous iterate, which lower-bounds log2(1 + 1/(A B)) since that
// function is jointly convex. Quantities inside the solver are normalized by the noise power
// and the power budget so that coefficients stay of order one.

namespace starris
{
    struct HybridBeamforming
    {
        std::vector<CVector> w; // K active beamformers, physical units (sqrt W)
        PassivePair passive;

        double total_power() const
        {
            double p = 0.0;
            for (const auto &wk : w)
                p += wk.squaredNorm();
            return p;
        }
    };

    struct LinkBudget
    {
        double p_max = 0.1;        // [W]
        double noise_power = 1e-12; // [W]
        double r_min = 0.1;        // [bits/s/Hz]
    };

    inline LinkBudget link_budget(const Scenario &scn)
    {
        return {scn.p_max, scn.constants.noise_power, scn.r_min};
    }

    // Random phases with beta_t = beta_r = 1/2; random beamformer directions with power P_max/K each
    inline HybridBeamforming init_hybrid(Rng &rng, std::size_t n_antennas, std::size_t n_elements, std::size_t n_users,
                                         double p_max)
    {
        if (n_antennas == 0 || n_elements == 0 || n_users == 0)
            throw BadDimensions("init_hybrid: dimensions must be at least 1");
        const auto M = static_cast<Eigen::Index>(n_elements);
        const auto Na = static_cast<Eigen::Index>(n_antennas);
        HybridBeamforming g;
        g.passive.theta_t.resize(M);
        g.passive.theta_r.resize(M);
        const double amp = std::sqrt(0.5);
        for (Eigen::Index m = 0; m < M; ++m)
        {
            g.passive.theta_t(m) = std::polar(amp, rng.uniform(0.0, two_pi));
            g.passive.theta_r(m) = std::polar(amp, rng.uniform(0.0, two_pi));
        }
        const double per_user = std::sqrt(p_max / static_cast<double>(n_users));
        g.w.resize(n_users);
        for (auto &wk : g.w)
        {
            wk.resize(Na);
            for (Eigen::Index n = 0; n < Na; ++n)
                wk(n) = rng.complex_normal();
            wk *= per_user / wk.norm();
        }
        return g;
    }

    // A_k = 1 / |h_k w_k|^2 and B_k = sum_{j != k} |h_k w_j|^2 + noise, physical units
    struct SlackSet
    {
        std::vector<double> A;
        std::vector<double> B;
    };

    // Smallest useful-signal power used when inverting, [W]
    inline constexpr double signal_floor = 1e-18;

    inline SlackSet slack_from(std::span<const CRowVector> h, std::span<const CVector> w, double noise_power)
    {
        if (h.size() != w.size())
            throw BadDimensions("slack_from: one beamformer per user");
        SlackSet s;
        for (std::size_t k = 0; k < h.size(); ++k)
        {
            double interference = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j)
                if (j != k)
                    interference += std::norm(h[k].dot(w[j].conjugate()));
            s.A.push_back(1.0 / std::max(std::norm(h[k].dot(w[k].conjugate())), signal_floor));
            s.B.push_back(interference + noise_power);
        }
        return s;
    }

    inline SlackSet slack_from(const HybridBeamforming &g, const ChannelSet &cs, std::span<const Side> grouping,
                               double noise_power)
    {
        const auto h = cascaded_channels(cs, g.passive, grouping);
        return slack_from(h, g.w, noise_power);
    }

    // Tangent plane of log2(1 + 1/(A B)) at (A_hat, B_hat)
    inline double taylor_rate_lb(double A, double B, double A_hat, double B_hat)
    {
        const double log2e = std::numbers::log2e;
        const double q = A_hat * B_hat + 1.0;
        return std::log2(1.0 + 1.0 / (A_hat * B_hat)) - log2e * (A - A_hat) / (A_hat * q) -
               log2e * (B - B_hat) / (B_hat * q);
    }

    // Principal eigenpair of a Hermitian matrix
    inline std::pair<double, CVector> principal_eigen(const CMatrix &H)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (H + H.adjoint()));
        const Eigen::Index last = H.rows() - 1;
        return {es.eigenvalues()(last), es.eigenvectors().col(last)};
    }

    // A lifted matrix whose trace is at the level of the solver's interior residue (a surface
    // side that serves nobody) carries no direction worth extracting
    inline bool negligible(const CMatrix &H)
    {
        return H.trace().real() <= 1e-5 * static_cast<double>(H.rows());
    }

    // xi_max / Tr, taken as 1 for a negligible matrix
    inline double rank1_ratio(const CMatrix &H)
    {
        if (negligible(H))
            return 1.0;
        return principal_eigen(H).first / H.trace().real();
    }

    // sqrt(xi_max) e_max; throws when ||v v^H - H||_F / ||H||_F > 0.05
    inline CVector extract_rank1(const CMatrix &H)
    {
        const double nrm = H.norm();
        if (nrm == 0.0)
            return CVector::Zero(H.rows());
        const auto [xi, e] = principal_eigen(H);
        const CVector v = std::sqrt(std::max(xi, 0.0)) * e;
        const double err = (v * v.adjoint() - H).norm() / nrm;
        if (err > 0.05)
            throw NotNearRank1("extract_rank1: relative reconstruction error " + std::to_string(err));
        return v;
    }

    enum class DegeneratePolicy
    {
        Throw, // DegenerateElement
        Split  // beta_t = beta_r = 1/2 with zero phase
    };

    // Keeps phases and rescales each element pair onto |theta_t|^2 + |theta_r|^2 = 1
    inline PassivePair project_coupling(const CVector &theta_t, const CVector &theta_r,
                                        DegeneratePolicy policy = DegeneratePolicy::Throw)
    {
        if (theta_t.size() != theta_r.size())
            throw BadDimensions("project_coupling: vectors differ in length");
        PassivePair pp{theta_t, theta_r};
        for (Eigen::Index m = 0; m < theta_t.size(); ++m)
        {
            const double at = std::abs(theta_t(m)), ar = std::abs(theta_r(m));
            if (at < 1e-12 && ar < 1e-12)
            {
                if (policy == DegeneratePolicy::Throw)
                    throw DegenerateElement("project_coupling: element " + std::to_string(m) + " has no energy");
                pp.theta_t(m) = pp.theta_r(m) = std::sqrt(0.5);
                continue;
            }
            const double n = std::hypot(at, ar);
            pp.theta_t(m) = theta_t(m) / n;
            pp.theta_r(m) = theta_r(m) / n;
        }
        return pp;
    }

    enum class QosMode
    {
        Enforced, // a subproblem whose QoS rows cannot all be met throws SolverInfeasible
        Elastic   // QoS rows carry penalized slack; shortfall shows up as QoS violation
    };

    struct BeamformSettings
    {
        double tolerance = 1e-4;     // on the change of the merit between iterations
        int max_iterations = 30;
        QosMode qos = QosMode::Elastic;
        double qos_penalty = 100.0;  // per bit/s/Hz of QoS shortfall
        double rank_penalty = 100.0; // per unit of rank-constraint slack
        double eps0 = 0.1;
        double eps_growth = 1.5;
        double eps_cap = 0.9995;
        double rank_target = 0.999;
        int max_tightening = 30;
        conic::Settings solver{};
    };

    // Sum rate minus penalized QoS shortfall; the quantity the alternation never lets decrease
    inline double merit(const RateReport &r, const BeamformSettings &st)
    {
        return r.sum_rate - st.qos_penalty * r.qos_violation;
    }

    namespace detail
    {
        // Rate of user k in terms of lifted variables: the useful power <S, X> and the
        // interference powers <I_j, X_j>, all normalized by the noise power
        struct RateTerms
        {
            std::vector<conic::Term> signal;
            std::vector<conic::Term> interference;
        };

        struct ScaUser
        {
            double A_hat, B_hat, f0, c1, c2;
            std::size_t q_block;
            std::size_t u_block = std::numeric_limits<std::size_t>::max();
        };

        inline double term_value(const conic::Term &t, const std::vector<CMatrix> &X)
        {
            return conic::detail::re_trace_product<std::complex<double>>(t.coeff, X[t.block]);
        }

        // Adds, for each user, the 2 x 2 block [[alpha, zeta], [zeta*, t]] with Re zeta = 1 and
        // t = A_hat <S, X> (so alpha t >= 1 means A = A_hat alpha >= 1 / <S, X>), the tangent
        // objective, and the QoS rows with elastic slack.
        inline std::vector<ScaUser> add_sca_rates(conic::Problem &p, const std::vector<RateTerms> &terms,
                                                  std::span<const double> signal_gain,
                                                  std::span<const double> interference_gain, double signal_floor_n,
                                                  double r_min, double qos_penalty)
        {
            const double log2e = std::numbers::log2e;
            std::vector<ScaUser> users;
            for (std::size_t k = 0; k < terms.size(); ++k)
            {
                ScaUser u;
                u.A_hat = 1.0 / std::max(signal_gain[k], signal_floor_n);
                u.B_hat = 1.0 + interference_gain[k];
                const double q = u.A_hat * u.B_hat + 1.0;
                u.f0 = std::log2(1.0 + 1.0 / (u.A_hat * u.B_hat));
                u.c1 = log2e / q;
                u.c2 = log2e / (u.B_hat * q);
                u.q_block = p.add_block(2);

                p.add_constraint({{u.q_block, conic::Problem::entry(2, 0, 1)}}, conic::Relation::Eq, 1.0);
                std::vector<conic::Term> link{{u.q_block, conic::Problem::entry(2, 1, 1)}};
                for (const auto &s : terms[k].signal)
                    link.push_back({s.block, -u.A_hat * s.coeff});
                p.add_constraint(std::move(link), conic::Relation::Eq, 0.0);

                p.add_objective(u.q_block, conic::Problem::entry(2, 0, 0, u.c1));
                for (const auto &t : terms[k].interference)
                    p.add_objective(t.block, u.c2 * t.coeff);

                if (r_min > 0.0)
                {
                    // f0 - c1 (alpha - 1) - c2 sum_interference + u >= r_min
                    u.u_block = p.add_block(1);
                    std::vector<conic::Term> row{{u.q_block, conic::Problem::entry(2, 0, 0, -u.c1)},
                                                 {u.u_block, CMatrix::Ones(1, 1)}};
                    for (const auto &t : terms[k].interference)
                        row.push_back({t.block, -u.c2 * t.coeff});
                    p.add_constraint(std::move(row), conic::Relation::Ge, r_min - u.f0 - u.c1 - u.c2 * (u.B_hat - 1.0));
                    p.add_objective(u.u_block, CMatrix::Constant(1, 1, qos_penalty));
                }
                users.push_back(u);
            }
            return users;
        }

        // Sum of the tangent-plane rates at a solution, and the largest QoS slack used
        inline std::pair<double, double> sca_value(const std::vector<ScaUser> &users, const std::vector<RateTerms> &terms,
                                                   const std::vector<CMatrix> &X)
        {
            double total = 0.0, slack = 0.0;
            for (std::size_t k = 0; k < users.size(); ++k)
            {
                const auto &u = users[k];
                const double alpha = X[u.q_block](0, 0).real();
                double interference = 0.0;
                for (const auto &t : terms[k].interference)
                    interference += term_value(t, X);
                total += u.f0 - u.c1 * (alpha - 1.0) - u.c2 * (interference - (u.B_hat - 1.0));
                if (u.u_block != std::numeric_limits<std::size_t>::max())
                    slack = std::max(slack, X[u.u_block](0, 0).real());
            }
            return {total, slack};
        }

        inline conic::Solution solve_or_throw(conic::ConvexBackend &be, const conic::Problem &p, const char *what)
        {
            auto sol = be.solve(p);
            if (!sol.usable())
                throw SolverFailure(std::string(what) + ": backend " + be.name() + " returned " + conic::to_string(sol.status));
            return sol;
        }
    }

    struct ActiveSet
    {
        std::vector<CMatrix> W; // lifted, normalized by P_max
        std::vector<CVector> w; // extracted, physical units
    };

    struct ActiveOutcome
    {
        ActiveSet active;
        SlackSet slack; // at the returned beamformers
        RateReport rates;
        double surrogate = 0.0; // tangent-plane sum rate of the lifted solution
    };

    // Active subproblem: beamformers for fixed surface coefficients, expanded at `prev`
    inline ActiveOutcome solve_active(const ChannelSet &cs, std::span<const Side> grouping, const HybridBeamforming &prev,
                                      const LinkBudget &lb, conic::ConvexBackend &backend,
                                      const BeamformSettings &st = {})
    {
        const std::size_t K = cs.n_users();
        const Eigen::Index Na = cs.n_antennas();
        if (prev.w.size() != K || grouping.size() != K)
            throw BadDimensions("solve_active: one beamformer and one flag per user");
        const auto h = cascaded_channels(cs, prev.passive, grouping);
        const double scale = std::sqrt(lb.p_max / lb.noise_power);
        const double sp = std::sqrt(lb.p_max);

        std::vector<CMatrix> Hn(K);
        std::vector<bool> served(K);
        for (std::size_t k = 0; k < K; ++k)
        {
            const CRowVector g = scale * h[k];
            Hn[k] = g.adjoint() * g;
            served[k] = g.squaredNorm() >= 1e-9;
        }

        conic::Problem p;
        std::vector<std::size_t> wb(K, 0);
        std::vector<conic::Term> power;
        for (std::size_t k = 0; k < K; ++k)
            if (served[k])
            {
                wb[k] = p.add_block(Na);
                power.push_back({wb[k], CMatrix::Identity(Na, Na)});
            }
        if (power.empty())
            throw SolverFailure("solve_active: no user receives any signal");
        p.add_constraint(std::move(power), conic::Relation::Le, 1.0);

        std::vector<detail::RateTerms> terms;
        std::vector<double> sg, ig;
        std::vector<std::size_t> users;
        for (std::size_t k = 0; k < K; ++k)
        {
            if (!served[k])
                continue;
            detail::RateTerms t;
            t.signal.push_back({wb[k], Hn[k]});
            double interference = 0.0;
            for (std::size_t j = 0; j < K; ++j)
                if (j != k && served[j])
                {
                    t.interference.push_back({wb[j], Hn[k]});
                    interference += (prev.w[j].adjoint() * Hn[k] * prev.w[j]).value().real() / lb.p_max;
                }
            sg.push_back((prev.w[k].adjoint() * Hn[k] * prev.w[k]).value().real() / lb.p_max);
            ig.push_back(interference);
            terms.push_back(std::move(t));
            users.push_back(k);
        }
        const auto sca = detail::add_sca_rates(p, terms, sg, ig, signal_floor / lb.noise_power, lb.r_min, st.qos_penalty);
        const auto sol = detail::solve_or_throw(backend, p, "solve_active");
        const auto [surrogate, qos_slack] = detail::sca_value(sca, terms, sol.X);
        if (st.qos == QosMode::Enforced && qos_slack > 1e-6)
            throw SolverInfeasible("solve_active: QoS targets cannot be met");

        ActiveOutcome out;
        out.surrogate = surrogate;
        out.active.W.assign(K, CMatrix::Zero(Na, Na));
        out.active.w.assign(K, CVector::Zero(Na));
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k)
        {
            if (!served[k])
                continue;
            const CMatrix &W = sol.X[wb[k]];
            out.active.W[k] = W;
            if (rank1_ratio(W) < 0.95)
                throw NotNearRank1("solve_active: beamforming matrix far from rank one");
            const auto [xi, e] = principal_eigen(W);
            out.active.w[k] = std::sqrt(std::max(xi, 0.0)) * e;
            total += out.active.w[k].squaredNorm();
        }
        const double shrink = total > 1.0 ? 1.0 / std::sqrt(total) : 1.0;
        for (auto &wk : out.active.w)
            wk *= shrink * sp;
        out.slack = slack_from(h, out.active.w, lb.noise_power);
        out.rates = rates_from_channels(h, out.active.w, lb.noise_power, lb.r_min);
        return out;
    }

    struct PassiveLift
    {
        CMatrix theta_hat_t;
        CMatrix theta_hat_r;
        double epsilon = 0.0; // last tightening parameter used
    };

    struct PassiveOutcome
    {
        PassiveLift lift;
        PassivePair passive; // extracted and projected onto the coupling law
        SlackSet slack;
        RateReport rates;
        double surrogate = 0.0;
        double rank_ratio_t = 0.0;
        double rank_ratio_r = 0.0;
        int tightening_steps = 0;
    };

    // Passive subproblem for fixed beamformers. The rank-one constraint is approximated by
    // e^H Theta e >= eps Tr(Theta), with e the principal eigenvector of the previous solution
    // and eps raised geometrically until both lifted matrices are rank one to `rank_target`.
    inline PassiveOutcome solve_passive(const ChannelSet &cs, std::span<const Side> grouping,
                                        const HybridBeamforming &current, const LinkBudget &lb,
                                        conic::ConvexBackend &backend, const BeamformSettings &st = {})
    {
        const std::size_t K = cs.n_users();
        const Eigen::Index M = cs.n_elements();
        if (current.w.size() != K || grouping.size() != K)
            throw BadDimensions("solve_passive: one beamformer and one flag per user");

        // a_kj = sqrt(L_k / noise) conj(v_k) o (G w_j) so that |h_k w_j|^2 / noise = theta^H conj(a) a^T theta
        std::vector<CVector> Gw(K);
        for (std::size_t j = 0; j < K; ++j)
            Gw[j] = cs.G * current.w[j];
        std::vector<std::vector<CMatrix>> Hh(K, std::vector<CMatrix>(K));
        std::vector<bool> served(K);
        for (std::size_t k = 0; k < K; ++k)
        {
            const double s = std::sqrt(cs.path_loss[k] / lb.noise_power);
            for (std::size_t j = 0; j < K; ++j)
            {
                const CVector a = s * cs.v[k].conjugate().cwiseProduct(Gw[j]);
                Hh[k][j] = a.conjugate() * a.transpose();
            }
            served[k] = static_cast<double>(M) * Hh[k][k].trace().real() >= 1e-9;
        }

        const auto gain = [&](std::size_t k, std::size_t j)
        {
            const CVector &th = current.passive.for_side(grouping[k]);
            return (th.adjoint() * Hh[k][j] * th).value().real();
        };

        CVector e_t = current.passive.theta_t, e_r = current.passive.theta_r;
        auto unit_or_flat = [M](CVector &e)
        {
            const double n = e.norm();
            e = n > 1e-12 ? CVector(e / n) : CVector(CVector::Ones(M) / std::sqrt(static_cast<double>(M)));
        };
        unit_or_flat(e_t);
        unit_or_flat(e_r);

        PassiveOutcome out;
        double eps = st.eps0;
        bool done = false;
        conic::Solution sol;
        for (int step = 0; step < st.max_tightening && !done; ++step)
        {
            conic::Problem p;
            const std::size_t bt = p.add_block(M), br = p.add_block(M);
            for (Eigen::Index m = 0; m < M; ++m)
                p.add_constraint({{bt, conic::Problem::entry(M, m, m)}, {br, conic::Problem::entry(M, m, m)}},
                                 conic::Relation::Eq, 1.0);
            std::vector<detail::RateTerms> terms;
            std::vector<double> sg, ig;
            for (std::size_t k = 0; k < K; ++k)
            {
                if (!served[k])
                    continue;
                const std::size_t b = grouping[k] == Side::Transmission ? bt : br;
                detail::RateTerms t;
                t.signal.push_back({b, Hh[k][k]});
                double interference = 0.0;
                for (std::size_t j = 0; j < K; ++j)
                    if (j != k)
                    {
                        t.interference.push_back({b, Hh[k][j]});
                        interference += gain(k, j);
                    }
                sg.push_back(gain(k, k));
                ig.push_back(interference);
                terms.push_back(std::move(t));
            }
            const auto sca = detail::add_sca_rates(p, terms, sg, ig, signal_floor / lb.noise_power, lb.r_min,
                                                   st.qos_penalty);
            for (auto [b, e] : {std::pair{bt, &e_t}, std::pair{br, &e_r}})
            {
                const std::size_t u = p.add_block(1);
                p.add_constraint({{b, CMatrix((*e) * e->adjoint() - eps * CMatrix::Identity(M, M))},
                                  {u, CMatrix::Ones(1, 1)}},
                                 conic::Relation::Ge, 0.0);
                p.add_objective(u, CMatrix::Constant(1, 1, st.rank_penalty));
            }
            sol = detail::solve_or_throw(backend, p, "solve_passive");
            const auto [surrogate, qos_slack] = detail::sca_value(sca, terms, sol.X);
            if (st.qos == QosMode::Enforced && qos_slack > 1e-6)
                throw SolverInfeasible("solve_passive: QoS targets cannot be met");

            out.surrogate = surrogate;
            out.lift = {sol.X[bt], sol.X[br], eps};
            out.rank_ratio_t = rank1_ratio(sol.X[bt]);
            out.rank_ratio_r = rank1_ratio(sol.X[br]);
            out.tightening_steps = step + 1;
            done = out.rank_ratio_t >= st.rank_target && out.rank_ratio_r >= st.rank_target;
            if (!done)
            {
                if (!negligible(out.lift.theta_hat_t))
                    e_t = principal_eigen(out.lift.theta_hat_t).second;
                if (!negligible(out.lift.theta_hat_r))
                    e_r = principal_eigen(out.lift.theta_hat_r).second;
                eps = std::min(st.eps_cap, st.eps_growth * eps);
            }
        }

        auto extract = [M](const CMatrix &H) { return negligible(H) ? CVector(CVector::Zero(M)) : extract_rank1(H); };
        out.passive = project_coupling(extract(out.lift.theta_hat_t), extract(out.lift.theta_hat_r),
                                       DegeneratePolicy::Split);
        const auto h = cascaded_channels(cs, out.passive, grouping);
        out.slack = slack_from(h, current.w, lb.noise_power);
        out.rates = rates_from_channels(h, current.w, lb.noise_power, lb.r_min);
        return out;
    }

    struct AlternateResult
    {
        HybridBeamforming beamforming;
        RateReport rates;
        bool converged = false;
        int iterations = 0;
        std::vector<double> merit_trace; // initial point, then one entry per iteration
        double min_rank_ratio = 1.0;     // over accepted passive solutions
    };

    // Alternates the two subproblems from `init` until the merit changes by less than the
    // tolerance. A candidate is kept only if it does not lower the merit, so the trace is
    // non-decreasing. If both subproblems fail in the first iteration SolverFailure is thrown;
    // any later failure ends the loop with the last accepted iterate.
    inline AlternateResult alternate(const ChannelSet &cs, std::span<const Side> grouping, const LinkBudget &lb,
                                     conic::ConvexBackend &backend, const HybridBeamforming &init,
                                     const BeamformSettings &st = {})
    {
        AlternateResult res;
        res.beamforming = init;
        res.rates = rates(cs, init.passive, grouping, init.w, lb.noise_power, lb.r_min);
        double best = merit(res.rates, st);
        res.merit_trace.push_back(best);

        // Enforced QoS falls back to the elastic form when a subproblem is infeasible
        BeamformSettings relaxed = st;
        relaxed.qos = QosMode::Elastic;
        auto attempt = [&](auto &&solve)
        {
            try
            {
                return solve(st);
            }
            catch (const SolverInfeasible &)
            {
                return solve(relaxed);
            }
        };

        for (int it = 1; it <= st.max_iterations; ++it)
        {
            res.iterations = it;
            int failures = 0;
            std::string reason;
            try
            {
                auto act = attempt([&](const BeamformSettings &s)
                                   { return solve_active(cs, grouping, res.beamforming, lb, backend, s); });
                if (const double m = merit(act.rates, st); m >= best)
                {
                    res.beamforming.w = std::move(act.active.w);
                    res.rates = act.rates;
                    best = m;
                }
            }
            catch (const Error &e)
            {
                ++failures;
                reason = e.what();
            }
            try
            {
                auto pas = attempt([&](const BeamformSettings &s)
                                   { return solve_passive(cs, grouping, res.beamforming, lb, backend, s); });
                if (const double m = merit(pas.rates, st); m >= best)
                {
                    res.beamforming.passive = std::move(pas.passive);
                    res.rates = pas.rates;
                    best = m;
                    res.min_rank_ratio = std::min({res.min_rank_ratio, pas.rank_ratio_t, pas.rank_ratio_r});
                }
            }
            catch (const Error &e)
            {
                ++failures;
                reason = e.what();
            }
            if (it == 1 && failures == 2)
                throw SolverFailure("alternate: both subproblems failed in the first iteration: " + reason);
            const double prev = res.merit_trace.back();
            res.merit_trace.push_back(best);
            if (failures > 0)
                break;
            if (std::abs(best - prev) < st.tolerance)
            {
                res.converged = true;
                break;
            }
        }
        return res;
    }

    inline AlternateResult alternate(const ChannelSet &cs, std::span<const Side> grouping, const LinkBudget &lb,
                                     conic::ConvexBackend &backend, Rng &rng, const BeamformSettings &st = {})
    {
        const auto init = init_hybrid(rng, static_cast<std::size_t>(cs.n_antennas()),
                                      static_cast<std::size_t>(cs.n_elements()), cs.n_users(), lb.p_max);
        return alternate(cs, grouping, lb, backend, init, st);
    }
}

#endif
