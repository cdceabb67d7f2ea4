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

#ifndef STARRIS_CONIC_HPP
#define STARRIS_CONIC_HPP

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

// Small dense semidefinite programs over Hermitian PSD blocks:
//
//   minimize   sum_b <C_b, X_b>
//   subject to sum_b <A_ib, X_b>  (=, <=, >=)  r_i,    X_b PSD,
//
// with <A, X> = Re Tr(A X). Solved by an infeasible-start primal-dual path-following method
// with a Mehrotra predictor-corrector. Two backends share the method:
//   ComplexHkmBackend       works on complex Hermitian blocks, HKM search direction
//   RealEmbeddingNtBackend  maps each n x n Hermitian block to a 2n x 2n real symmetric one,
//                           NT search direction

namespace starris::conic
{
    using CMatrix = Eigen::MatrixXcd;

    enum class Relation
    {
        Eq,
        Le,
        Ge
    };

    enum class Status
    {
        Optimal,
        Inaccurate,        // stopped with residuals below 1e-5 but above the tolerance
        PrimalInfeasible,
        DualInfeasible,
        Failure
    };

    inline const char *to_string(Status s)
    {
        switch (s)
        {
        case Status::Optimal: return "optimal";
        case Status::Inaccurate: return "inaccurate";
        case Status::PrimalInfeasible: return "primal infeasible";
        case Status::DualInfeasible: return "dual infeasible";
        default: return "failure";
        }
    }

    // coeff contributes Re Tr(coeff * X_block); only its Hermitian part matters
    struct Term
    {
        std::size_t block = 0;
        CMatrix coeff;
    };

    struct Constraint
    {
        std::vector<Term> terms;
        Relation relation = Relation::Eq;
        double rhs = 0.0;
    };

    class Problem
    {
    public:
        std::size_t add_block(Eigen::Index n)
        {
            if (n <= 0)
                throw BadDimensions("conic::Problem: block size must be positive");
            blocks_.push_back(n);
            return blocks_.size() - 1;
        }

        void add_objective(std::size_t block, CMatrix coeff)
        {
            check(block, coeff);
            objective_.push_back({block, std::move(coeff)});
        }

        void add_constraint(std::vector<Term> terms, Relation rel, double rhs)
        {
            for (const auto &t : terms)
                check(t.block, t.coeff);
            constraints_.push_back({std::move(terms), rel, rhs});
        }

        // Coefficient selecting entry (i, j) of an n x n block: Re X_ij for i == j, Re X_ij for i != j
        static CMatrix entry(Eigen::Index n, Eigen::Index i, Eigen::Index j, double scale = 1.0)
        {
            CMatrix a = CMatrix::Zero(n, n);
            if (i == j)
                a(i, i) = scale;
            else
            {
                a(j, i) = 0.5 * scale;
                a(i, j) = 0.5 * scale;
            }
            return a;
        }

        const std::vector<Eigen::Index> &blocks() const { return blocks_; }
        const std::vector<Term> &objective() const { return objective_; }
        const std::vector<Constraint> &constraints() const { return constraints_; }

    private:
        void check(std::size_t block, const CMatrix &c) const
        {
            if (block >= blocks_.size() || c.rows() != blocks_[block] || c.cols() != blocks_[block])
                throw BadDimensions("conic::Problem: coefficient does not match its block");
        }

        std::vector<Eigen::Index> blocks_;
        std::vector<Term> objective_;
        std::vector<Constraint> constraints_;
    };

    struct Solution
    {
        Status status = Status::Failure;
        std::vector<CMatrix> X;    // one per block of the problem
        double objective = 0.0;    // sum_b <C_b, X_b>
        int iterations = 0;
        double primal_residual = 0.0;
        double dual_residual = 0.0;
        double gap = 0.0;

        bool usable() const { return status == Status::Optimal || status == Status::Inaccurate; }
    };

    struct Settings
    {
        double tolerance = 1e-8;
        int max_iterations = 100;
    };

    class ConvexBackend
    {
    public:
        virtual ~ConvexBackend() = default;
        virtual std::string name() const = 0;
        virtual Solution solve(const Problem &p) = 0;
    };

    namespace detail
    {
        template <class S>
        using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

        inline double re(double x) { return x; }
        inline double re(std::complex<double> z) { return z.real(); }

        // Re Tr(A V) = Re sum_ij A_ij V_ji
        template <class S>
        double re_trace_product(const Mat<S> &A, const Mat<S> &V)
        {
            return re(A.cwiseProduct(V.transpose()).sum());
        }

        template <class S>
        Mat<S> herm(const Mat<S> &A)
        {
            return S(0.5) * (A + A.adjoint());
        }

        // Eigen-factorizes a Hermitian coefficient, keeping the factors when rank <= n/2
        template <class E>
        void factorize(E &e)
        {
            using S = typename decltype(e.a)::Scalar;
            const Eigen::Index n = e.a.rows();
            e.factored = false;
            if (n < 2)
                return;
            Eigen::SelfAdjointEigenSolver<Mat<S>> es(e.a);
            const auto &lam = es.eigenvalues();
            const double scale = lam.cwiseAbs().maxCoeff();
            std::vector<Eigen::Index> keep;
            for (Eigen::Index i = 0; i < n; ++i)
                if (std::abs(lam(i)) > 1e-13 * scale)
                    keep.push_back(i);
            if (scale == 0.0 || 2 * static_cast<Eigen::Index>(keep.size()) > n)
                return;
            const auto r = static_cast<Eigen::Index>(keep.size());
            e.U.resize(n, r);
            e.d.resize(r);
            for (Eigen::Index c = 0; c < r; ++c)
            {
                e.U.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
                e.d(c) = lam(keep[static_cast<std::size_t>(c)]);
            }
            e.factored = true;
        }

        template <class S>
        struct StandardForm
        {
            struct Entry
            {
                std::size_t block;
                Mat<S> a;
                // a = U diag(d) U^H when the rank is low enough to pay off
                bool factored = false;
                Mat<S> U;
                Eigen::VectorXd d;
            };
            std::vector<Eigen::Index> n;
            std::vector<Mat<S>> C;
            std::vector<std::vector<Entry>> A;
            Eigen::VectorXd b;
        };

        template <class S>
        struct IpmResult
        {
            Status status = Status::Failure;
            std::vector<Mat<S>> X;
            int iterations = 0;
            double pinf = 0.0, dinf = 0.0, gap = 0.0;
        };

        enum class Direction
        {
            Hkm,
            Nt
        };

        // Largest alpha with M + alpha dM PSD, +inf if unbounded. When `enough` > 0 a
        // successful Cholesky factorization of M + enough dM short-cuts the eigenvalue problem
        // and `enough` is returned (PSD-ness along the segment follows from convexity).
        template <class S>
        double max_step(const Mat<S> &M, const Mat<S> &dM, double enough = 0.0)
        {
            if (M.rows() == 1)
            {
                const double m = re(M(0, 0)), d = re(dM(0, 0));
                return d >= 0.0 ? std::numeric_limits<double>::infinity() : -m / d;
            }
            if (enough > 0.0)
            {
                Eigen::LLT<Mat<S>> probe(M + S(enough) * dM);
                if (probe.info() == Eigen::Success)
                    return enough;
            }
            Eigen::LLT<Mat<S>> llt(M);
            if (llt.info() != Eigen::Success)
                return 0.0;
            const Mat<S> Linv_dM = llt.matrixL().solve(dM);
            const Mat<S> T = herm<S>(llt.matrixL().solve(Linv_dM.adjoint()));
            double lmin;
            if (T.rows() == 2)
            {
                const double a = re(T(0, 0)), d = re(T(1, 1));
                lmin = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + std::norm(T(0, 1)));
            }
            else
            {
                Eigen::SelfAdjointEigenSolver<Mat<S>> es(T, Eigen::EigenvaluesOnly);
                lmin = es.eigenvalues()(0);
            }
            return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
        }

        template <class S>
        Mat<S> inverse_pd(const Mat<S> &M, bool &ok)
        {
            Eigen::LLT<Mat<S>> llt(M);
            ok = llt.info() == Eigen::Success;
            return llt.solve(Mat<S>::Identity(M.rows(), M.cols()));
        }

        template <class S>
        IpmResult<S> interior_point(StandardForm<S> P, Direction dir, const Settings &st)
        {
            using M_t = Mat<S>;
            const std::size_t nb = P.n.size();
            const std::size_t m = P.A.size();
            IpmResult<S> res;

            // Row and objective normalization
            for (std::size_t i = 0; i < m; ++i)
            {
                double nrm2 = 0.0;
                for (const auto &e : P.A[i])
                    nrm2 += e.a.squaredNorm();
                const double nrm = std::sqrt(nrm2);
                if (nrm > 0.0)
                {
                    for (auto &e : P.A[i])
                        e.a /= S(nrm);
                    P.b(static_cast<Eigen::Index>(i)) /= nrm;
                }
            }
            double c_norm = 0.0;
            for (const auto &c : P.C)
                c_norm += c.squaredNorm();
            c_norm = std::sqrt(c_norm);
            const double c_scale = std::max(1.0, c_norm);
            for (auto &c : P.C)
                c /= S(c_scale);
            c_norm /= c_scale;
            const double b_norm = P.b.norm();
            for (auto &row : P.A)
                for (auto &e : row)
                    factorize(e);

            std::vector<std::vector<std::pair<std::size_t, std::size_t>>> touching(nb); // (row, entry)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t e = 0; e < P.A[i].size(); ++e)
                    touching[P.A[i][e].block].push_back({i, e});

            auto A_op = [&](const std::vector<M_t> &V)
            {
                Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
                for (std::size_t i = 0; i < m; ++i)
                    for (const auto &e : P.A[i])
                        out(static_cast<Eigen::Index>(i)) += re_trace_product<S>(e.a, V[e.block]);
                return out;
            };
            auto A_adj = [&](const Eigen::VectorXd &y)
            {
                std::vector<M_t> out(nb);
                for (std::size_t k = 0; k < nb; ++k)
                    out[k] = M_t::Zero(P.n[k], P.n[k]);
                for (std::size_t i = 0; i < m; ++i)
                    for (const auto &e : P.A[i])
                        out[e.block] += S(y(static_cast<Eigen::Index>(i))) * e.a;
                return out;
            };
            auto inner = [&](const std::vector<M_t> &U, const std::vector<M_t> &V)
            {
                double s = 0.0;
                for (std::size_t k = 0; k < nb; ++k)
                    s += re_trace_product<S>(U[k], V[k]);
                return s;
            };

            // Starting point
            std::vector<M_t> X(nb), Z(nb);
            double n_total = 0.0;
            for (std::size_t k = 0; k < nb; ++k)
            {
                const double n = static_cast<double>(P.n[k]);
                n_total += n;
                double ratio = 0.0, a_max = 0.0;
                for (auto [i, e] : touching[k])
                {
                    const double an = P.A[i][e].a.norm();
                    a_max = std::max(a_max, an);
                    ratio = std::max(ratio, (1.0 + std::abs(P.b(static_cast<Eigen::Index>(i)))) / (1.0 + an));
                }
                const double xi = std::max({10.0, std::sqrt(n), n * ratio});
                const double eta = std::max({10.0, std::sqrt(n), P.C[k].norm(), a_max});
                X[k] = S(xi) * M_t::Identity(P.n[k], P.n[k]);
                Z[k] = S(eta) * M_t::Identity(P.n[k], P.n[k]);
            }
            Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));

            std::vector<M_t> Zinv(nb), W(nb);
            for (int it = 0; it <= st.max_iterations; ++it)
            {
                res.iterations = it;
                const Eigen::VectorXd rp = P.b - A_op(X);
                std::vector<M_t> Rd = A_adj(y);
                double rd_norm2 = 0.0;
                for (std::size_t k = 0; k < nb; ++k)
                {
                    Rd[k] = P.C[k] - Rd[k] - Z[k];
                    rd_norm2 += Rd[k].squaredNorm();
                }
                const double pobj = inner(P.C, X);
                const double dobj = P.b.dot(y);
                const double xz = inner(X, Z);
                const double mu = xz / n_total;
                res.pinf = rp.norm() / (1.0 + b_norm);
                res.dinf = std::sqrt(rd_norm2) / (1.0 + c_norm);
                res.gap = std::abs(xz) / (1.0 + std::abs(pobj) + std::abs(dobj));

                if (!std::isfinite(res.pinf) || !std::isfinite(res.dinf) || !std::isfinite(res.gap))
                {
                    res.status = Status::Failure;
                    return res;
                }
                if (res.pinf < st.tolerance && res.dinf < st.tolerance && res.gap < st.tolerance)
                {
                    res.status = Status::Optimal;
                    break;
                }
                // Certificates: diverging y with A^T y + Z -> 0 relative, or X with A(X) -> 0 relative
                if (dobj > 1e8)
                {
                    double r = 0.0;
                    for (std::size_t k = 0; k < nb; ++k)
                        r += (P.C[k] - Rd[k]).squaredNorm();
                    if (std::sqrt(r) / dobj < 1e-8)
                    {
                        res.status = Status::PrimalInfeasible;
                        return res;
                    }
                }
                if (pobj < -1e8)
                {
                    if ((P.b - rp).norm() / (-pobj) < 1e-8)
                    {
                        res.status = Status::DualInfeasible;
                        return res;
                    }
                }
                if (it == st.max_iterations)
                    break;

                // Scaling matrices
                bool ok = true;
                for (std::size_t k = 0; k < nb && ok; ++k)
                {
                    if (dir == Direction::Hkm)
                        Zinv[k] = inverse_pd<S>(Z[k], ok);
                    else
                    {
                        Eigen::LLT<M_t> llt(Z[k]);
                        if (llt.info() != Eigen::Success)
                        {
                            ok = false;
                            break;
                        }
                        const M_t L = llt.matrixL();
                        Zinv[k] = llt.solve(M_t::Identity(P.n[k], P.n[k]));
                        Eigen::SelfAdjointEigenSolver<M_t> es(herm<S>(M_t(L.adjoint() * X[k] * L)));
                        Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
                        const M_t U = es.eigenvectors();
                        const M_t mid = U * lam.template cast<S>().asDiagonal() * U.adjoint();
                        const M_t Linv = L.template triangularView<Eigen::Lower>().solve(M_t::Identity(P.n[k], P.n[k]));
                        W[k] = herm<S>(M_t(Linv.adjoint() * mid * Linv));
                    }
                }
                if (!ok)
                {
                    res.status = Status::Failure;
                    return res;
                }

                // Schur complement, M_ij = <A_i, S1 A_j S2> with (S1, S2) = (X, Z^-1) or (W, W)
                Eigen::MatrixXd Msc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
                for (std::size_t k = 0; k < nb; ++k)
                {
                    const auto &tk = touching[k];
                    const M_t &S1 = dir == Direction::Hkm ? X[k] : W[k];
                    const M_t &S2 = dir == Direction::Hkm ? Zinv[k] : W[k];
                    std::vector<M_t> Pf(tk.size()), Qf(tk.size()), G(tk.size());
                    for (std::size_t q = 0; q < tk.size(); ++q)
                    {
                        const auto &e = P.A[tk[q].first][tk[q].second];
                        if (e.factored)
                        {
                            Pf[q] = S1 * e.U;
                            Qf[q] = S2 * e.U;
                        }
                        else
                            G[q] = S1 * e.a * S2;
                    }
                    for (std::size_t q = 0; q < tk.size(); ++q)
                    {
                        const auto &eq = P.A[tk[q].first][tk[q].second];
                        for (std::size_t p = 0; p <= q; ++p)
                        {
                            const auto &ep = P.A[tk[p].first][tk[p].second];
                            double v = 0.0;
                            if (eq.factored && ep.factored)
                            {
                                // Tr(D_p (U_p^H P_q) D_q (Q_q^H U_p))
                                const M_t L = ep.U.adjoint() * Pf[q];
                                const M_t R = Qf[q].adjoint() * ep.U;
                                for (Eigen::Index a = 0; a < L.rows(); ++a)
                                    for (Eigen::Index b = 0; b < L.cols(); ++b)
                                        v += ep.d(a) * eq.d(b) * re(L(a, b) * R(b, a));
                            }
                            else if (eq.factored)
                            {
                                const M_t AP = ep.a * Pf[q];
                                for (Eigen::Index b = 0; b < AP.cols(); ++b)
                                    v += eq.d(b) * re(Qf[q].col(b).dot(AP.col(b)));
                            }
                            else if (ep.factored)
                            {
                                const M_t GU = G[q] * ep.U;
                                for (Eigen::Index a = 0; a < GU.cols(); ++a)
                                    v += ep.d(a) * re(ep.U.col(a).dot(GU.col(a)));
                            }
                            else
                                v = re_trace_product<S>(ep.a, G[q]);
                            // rows are merged per block, so the two indices differ unless p == q
                            const auto i = static_cast<Eigen::Index>(tk[p].first);
                            const auto j = static_cast<Eigen::Index>(tk[q].first);
                            Msc(i, j) += v;
                            if (p != q)
                                Msc(j, i) += v;
                        }
                    }
                }
                Eigen::LDLT<Eigen::MatrixXd> fac(Msc);
                if (fac.info() != Eigen::Success || !(fac.isPositive()))
                {
                    const double reg = 1e-12 * std::max(1.0, Msc.diagonal().cwiseAbs().maxCoeff());
                    Msc.diagonal().array() += reg;
                    fac.compute(Msc);
                    if (fac.info() != Eigen::Success)
                    {
                        res.status = Status::Failure;
                        return res;
                    }
                }

                std::vector<M_t> SRdS(nb);
                for (std::size_t k = 0; k < nb; ++k)
                    SRdS[k] = dir == Direction::Hkm ? M_t(X[k] * Rd[k] * Zinv[k]) : M_t(W[k] * Rd[k] * W[k]);

                // One Newton direction for centring sigma and optional second-order correction
                auto direction = [&](double sigma, const std::vector<M_t> *corr,
                                     std::vector<M_t> &dX, Eigen::VectorXd &dy, std::vector<M_t> &dZ)
                {
                    std::vector<M_t> V(nb);
                    for (std::size_t k = 0; k < nb; ++k)
                    {
                        V[k] = S(sigma * mu) * Zinv[k] - X[k] - SRdS[k];
                        if (corr)
                            V[k] -= (*corr)[k];
                    }
                    dy = fac.solve(Eigen::VectorXd(rp - A_op(V)));
                    const auto Ady = A_adj(dy);
                    dX.resize(nb);
                    dZ.resize(nb);
                    for (std::size_t k = 0; k < nb; ++k)
                    {
                        dZ[k] = Rd[k] - Ady[k];
                        dX[k] = dir == Direction::Hkm ? herm<S>(M_t(V[k] + X[k] * Ady[k] * Zinv[k]))
                                                      : herm<S>(M_t(V[k] + W[k] * Ady[k] * W[k]));
                    }
                };
                auto steps = [&](const std::vector<M_t> &dX, const std::vector<M_t> &dZ, double gamma)
                {
                    double ap = std::numeric_limits<double>::infinity(), ad = ap;
                    // a step of 1 / gamma or more is clipped to 1 anyway
                    const double enough = 1.0 / gamma;
                    for (std::size_t k = 0; k < nb; ++k)
                    {
                        ap = std::min(ap, max_step<S>(X[k], dX[k], enough));
                        ad = std::min(ad, max_step<S>(Z[k], dZ[k], enough));
                    }
                    return std::pair{std::min(1.0, gamma * ap), std::min(1.0, gamma * ad)};
                };

                std::vector<M_t> dX, dZ;
                Eigen::VectorXd dy;
                direction(0.0, nullptr, dX, dy, dZ);
                auto [ap, ad] = steps(dX, dZ, 1.0);
                double xz_aff = 0.0;
                for (std::size_t k = 0; k < nb; ++k)
                    xz_aff += re_trace_product<S>(M_t(X[k] + S(ap) * dX[k]), M_t(Z[k] + S(ad) * dZ[k]));
                const double sigma = std::clamp(std::pow(std::max(xz_aff, 0.0) / xz, 3.0), 0.0, 1.0);
                const double gamma = 0.9 + 0.09 * std::min(ap, ad);

                std::vector<M_t> corr(nb);
                for (std::size_t k = 0; k < nb; ++k)
                    corr[k] = dir == Direction::Hkm ? M_t(dX[k] * dZ[k] * Zinv[k]) : M_t::Zero(P.n[k], P.n[k]);
                direction(sigma, dir == Direction::Hkm ? &corr : nullptr, dX, dy, dZ);
                std::tie(ap, ad) = steps(dX, dZ, gamma);

                for (std::size_t k = 0; k < nb; ++k)
                {
                    X[k] = herm<S>(M_t(X[k] + S(ap) * dX[k]));
                    Z[k] = herm<S>(M_t(Z[k] + S(ad) * dZ[k]));
                }
                y += ad * dy;
            }

            if (res.status != Status::Optimal)
                res.status = (res.pinf < 1e-5 && res.dinf < 1e-5 && res.gap < 1e-5) ? Status::Inaccurate
                                                                                      : Status::Failure;
            res.X = std::move(X);
            return res;
        }

        // Slack variables of inequality rows become extra 1 x 1 blocks after the problem blocks
        template <class S, class Lift>
        StandardForm<S> lower(const Problem &p, Eigen::Index scale_n, Lift lift)
        {
            StandardForm<S> sf;
            for (auto n : p.blocks())
                sf.n.push_back(scale_n * n);
            std::size_t n_slack = 0;
            for (const auto &c : p.constraints())
                if (c.relation != Relation::Eq)
                    ++n_slack;
            for (std::size_t i = 0; i < n_slack; ++i)
                sf.n.push_back(1);
            for (auto n : sf.n)
                sf.C.push_back(Mat<S>::Zero(n, n));
            for (const auto &t : p.objective())
                sf.C[t.block] += lift(CMatrix(0.5 * (t.coeff + t.coeff.adjoint())));
            sf.b.resize(static_cast<Eigen::Index>(p.constraints().size()));
            std::size_t slack = p.blocks().size();
            for (std::size_t i = 0; i < p.constraints().size(); ++i)
            {
                const auto &c = p.constraints()[i];
                std::vector<typename StandardForm<S>::Entry> row;
                for (const auto &t : c.terms)
                {
                    Mat<S> a = lift(CMatrix(0.5 * (t.coeff + t.coeff.adjoint())));
                    bool merged = false;
                    for (auto &e : row)
                        if (e.block == t.block)
                        {
                            e.a += a;
                            merged = true;
                        }
                    if (!merged)
                        row.push_back({t.block, std::move(a), false, {}, {}});
                }
                if (c.relation != Relation::Eq)
                {
                    Mat<S> s(1, 1);
                    s(0, 0) = S(c.relation == Relation::Le ? 1.0 : -1.0);
                    row.push_back({slack++, s, false, {}, {}});
                }
                sf.A.push_back(std::move(row));
                sf.b(static_cast<Eigen::Index>(i)) = c.rhs;
            }
            return sf;
        }

        inline double objective_value(const Problem &p, const std::vector<CMatrix> &X)
        {
            double v = 0.0;
            for (const auto &t : p.objective())
                v += re_trace_product<std::complex<double>>(CMatrix(0.5 * (t.coeff + t.coeff.adjoint())), X[t.block]);
            return v;
        }

        template <class S>
        Solution finish(const Problem &p, const IpmResult<S> &r, std::vector<CMatrix> X)
        {
            Solution s;
            s.status = r.status;
            s.iterations = r.iterations;
            s.primal_residual = r.pinf;
            s.dual_residual = r.dinf;
            s.gap = r.gap;
            s.X = std::move(X);
            if (!s.X.empty())
                s.objective = objective_value(p, s.X);
            return s;
        }
    }

    class ComplexHkmBackend : public ConvexBackend
    {
    public:
        explicit ComplexHkmBackend(Settings s = {}) : settings_(s) {}
        std::string name() const override { return "complex-hkm"; }

        Solution solve(const Problem &p) override
        {
            using S = std::complex<double>;
            auto sf = detail::lower<S>(p, 1, [](const CMatrix &a) { return a; });
            auto r = detail::interior_point<S>(std::move(sf), detail::Direction::Hkm, settings_);
            std::vector<CMatrix> X;
            if (!r.X.empty())
                X.assign(r.X.begin(), r.X.begin() + static_cast<std::ptrdiff_t>(p.blocks().size()));
            return detail::finish(p, r, std::move(X));
        }

    private:
        Settings settings_;
    };

    class RealEmbeddingNtBackend : public ConvexBackend
    {
    public:
        explicit RealEmbeddingNtBackend(Settings s = {}) : settings_(s) {}
        std::string name() const override { return "real-embedding-nt"; }

        // [[Re A, -Im A], [Im A, Re A]]
        static Eigen::MatrixXd embed(const CMatrix &a)
        {
            const Eigen::Index n = a.rows();
            Eigen::MatrixXd e(2 * n, 2 * n);
            e.topLeftCorner(n, n) = a.real();
            e.topRightCorner(n, n) = -a.imag();
            e.bottomLeftCorner(n, n) = a.imag();
            e.bottomRightCorner(n, n) = a.real();
            return e;
        }

        Solution solve(const Problem &p) override
        {
            auto sf = detail::lower<double>(p, 2, [](const CMatrix &a) { return Eigen::MatrixXd(0.5 * embed(a)); });
            auto r = detail::interior_point<double>(std::move(sf), detail::Direction::Nt, settings_);
            std::vector<CMatrix> X;
            if (!r.X.empty())
                for (std::size_t k = 0; k < p.blocks().size(); ++k)
                {
                    const Eigen::Index n = p.blocks()[k];
                    const Eigen::MatrixXd &Y = r.X[k];
                    CMatrix x(n, n);
                    x.real() = 0.5 * (Y.topLeftCorner(n, n) + Y.bottomRightCorner(n, n));
                    x.imag() = 0.5 * (Y.bottomLeftCorner(n, n) - Y.topRightCorner(n, n));
                    X.push_back(x);
                }
            return detail::finish(p, r, std::move(X));
        }

    private:
        Settings settings_;
    };

    enum class BackendKind
    {
        ComplexHkm,
        RealEmbeddingNt
    };

    // Backends keep no state between solves, but each in-flight solve still gets its own instance
    inline std::unique_ptr<ConvexBackend> make_backend(BackendKind kind, Settings s = {})
    {
        if (kind == BackendKind::RealEmbeddingNt)
            return std::make_unique<RealEmbeddingNtBackend>(s);
        return std::make_unique<ComplexHkmBackend>(s);
    }
}

#endif
