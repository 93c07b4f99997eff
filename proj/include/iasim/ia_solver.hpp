// SPDX-License-Identifier: Apache-2.0
//
// iasim - interference alignment link-level simulator and analytic SINR toolkit
// Copyright (C) 2026 The iasim authors
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

#ifndef IASIM_IA_SOLVER_HPP
#define IASIM_IA_SOLVER_HPP

#include "iasim/channel_model.hpp"
#include "iasim/linalg.hpp"
#include "iasim/rng.hpp"

#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace iasim
{

struct FeasibilityReport
{
    bool feasible = false;
    std::string reason;
};

// Properness count for the K-user MIMO interference channel with d_i streams.
//
// Each user contributes d_i (Nt - d_i) + d_i (Nr - d_i) free variables, each
// ordered cross link (i, k) imposes d_i d_k alignment equations. The system is
// proper when no subset of users has more equations than variables. For
// symmetric d this reduces to Nt + Nr >= (K + 1) d.
inline FeasibilityReport check_feasibility(int K, int Nt, int Nr, std::span<const int> d)
{
    std::ostringstream why;
    if (K < 2 || Nt < 1 || Nr < 1 || static_cast<int>(d.size()) != K)
    {
        why << "invalid counts: K=" << K << ", Nt=" << Nt << ", Nr=" << Nr << ", |d|=" << d.size();
        return {false, why.str()};
    }
    for (int i = 0; i < K; ++i)
        if (d[i] < 1 || d[i] > std::min(Nt, Nr))
        {
            why << "user " << i << " requests d=" << d[i] << " streams, outside [1, min(Nt, Nr)]";
            return {false, why.str()};
        }
    if (K > 20)
        throw std::invalid_argument("check_feasibility: K > 20 not supported by the subset enumeration");

    for (unsigned mask = 1; mask < (1u << K); ++mask)
    {
        long long vars = 0, eqs = 0;
        for (int i = 0; i < K; ++i)
        {
            if (!(mask & (1u << i)))
                continue;
            vars += static_cast<long long>(d[i]) * (Nt - d[i]) + static_cast<long long>(d[i]) * (Nr - d[i]);
            for (int k = 0; k < K; ++k)
                if (k != i && (mask & (1u << k)))
                    eqs += static_cast<long long>(d[i]) * d[k];
        }
        if (eqs > vars)
        {
            why << "improper: a subset of " << __builtin_popcount(mask) << " users has " << eqs
                << " alignment equations but only " << vars << " variables";
            return {false, why.str()};
        }
    }
    why << "proper: variables cover alignment equations for every user subset";
    return {true, why.str()};
}

struct IaSolution
{
    std::vector<ComplexMatrix> F; // Nt x d_i, orthonormal columns
    std::vector<ComplexMatrix> C; // Nr x (Nr - d_i), orthonormal interference basis
    double leakage = 0.0;
    int iterations = 0;
    std::vector<double> leakage_history; // filled when SolverOptions::record_history

    bool converged(double tol) const { return leakage < tol; }
};

struct SolverOptions
{
    double tol = 1e-8;
    int max_iter = 5000;
    bool record_history = false;
    // Reject improper scenarios up front. Disable only to study improper systems.
    bool enforce_feasibility = true;
    // Called after every full (F, C) sweep.
    std::function<void(const IaSolution &)> on_iteration;
};

// Sum over receivers i and interferers k != i of ||(I - C_i C_i^H) H_ik F_k||_F^2.
inline double interference_leakage(const IaSolution &sol, const ChannelArray &H)
{
    const int K = H.users();
    if (static_cast<int>(sol.F.size()) != K || static_cast<int>(sol.C.size()) != K)
        throw std::invalid_argument("interference_leakage: solution and channel user counts differ");
    double total = 0.0;
    for (int i = 0; i < K; ++i)
    {
        const ComplexMatrix P = linalg::complement_projector(sol.C[i]);
        for (int k = 0; k < K; ++k)
        {
            if (k == i)
                continue;
            if (H(i, k).rows() != P.rows() || H(i, k).cols() != sol.F[k].rows())
                throw std::invalid_argument("interference_leakage: shape mismatch on link (" + std::to_string(i) +
                                            "," + std::to_string(k) + ")");
            total += (P * H(i, k) * sol.F[k]).squaredNorm();
        }
    }
    return total;
}

// Alternating minimization of the interference leakage.
//
// (a) F_i <- d_i least dominant eigenvectors of sum_{k!=i} H_ki^H (I - C_k C_k^H) H_ki
// (b) C_i <- Nr - d_i dominant eigenvectors of sum_{k!=i} H_ik F_k F_k^H H_ik^H
//
// C is initialized Haar-random from `rng`. Direct links H_ii are never read.
// Each step solves its subproblem exactly, so the leakage is non-increasing.
inline IaSolution alternating_min(const ChannelArray &H, std::span<const int> d, const SolverOptions &opt, Rng &rng)
{
    const int K = H.users();
    if (K < 2)
        throw std::invalid_argument("alternating_min: need at least two users");
    if (!(opt.tol > 0.0) || opt.max_iter < 1)
        throw std::invalid_argument("alternating_min: tol must be > 0 and max_iter >= 1");
    const int Nr = static_cast<int>(H(0, 1).rows());
    const int Nt = static_cast<int>(H(0, 1).cols());
    if (static_cast<int>(d.size()) != K)
        throw std::invalid_argument("alternating_min: d must list one stream count per user");
    if (opt.enforce_feasibility)
    {
        const auto report = check_feasibility(K, Nt, Nr, d);
        if (!report.feasible)
            throw std::invalid_argument("alternating_min: infeasible scenario: " + report.reason);
    }
    for (int i = 0; i < K; ++i)
        if (d[i] < 1 || d[i] > std::min(Nt, Nr))
            throw std::invalid_argument("alternating_min: stream count out of range");

    IaSolution sol;
    sol.F.resize(K);
    sol.C.resize(K);
    for (int i = 0; i < K; ++i)
        sol.C[i] = rng.haar_frame(Nr, Nr - d[i]);

    std::vector<ComplexMatrix> proj(K);
    for (int it = 1; it <= opt.max_iter; ++it)
    {
        for (int k = 0; k < K; ++k)
            proj[k] = linalg::complement_projector(sol.C[k]);

        for (int i = 0; i < K; ++i)
        {
            ComplexMatrix Q = ComplexMatrix::Zero(Nt, Nt);
            for (int k = 0; k < K; ++k)
                if (k != i)
                    Q.noalias() += H(k, i).adjoint() * proj[k] * H(k, i);
            const auto eig = linalg::eigh(Q);
            sol.F[i] = eig.vectors.leftCols(d[i]);
        }

        double leak = 0.0;
        for (int i = 0; i < K; ++i)
        {
            ComplexMatrix S = ComplexMatrix::Zero(Nr, Nr);
            for (int k = 0; k < K; ++k)
                if (k != i)
                {
                    const ComplexMatrix G = H(i, k) * sol.F[k];
                    S.noalias() += G * G.adjoint();
                }
            const auto eig = linalg::eigh(S);
            sol.C[i] = eig.vectors.rightCols(Nr - d[i]);
            leak += std::max(0.0, eig.values.head(d[i]).sum());
        }

        sol.leakage = leak;
        sol.iterations = it;
        if (opt.record_history)
            sol.leakage_history.push_back(leak);
        if (opt.on_iteration)
            opt.on_iteration(sol);
        if (leak < opt.tol)
            break;
    }
    return sol;
}

inline IaSolution alternating_min(const ChannelSet &ch, std::span<const int> d, const SolverOptions &opt, Rng &rng)
{
    return alternating_min(ch.obsH, d, opt, rng);
}

struct IaVerification
{
    bool aligned = true;   // every cross-link residual below tol
    bool full_rank = true; // every projected direct channel has rank d_i
    double max_alignment_residual = 0.0;
    double min_rank_margin = 0.0; // smallest singular value over users
    std::vector<double> rank_margin;

    bool ok() const { return aligned && full_rank; }
};

// Checks both IA conditions with W_i the projector onto span(C_i)^perp.
inline IaVerification verify_ia(const IaSolution &sol, const ChannelArray &H, double tol)
{
    const int K = H.users();
    IaVerification rep;
    rep.rank_margin.resize(K);
    rep.min_rank_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i)
    {
        const ComplexMatrix P = linalg::complement_projector(sol.C[i]);
        for (int k = 0; k < K; ++k)
        {
            if (k == i)
                continue;
            const double r = (P * H(i, k) * sol.F[k]).squaredNorm();
            rep.max_alignment_residual = std::max(rep.max_alignment_residual, r);
            if (!(r < tol))
                rep.aligned = false;
        }
        const ComplexMatrix direct = P * H(i, i) * sol.F[i];
        Eigen::JacobiSVD<ComplexMatrix> svd(direct);
        const auto &sv = svd.singularValues();
        const double margin = sv.size() ? sv(sv.size() - 1) : 0.0;
        rep.rank_margin[i] = margin;
        rep.min_rank_margin = std::min(rep.min_rank_margin, margin);
        if (!(margin > std::sqrt(tol)))
            rep.full_rank = false;
    }
    return rep;
}

} // namespace iasim

#endif
