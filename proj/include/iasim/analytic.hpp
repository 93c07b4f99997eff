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

#ifndef IASIM_ANALYTIC_HPP
#define IASIM_ANALYTIC_HPP

#include "iasim/channel_model.hpp"
#include "iasim/linalg.hpp"
#include "iasim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace iasim
{

// Exponential SINR law with the given mean (linear scale).
class ExpDist
{
public:
    explicit ExpDist(double mean) : mean_(mean)
    {
        if (!(mean > 0.0) || !std::isfinite(mean))
            throw std::invalid_argument("ExpDist: mean must be positive and finite");
    }

    double mean() const { return mean_; }
    double rate() const { return 1.0 / mean_; }
    double pdf(double x) const { return x < 0.0 ? 0.0 : std::exp(-x / mean_) / mean_; }
    double cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-x / mean_); }
    double quantile(double p) const { return -mean_ * std::log1p(-p); }

private:
    double mean_;
};

// Perfect CSI, uncorrelated channels: mean gamma_o / d.
inline ExpDist pdf_perfect(double gammaO, int d)
{
    if (!(gammaO > 0.0) || d < 1)
        throw std::invalid_argument("pdf_perfect: need gammaO > 0 and d >= 1");
    return ExpDist(gammaO / d);
}

// ---------------------------------------------------------------------------
// Bounds on sigma^2 = [Rtilde^{-1}]_{n,n}
// ---------------------------------------------------------------------------

struct Sigma2Bounds
{
    std::optional<double> lower; // empty when the d > 1 formula leaves its validity domain
    double upper = 0.0;

    bool contains(double s, double rel_tol = 1e-12) const
    {
        const double slack = rel_tol * std::max(1.0, std::abs(s));
        return (!lower || s >= *lower - slack) && s <= upper + slack;
    }
};

// Eigenvalues ascending l1 <= ... <= lN.
//   d = 1:  1/lN <= sigma^2 <= 1/l1
//   d > 1:  1/l1 + (l1 - lN)^2 / (l1 (l1 lN - d ||R||_2^2)) <= sigma^2
//           sigma^2 <= (l1/lN + lN/l1 + 2) / (4 l1)
inline Sigma2Bounds sigma2_bounds(const CorrelationMatrix &Rt, int d)
{
    if (d < 1 || d > Rt.size())
        throw std::invalid_argument("sigma2_bounds: d must lie in [1, N]");
    const auto &ev = Rt.eigenvalues();
    const double l1 = ev(0), lN = ev(ev.size() - 1);
    if (!(l1 > 1e-12 * lN))
        throw std::invalid_argument("sigma2_bounds: correlation matrix is rank deficient");
    Sigma2Bounds b;
    if (d == 1)
    {
        b.lower = 1.0 / lN;
        b.upper = 1.0 / l1;
        return b;
    }
    b.upper = (l1 / lN + lN / l1 + 2.0) / (4.0 * l1);
    const double denom = l1 * (l1 * lN - d * lN * lN);
    if (denom != 0.0)
    {
        const double lo = 1.0 / l1 + (l1 - lN) * (l1 - lN) / denom;
        if (lo > 0.0 && lo <= b.upper * (1.0 + 1e-12))
            b.lower = lo;
    }
    else if (l1 == lN)
    {
        b.lower = 1.0 / l1; // numerator vanishes too
    }
    return b;
}

// ---------------------------------------------------------------------------
// Asymptotic eigenvector moments of a complex Wishart matrix
// ---------------------------------------------------------------------------

// For W ~ CW_N(D, R) with distinct eigenvalues l_1 > ... > l_N of R and
// eigenvectors u_p, the sample eigenvectors satisfy (D -> infinity)
//   E{u~_p} = u_p
//   cov(u~_pq, u~_p'q') = (l_p / D) sum_{r != p} l_r u_rq u*_rq' / (l_r - l_p)^2      p = p'
//                       = -l_p l_p' u_pq u*_p'q' / (D (l_p - l_p')^2)                p != p'
// Indices here are 0-based in descending eigenvalue order. Eigenvectors are
// phase-normalized so the largest-magnitude component is real positive.
class WishartEigvecMoments
{
public:
    static constexpr double min_gap = 1e-6;

    WishartEigvecMoments(const ComplexMatrix &R, double D) : D_(D)
    {
        if (!(D > 0.0))
            throw std::invalid_argument("wishart_eigvec_moments: degrees of freedom must be positive");
        const auto eig = linalg::eigh(R);
        const auto N = eig.values.size();
        values_.resize(N);
        vectors_.resize(N, N);
        for (Eigen::Index p = 0; p < N; ++p)
        {
            values_(p) = eig.values(N - 1 - p);
            vectors_.col(p) = eig.vectors.col(N - 1 - p);
            linalg::fix_phase_largest(vectors_.col(p));
        }
        for (Eigen::Index p = 0; p + 1 < N; ++p)
            if (values_(p) - values_(p + 1) < min_gap)
                throw std::invalid_argument("wishart_eigvec_moments: eigenvalue gap below 1e-6");
    }

    int size() const { return static_cast<int>(values_.size()); }
    double dof() const { return D_; }
    const RealVector &eigenvalues() const { return values_; }
    const ComplexMatrix &eigenvectors() const { return vectors_; }
    ComplexVector mean(int p) const { return vectors_.col(p); }

    // Matrix M with M(q, q') = cov(u~_pq, u~_p'q').
    ComplexMatrix cov(int p, int p2) const
    {
        const int N = size();
        if (p == p2)
        {
            ComplexMatrix M = ComplexMatrix::Zero(N, N);
            for (int r = 0; r < N; ++r)
            {
                if (r == p)
                    continue;
                const double gap = values_(r) - values_(p);
                M.noalias() += (values_(r) / (gap * gap)) * vectors_.col(r) * vectors_.col(r).adjoint();
            }
            return (values_(p) / D_) * M;
        }
        const double gap = values_(p) - values_(p2);
        return (-values_(p) * values_(p2) / (D_ * gap * gap)) * vectors_.col(p) * vectors_.col(p2).adjoint();
    }

    // E{u~_p u~_p'^H} = cov + mean mean^H
    ComplexMatrix second_moment(int p, int p2) const
    {
        return cov(p, p2) + vectors_.col(p) * vectors_.col(p2).adjoint();
    }

private:
    double D_;
    RealVector values_;
    ComplexMatrix vectors_;
};

inline WishartEigvecMoments wishart_eigvec_moments(const CorrelationMatrix &Rt, double D)
{
    return WishartEigvecMoments(Rt.matrix(), D);
}

// ---------------------------------------------------------------------------
// Rtilde_i = E{F_i^H R F_i} under the Wishart-eigenvector approximation
// ---------------------------------------------------------------------------

struct RtildeApprox
{
    ComplexMatrix matrix;             // d_i x d_i, Hermitian PSD
    RealVector sigma2;                // diag(matrix^{-1})
    std::vector<Sigma2Bounds> bounds; // per stream
    double dof = 0.0;                 // Wishart degrees of freedom used
    bool exact = false;               // R = I short-circuit
};

// The precoder-defining matrix of user i is treated as a complex Wishart
// matrix with D = sum_{k != i} d_k degrees of freedom and covariance R. Column
// n of F_i is the eigenvector of the n-th smallest eigenvalue. Each entry
//   Rtilde(n, m) = tr(E{F(:,m) F(:,n)^H} R)
// is rescaled by 1 / sqrt(t_n t_m), t_m = tr E{F(:,m) F(:,m)^H}, which
// restores unit expected column norms.
inline RtildeApprox approx_Rtilde(const CorrelationMatrix &Rt, int K, std::span<const int> d, int i)
{
    if (K < 2 || static_cast<int>(d.size()) != K || i < 0 || i >= K)
        throw std::invalid_argument("approx_Rtilde: inconsistent user/stream description");
    const int di = d[i];
    const int N = Rt.size();
    if (di < 1 || di > N)
        throw std::invalid_argument("approx_Rtilde: d_i must lie in [1, Nt]");
    RtildeApprox out;
    for (int k = 0; k < K; ++k)
        if (k != i)
            out.dof += d[k];
    out.bounds.assign(di, sigma2_bounds(Rt, di));
    if (Rt.is_identity())
    {
        out.matrix = ComplexMatrix::Identity(di, di);
        out.sigma2 = RealVector::Ones(di);
        out.exact = true;
        return out;
    }

    const WishartEigvecMoments mom(Rt.matrix(), out.dof);
    auto column_index = [N](int n) { return N - 1 - n; };
    const ComplexMatrix &R = Rt.matrix();

    RealVector scale(di);
    for (int m = 0; m < di; ++m)
        scale(m) = mom.second_moment(column_index(m), column_index(m)).trace().real();

    out.matrix.resize(di, di);
    for (int n = 0; n < di; ++n)
        for (int m = 0; m < di; ++m)
        {
            const ComplexMatrix M = mom.second_moment(column_index(m), column_index(n));
            out.matrix(n, m) = (M * R).trace() / std::sqrt(scale(n) * scale(m));
        }
    out.matrix = 0.5 * (out.matrix + out.matrix.adjoint().eval());
    const ComplexMatrix inv = out.matrix.inverse();
    out.sigma2 = inv.diagonal().real();
    return out;
}

// Two-moment Wishart approximation of a sum of independent Wisharts
// T = sum_i W_i, W_i ~ CW(d_i, R_i):
//   dbar = [tr(S^2) + tr^2(S)] / sum_i d_i (tr(R_i^2) + tr^2(R_i)),  S = sum_i d_i R_i
//   Rbar = S / dbar
inline std::pair<double, ComplexMatrix> wishart_sum_approx(std::span<const std::pair<double, ComplexMatrix>> parts)
{
    if (parts.empty())
        throw std::invalid_argument("wishart_sum_approx: empty list");
    const auto N = parts.front().second.rows();
    ComplexMatrix S = ComplexMatrix::Zero(N, N);
    double den = 0.0;
    for (const auto &[di, Ri] : parts)
    {
        if (Ri.rows() != N || Ri.cols() != N)
            throw std::invalid_argument("wishart_sum_approx: all covariance matrices must share one size");
        if (!(di > 0.0))
            throw std::invalid_argument("wishart_sum_approx: degrees of freedom must be positive");
        S += di * Ri;
        const double tr = Ri.trace().real();
        den += di * ((Ri * Ri).trace().real() + tr * tr);
    }
    const double trS = S.trace().real();
    const double dbar = ((S * S).trace().real() + trS * trS) / den;
    return {dbar, S / dbar};
}

// I = sum_i tr(Rtilde_i) / d_i; exactly K when R = I.
inline double calI(const CorrelationMatrix &Rt, int K, std::span<const int> d, std::span<const RtildeApprox> per_user)
{
    if (static_cast<int>(d.size()) != K)
        throw std::invalid_argument("calI: d must have K entries");
    if (Rt.is_identity())
        return static_cast<double>(K);
    if (static_cast<int>(per_user.size()) != K)
        throw std::invalid_argument("calI: need one Rtilde per user");
    double total = 0.0;
    for (int i = 0; i < K; ++i)
        total += per_user[i].matrix.trace().real() / d[i];
    return total;
}

inline std::vector<RtildeApprox> approx_Rtilde_all(const CorrelationMatrix &Rt, int K, std::span<const int> d)
{
    std::vector<RtildeApprox> out;
    out.reserve(K);
    for (int i = 0; i < K; ++i)
        out.push_back(approx_Rtilde(Rt, K, d, i));
    return out;
}

// Imperfect CSI with correlation: mean (1 - beta^2) / (sigma^2 d (beta^2 I + 1/gamma_o)).
inline ExpDist pdf_ci(double gammaO, int d, double beta, double sigma2, double calI_value)
{
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("pdf_ci: beta must lie in [0, 1)");
    if (!(gammaO > 0.0) || d < 1 || !(sigma2 > 0.0))
        throw std::invalid_argument("pdf_ci: need gammaO > 0, d >= 1, sigma2 > 0");
    return ExpDist((1.0 - beta * beta) / (sigma2 * d * (beta * beta * calI_value + 1.0 / gammaO)));
}

// High-SNR cap of the pdf_ci mean.
inline double mean_ci_limit(int d, double beta, double sigma2, double calI_value)
{
    return (1.0 - beta * beta) / (sigma2 * d * beta * beta * calI_value);
}

// Point-to-point spatial multiplexing, N streams, ZF receiver:
//   omega_n = (1 - beta^2) / ([R^{-1}]_{n,n} (beta^2 tr(R) + N / gamma_o))
inline std::vector<ExpDist> pdf_sm(double gammaO, int N, double beta, const CorrelationMatrix &Rt)
{
    if (Rt.size() != N)
        throw std::invalid_argument("pdf_sm: correlation size must equal N");
    if (!(beta >= 0.0 && beta < 1.0) || !(gammaO > 0.0))
        throw std::invalid_argument("pdf_sm: need beta in [0, 1) and gammaO > 0");
    if (!(Rt.eigenvalues()(0) > 1e-12))
        throw std::invalid_argument("pdf_sm: correlation matrix must be invertible");
    const RealVector sig = Rt.matrix().inverse().diagonal().real();
    const double tr = linalg::trace_real(Rt.matrix());
    std::vector<ExpDist> out;
    for (int n = 0; n < N; ++n)
        out.emplace_back((1.0 - beta * beta) / (sig(n) * (beta * beta * tr + N / gammaO)));
    return out;
}

// nu = E{v1^H R v1} for the dominant eigenvector v1 of a CW_N(N, R) matrix,
// with the same unit-norm rescaling as approx_Rtilde.
inline double bf_mean_nu(const CorrelationMatrix &Rt, int N)
{
    if (Rt.is_identity())
        return 1.0;
    const WishartEigvecMoments mom(Rt.matrix(), static_cast<double>(N));
    const ComplexMatrix M = mom.second_moment(0, 0);
    return (M * Rt.matrix()).trace().real() / M.trace().real();
}

// Monte-Carlo draws of the largest eigenvalue of Hw R^{1/2} (Hw R^{1/2})^H,
// Hw an Nr x Nt standard complex Gaussian matrix.
inline std::vector<double> largest_eigenvalue_samples(const CorrelationMatrix &Rt, int Nr, std::size_t count,
                                                      Rng &rng)
{
    const ComplexMatrix S = psd_sqrt(Rt);
    std::vector<double> out(count);
    for (auto &x : out)
    {
        const ComplexMatrix H = rng.complex_gaussian(Nr, Rt.size()) * S;
        Eigen::JacobiSVD<ComplexMatrix> svd(H);
        const double s = svd.singularValues()(0);
        x = s * s;
    }
    return out;
}

} // namespace iasim

#endif
