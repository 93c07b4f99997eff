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

#ifndef IASIM_CHANNEL_MODEL_HPP
#define IASIM_CHANNEL_MODEL_HPP

#include "iasim/linalg.hpp"
#include "iasim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace iasim
{

// Transmit correlation matrix: Hermitian, positive semidefinite, trace = N.
class CorrelationMatrix
{
public:
    static constexpr double hermitian_tol = 1e-12;
    static constexpr double psd_tol = 1e-10;
    static constexpr double trace_tol = 1e-10;

    CorrelationMatrix() = default;

    // Validates the invariants. When `normalize` is set the matrix is first
    // rescaled to trace N and symmetrized.
    explicit CorrelationMatrix(ComplexMatrix entries, bool normalize = false) : entries_(std::move(entries))
    {
        if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
            throw std::invalid_argument("CorrelationMatrix: must be a non-empty square matrix");
        const double n = static_cast<double>(entries_.rows());
        if (normalize)
        {
            const double tr = linalg::trace_real(entries_);
            if (!(tr > 0.0))
                throw std::invalid_argument("CorrelationMatrix: cannot normalize a matrix with non-positive trace");
            entries_ = 0.5 * (entries_ + entries_.adjoint().eval()) * (n / tr);
        }
        if (linalg::hermitian_defect(entries_) > hermitian_tol)
            throw std::invalid_argument("CorrelationMatrix: not Hermitian");
        if (std::abs(linalg::trace_real(entries_) - n) > trace_tol * n)
            throw std::invalid_argument("CorrelationMatrix: trace must equal the antenna count");
        eigenvalues_ = linalg::eigvalsh(entries_);
        if (eigenvalues_(0) < -psd_tol)
            throw std::invalid_argument("CorrelationMatrix: not positive semidefinite (smallest eigenvalue " +
                                        std::to_string(eigenvalues_(0)) + ")");
    }

    static CorrelationMatrix identity(int n) { return CorrelationMatrix(ComplexMatrix::Identity(n, n)); }

    const ComplexMatrix &matrix() const { return entries_; }
    int size() const { return static_cast<int>(entries_.rows()); }
    cd operator()(int i, int j) const { return entries_(i, j); }

    // Ascending.
    const RealVector &eigenvalues() const { return eigenvalues_; }

    bool is_identity(double tol = 1e-12) const
    {
        return (entries_ - ComplexMatrix::Identity(size(), size())).cwiseAbs().maxCoeff() <= tol;
    }

private:
    ComplexMatrix entries_;
    RealVector eigenvalues_;
};

// Exponential (uniform linear array) transmit correlation:
// R(i,j) = alpha^(j-i) for j >= i, conj(alpha)^(i-j) for j < i.
inline CorrelationMatrix exp_correlation_matrix(cd alpha, int n)
{
    if (n < 1)
        throw std::invalid_argument("exp_correlation_matrix: N must be >= 1");
    if (!(std::abs(alpha) < 1.0))
        throw std::invalid_argument("exp_correlation_matrix: |alpha| must be < 1");
    ComplexMatrix R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            if (j >= i)
                R(i, j) = (j == i) ? cd(1.0, 0.0) : std::pow(alpha, j - i);
            else
                R(i, j) = std::pow(std::conj(alpha), i - j);
        }
    return CorrelationMatrix(std::move(R), true);
}

// Principal (Hermitian PSD) square root. Eigenvalues below -1e-10 are rejected.
inline ComplexMatrix psd_sqrt(const ComplexMatrix &R)
{
    if (R.rows() != R.cols())
        throw std::invalid_argument("psd_sqrt: matrix must be square");
    const auto eig = linalg::eigh(0.5 * (R + R.adjoint()));
    if (eig.values(0) < -CorrelationMatrix::psd_tol)
        throw std::invalid_argument("psd_sqrt: matrix is not positive semidefinite");
    RealVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
    return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

inline ComplexMatrix psd_sqrt(const CorrelationMatrix &R) { return psd_sqrt(R.matrix()); }

// Experiment description. All fields are validated by validate().
struct Scenario
{
    int K = 3;
    int Nt = 2;
    int Nr = 2;
    std::vector<int> d{1, 1, 1};
    cd alpha{0.0, 0.0};
    double beta = 0.0;
    std::vector<double> gamma_dB{0, 5, 10, 15, 20, 25, 30, 35, 40};
    std::int64_t trials = 20000;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (K < 2)
            throw std::invalid_argument("Scenario: K must be >= 2");
        if (Nt < 1 || Nr < 1)
            throw std::invalid_argument("Scenario: antenna counts must be >= 1");
        if (static_cast<int>(d.size()) != K)
            throw std::invalid_argument("Scenario: d must list one stream count per user (" + std::to_string(K) +
                                        " expected, got " + std::to_string(d.size()) + ")");
        for (int di : d)
            if (di < 1 || di > std::min(Nt, Nr))
                throw std::invalid_argument("Scenario: each d_i must satisfy 1 <= d_i <= min(Nt, Nr)");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("Scenario: beta must lie in [0, 1]");
        if (!(std::abs(alpha) < 1.0))
            throw std::invalid_argument("Scenario: |alpha| must be < 1");
        if (trials < 1)
            throw std::invalid_argument("Scenario: trials must be >= 1");
        for (double g : gamma_dB)
            if (!std::isfinite(g))
                throw std::invalid_argument("Scenario: gammaO_dB entries must be finite");
    }

    int total_streams() const { return std::accumulate(d.begin(), d.end(), 0); }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// K x K array of link matrices; (i, k) is the channel from transmitter k to receiver i.
class ChannelArray
{
public:
    ChannelArray() = default;
    explicit ChannelArray(int K) : K_(K), links_(static_cast<std::size_t>(K) * K) {}

    int users() const { return K_; }
    ComplexMatrix &operator()(int i, int k) { return links_[index(i, k)]; }
    const ComplexMatrix &operator()(int i, int k) const { return links_[index(i, k)]; }

private:
    std::size_t index(int i, int k) const
    {
        if (i < 0 || k < 0 || i >= K_ || k >= K_)
            throw std::out_of_range("ChannelArray: link index out of range");
        return static_cast<std::size_t>(i) * K_ + k;
    }

    int K_ = 0;
    std::vector<ComplexMatrix> links_;
};

// One Monte-Carlo channel realization with imperfect CSI:
//   obsH(i,k)  = Hw_hat(i,k) R^{1/2}
//   errH(i,k)  = E(i,k) R^{1/2}
//   trueH(i,k) = sqrt(1 - beta^2) obsH(i,k) + beta errH(i,k)
struct ChannelSet
{
    ChannelArray trueH;
    ChannelArray obsH;
    ChannelArray errH;
    CorrelationMatrix Rt;
    double beta = 0.0;
};

// Observed and true versions of a single N x N point-to-point link (same model).
struct LinkDraw
{
    ComplexMatrix trueH;
    ComplexMatrix obsH;
    ComplexMatrix errH;
};

inline ChannelArray mix_true_channels(const ChannelArray &obs, const ChannelArray &err, double beta)
{
    const int K = obs.users();
    ChannelArray out(K);
    const double a = std::sqrt(1.0 - beta * beta);
    for (int i = 0; i < K; ++i)
        for (int k = 0; k < K; ++k)
            out(i, k) = (beta == 0.0) ? obs(i, k) : ComplexMatrix(a * obs(i, k) + beta * err(i, k));
    return out;
}

// Draws all K^2 links independently. For every (i, k) in row-major order the
// observation Hw_hat(i,k) is drawn first, then E(i,k).
inline ChannelSet sample_channel_set(const Scenario &sc, const CorrelationMatrix &Rt, const ComplexMatrix &Rt_sqrt,
                                     Rng &rng)
{
    if (Rt.size() != sc.Nt || Rt_sqrt.rows() != sc.Nt)
        throw std::invalid_argument("sample_channel_set: correlation matrix size must equal Nt");
    ChannelSet ch;
    ch.obsH = ChannelArray(sc.K);
    ch.errH = ChannelArray(sc.K);
    for (int i = 0; i < sc.K; ++i)
        for (int k = 0; k < sc.K; ++k)
        {
            ch.obsH(i, k) = rng.complex_gaussian(sc.Nr, sc.Nt) * Rt_sqrt;
            ch.errH(i, k) = rng.complex_gaussian(sc.Nr, sc.Nt) * Rt_sqrt;
        }
    ch.trueH = mix_true_channels(ch.obsH, ch.errH, sc.beta);
    ch.Rt = Rt;
    ch.beta = sc.beta;
    return ch;
}

inline ChannelSet sample_channel_set(const Scenario &sc, Rng &rng)
{
    sc.validate();
    const auto Rt = exp_correlation_matrix(sc.alpha, sc.Nt);
    return sample_channel_set(sc, Rt, psd_sqrt(Rt), rng);
}

inline LinkDraw sample_link(int Nr, const ComplexMatrix &Rt_sqrt, double beta, Rng &rng)
{
    LinkDraw out;
    const auto Nt = Rt_sqrt.rows();
    out.obsH = rng.complex_gaussian(Nr, Nt) * Rt_sqrt;
    out.errH = rng.complex_gaussian(Nr, Nt) * Rt_sqrt;
    out.trueH = (beta == 0.0) ? out.obsH : ComplexMatrix(std::sqrt(1.0 - beta * beta) * out.obsH + beta * out.errH);
    return out;
}

} // namespace iasim

#endif
