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

#ifndef IASIM_LINK_LEVEL_HPP
#define IASIM_LINK_LEVEL_HPP

#include "iasim/channel_model.hpp"
#include "iasim/ia_solver.hpp"
#include "iasim/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace iasim
{

// How the CSI-error contribution enters an instantaneous SINR.
//
// ExpectedError: the interference caused by the unknown error E is replaced by
//   its conditional mean given the observed channels, precoders and filters
//   (error-induced terms treated as Gaussian noise of that power, desired
//   gain sqrt(1 - beta^2)). This is the quantity whose law is exponential.
// RealizedError: the drawn error matrices are applied to the received signal
//   and the SINR is evaluated on the true channels.
// Both coincide when beta = 0.
enum class SinrModel
{
    ExpectedError,
    RealizedError
};

inline const char *to_string(SinrModel m) { return m == SinrModel::ExpectedError ? "expected" : "realized"; }

inline SinrModel sinr_model_from_string(const std::string &s)
{
    if (s == "expected")
        return SinrModel::ExpectedError;
    if (s == "realized")
        return SinrModel::RealizedError;
    throw std::invalid_argument("unknown SINR model '" + s + "' (expected|realized)");
}

// Nr x Nr effective channel [H_ii F_i, C_i].
inline ComplexMatrix effective_channel(const ComplexMatrix &Hii, const ComplexMatrix &F, const ComplexMatrix &C)
{
    if (Hii.cols() != F.rows())
        throw std::invalid_argument("effective_channel: H_ii has " + std::to_string(Hii.cols()) +
                                    " columns but F has " + std::to_string(F.rows()) + " rows");
    if (C.rows() != Hii.rows())
        throw std::invalid_argument("effective_channel: C row count differs from Nr");
    if (F.cols() + C.cols() != Hii.rows())
        throw std::invalid_argument("effective_channel: d + (Nr - d) must equal Nr");
    return linalg::hstack(Hii * F, C);
}

inline constexpr double singular_ratio_floor = 1e-12;

// Throws DegenerateDraw when sigma_min < 1e-12 sigma_max.
inline void require_nonsingular(const ComplexMatrix &A, const char *what)
{
    Eigen::JacobiSVD<ComplexMatrix> svd(A);
    const auto &sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(sv.size() - 1) >= singular_ratio_floor * sv(0)))
        throw DegenerateDraw(std::string(what) + ": matrix is numerically singular");
}

// ZF filter [I_d, 0] Heff^{-1}.
inline ComplexMatrix zf_equalizer(const ComplexMatrix &Heff, int d)
{
    if (Heff.rows() != Heff.cols())
        throw std::invalid_argument("zf_equalizer: effective channel must be square");
    if (d < 1 || d > Heff.rows())
        throw std::invalid_argument("zf_equalizer: stream count out of range");
    require_nonsingular(Heff, "zf_equalizer");
    const ComplexMatrix inv = Heff.partialPivLu().inverse();
    return inv.topRows(d);
}

// Perfect-CSI per-stream SINR through the projected direct channel:
//   gamma_n = (gamma_o / d) / [(F^H H^H (I - C C^H) H F)^{-1}]_{n,n}
inline RealVector sinr_perfect(const ComplexMatrix &Hii, const ComplexMatrix &F, const ComplexMatrix &C,
                               double gammaO)
{
    const auto d = F.cols();
    const ComplexMatrix G = linalg::complement_projector(C) * Hii * F;
    const ComplexMatrix core = G.adjoint() * G;
    require_nonsingular(core, "sinr_perfect");
    const ComplexMatrix inv = core.inverse();
    RealVector out(d);
    for (Eigen::Index n = 0; n < d; ++n)
        out(n) = (gammaO / static_cast<double>(d)) / inv(n, n).real();
    return out;
}

// Same quantity from the effective channel directly:
//   gamma_n = (gamma_o / d) / [B (Heff^H Heff)^{-1} B^H]_{n,n}
inline RealVector sinr_perfect_direct(const ComplexMatrix &Hii, const ComplexMatrix &F, const ComplexMatrix &C,
                                      double gammaO)
{
    const auto d = F.cols();
    const ComplexMatrix Heff = effective_channel(Hii, F, C);
    require_nonsingular(Heff, "sinr_perfect_direct");
    const ComplexMatrix gram_inv = (Heff.adjoint() * Heff).inverse();
    RealVector out(d);
    for (Eigen::Index n = 0; n < d; ++n)
        out(n) = (gammaO / static_cast<double>(d)) / gram_inv(n, n).real();
    return out;
}

// Everything about receiver i needed to evaluate its SINR for any (beta, gamma_o):
// the ZF filter built on observed channels applied to the observed and error
// components of every incoming link.
struct ReceiverObservation
{
    std::vector<ComplexMatrix> obs_gain; // W Hhat_ik F_k, d_i x d_k
    std::vector<ComplexMatrix> err_gain; // W Eerr_ik F_k, d_i x d_k
    RealVector filter_norm2;             // ||W(n,:)||^2
    std::vector<int> d;                  // streams per transmitter
};

inline ReceiverObservation observe_receiver(const ChannelSet &ch, const IaSolution &sol, int i)
{
    const int K = ch.obsH.users();
    const int di = static_cast<int>(sol.F[i].cols());
    const ComplexMatrix W = zf_equalizer(effective_channel(ch.obsH(i, i), sol.F[i], sol.C[i]), di);
    ReceiverObservation o;
    o.obs_gain.resize(K);
    o.err_gain.resize(K);
    o.d.resize(K);
    for (int k = 0; k < K; ++k)
    {
        o.obs_gain[k] = W * ch.obsH(i, k) * sol.F[k];
        o.err_gain[k] = W * ch.errH(i, k) * sol.F[k];
        o.d[k] = static_cast<int>(sol.F[k].cols());
    }
    o.filter_norm2 = W.rowwise().squaredNorm();
    return o;
}

// I = sum_k tr(F_k^H R F_k) / d_k for the precoders actually in use.
inline double precoder_correlation_sum(const IaSolution &sol, const ComplexMatrix &Rt)
{
    double total = 0.0;
    for (const auto &F : sol.F)
        total += (F.adjoint() * Rt * F).trace().real() / static_cast<double>(F.cols());
    return total;
}

// Per-stream SINR of receiver `i` (equal power P/d_k per stream, unit noise, P = gamma_o).
inline RealVector receiver_sinr(const ReceiverObservation &o, int i, double beta, double gammaO, double calI,
                                SinrModel model)
{
    const int K = static_cast<int>(o.d.size());
    const int di = o.d[i];
    const double a = std::sqrt(1.0 - beta * beta);
    RealVector out(di);
    for (int n = 0; n < di; ++n)
    {
        double signal = 0.0, interference = 0.0;
        for (int k = 0; k < K; ++k)
        {
            const double p = gammaO / static_cast<double>(o.d[k]);
            for (int m = 0; m < o.d[k]; ++m)
            {
                const bool desired = (k == i && m == n);
                double power;
                if (model == SinrModel::RealizedError)
                    power = p * std::norm(a * o.obs_gain[k](n, m) + beta * o.err_gain[k](n, m));
                else
                    power = p * (1.0 - beta * beta) * std::norm(o.obs_gain[k](n, m));
                (desired ? signal : interference) += power;
            }
        }
        double noise = o.filter_norm2(n);
        if (model == SinrModel::ExpectedError)
            noise += beta * beta * gammaO * o.filter_norm2(n) * calI;
        out(n) = signal / (interference + noise);
    }
    return out;
}

// Per-stream SINR at receiver i when the solution was computed on ch.obsH.
// The ZF filter is built from the observed channels and applied to the true
// received signal.
inline RealVector sinr_imperfect(const ChannelSet &ch, const IaSolution &sol, int i, double gammaO,
                                 SinrModel model = SinrModel::RealizedError)
{
    const auto obs = observe_receiver(ch, sol, i);
    const double calI = (model == SinrModel::ExpectedError) ? precoder_correlation_sum(sol, ch.Rt.matrix()) : 0.0;
    return receiver_sinr(obs, i, ch.beta, gammaO, calI, model);
}

// Single-stream beamforming on the dominant singular pair of the observed link.
struct BeamformingObservation
{
    double lambda_max = 0.0; // largest squared singular value of obsH
    cd err_gain;             // u1^H Eerr v1
    double nu = 0.0;         // v1^H R v1
};

inline BeamformingObservation observe_beamforming(const LinkDraw &link, const ComplexMatrix &Rt)
{
    Eigen::JacobiSVD<ComplexMatrix> svd(link.obsH, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ComplexVector u = svd.matrixU().col(0);
    const ComplexVector v = svd.matrixV().col(0);
    BeamformingObservation o;
    const double s = svd.singularValues()(0);
    o.lambda_max = s * s;
    o.err_gain = u.dot(link.errH * v);
    o.nu = v.dot(Rt * v).real();
    return o;
}

inline double beamforming_sinr(const BeamformingObservation &o, double beta, double gammaO, SinrModel model)
{
    const double a2 = 1.0 - beta * beta;
    if (model == SinrModel::RealizedError)
        return gammaO * std::norm(std::sqrt(a2) * std::sqrt(o.lambda_max) + beta * o.err_gain);
    return a2 * o.lambda_max / (beta * beta * o.nu + 1.0 / gammaO);
}

inline double beamforming_sinr(const LinkDraw &link, const ComplexMatrix &Rt, double beta, double gammaO,
                               SinrModel model = SinrModel::RealizedError)
{
    return beamforming_sinr(observe_beamforming(link, Rt), beta, gammaO, model);
}

// Spatial multiplexing with the ZF filter obsH^{-1}, N streams at P/N each.
struct SpatialMuxObservation
{
    ComplexMatrix err_gain;  // W Eerr
    RealVector filter_norm2; // ||W(n,:)||^2
    double trace_Rt = 0.0;
};

inline SpatialMuxObservation observe_spatial_mux(const LinkDraw &link, const ComplexMatrix &Rt)
{
    if (link.obsH.rows() != link.obsH.cols())
        throw std::invalid_argument("spatial multiplexing: link must be square");
    require_nonsingular(link.obsH, "sm_zf_sinr");
    const ComplexMatrix W = link.obsH.partialPivLu().inverse();
    return {W * link.errH, W.rowwise().squaredNorm(), Rt.trace().real()};
}

inline RealVector sm_zf_sinr(const SpatialMuxObservation &o, double beta, double gammaO, SinrModel model)
{
    const auto N = o.err_gain.rows();
    const double p = gammaO / static_cast<double>(N);
    const double a = std::sqrt(1.0 - beta * beta);
    RealVector out(N);
    for (Eigen::Index n = 0; n < N; ++n)
    {
        if (model == SinrModel::RealizedError)
        {
            double interference = 0.0;
            for (Eigen::Index m = 0; m < N; ++m)
                if (m != n)
                    interference += p * beta * beta * std::norm(o.err_gain(n, m));
            out(n) = p * std::norm(a + beta * o.err_gain(n, n)) / (interference + o.filter_norm2(n));
        }
        else
        {
            out(n) = p * a * a / (o.filter_norm2(n) * (beta * beta * p * o.trace_Rt + 1.0));
        }
    }
    return out;
}

inline RealVector sm_zf_sinr(const LinkDraw &link, const ComplexMatrix &Rt, double beta, double gammaO,
                             SinrModel model = SinrModel::RealizedError)
{
    return sm_zf_sinr(observe_spatial_mux(link, Rt), beta, gammaO, model);
}

} // namespace iasim

#endif
