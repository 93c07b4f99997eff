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

#ifndef IASIM_METRICS_HPP
#define IASIM_METRICS_HPP

#include "iasim/analytic.hpp"
#include "iasim/channel_model.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iasim
{

// ---------------------------------------------------------------------------
// Exponential integral
// ---------------------------------------------------------------------------

namespace detail
{
inline constexpr double euler_gamma = 0.57721566490153286061;

// E1(x) by its power series, x <= 1.
inline double expint_e1_series(double x)
{
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 200; ++k)
    {
        term *= -x / k;
        const double add = term / k;
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum))
            break;
    }
    return -euler_gamma - std::log(x) - sum;
}

// e^x E1(x) by the modified Lentz continued fraction, x > 1.
inline double expint_e1_scaled_cf(double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i)
    {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            break;
    }
    return h;
}
} // namespace detail

// Exponential integral E1(x) = int_x^inf e^{-t}/t dt, x > 0.
inline double expint_e1(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("expint_e1: argument must be positive");
    return x <= 1.0 ? detail::expint_e1_series(x) : std::exp(-x) * detail::expint_e1_scaled_cf(x);
}

// e^x E1(x), finite for large x.
inline double expint_e1_scaled(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("expint_e1_scaled: argument must be positive");
    return x <= 1.0 ? std::exp(x) * detail::expint_e1_series(x) : detail::expint_e1_scaled_cf(x);
}

// ---------------------------------------------------------------------------
// Sum rate
// ---------------------------------------------------------------------------

// E{log2(1 + g)} for g exponential with mean m: e^{1/m} E1(1/m) / ln 2.
inline double expected_rate(const ExpDist &dist) { return expint_e1_scaled(1.0 / dist.mean()) / std::log(2.0); }

inline double sum_rate(std::span<const ExpDist> dists)
{
    double total = 0.0;
    for (const auto &d : dists)
        total += expected_rate(d);
    return total;
}

// Generic expectation of g(gamma) under an exponential law, by exp-sinh quadrature.
inline double expect_under(const ExpDist &dist, const std::function<double(double)> &g, double tol = 1e-12)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    const double m = dist.mean();
    // substitute gamma = m t to keep the integrand scale-free
    auto f = [&](double t) { return g(m * t) * std::exp(-t); };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), tol);
}

// ---------------------------------------------------------------------------
// Symbol error rate
// ---------------------------------------------------------------------------

inline double qfunc(double x) { return 0.5 * std::erfc(x / M_SQRT2); }

struct ModulationModel
{
    std::string name;
    std::function<double(double)> awgn_ser; // SNR (linear) -> symbol error probability
};

inline ModulationModel bpsk() { return {"bpsk", [](double g) { return qfunc(std::sqrt(2.0 * std::max(g, 0.0))); }}; }

inline ModulationModel qpsk()
{
    return {"qpsk", [](double g) {
                const double q = qfunc(std::sqrt(std::max(g, 0.0)));
                return 2.0 * q - q * q;
            }};
}

inline ModulationModel modulation_by_name(const std::string &name)
{
    if (name == "bpsk")
        return bpsk();
    if (name == "qpsk")
        return qpsk();
    throw std::invalid_argument("unknown modulation '" + name + "' (bpsk|qpsk)");
}

// Average SER over the SINR law by quadrature.
inline double ser(const ExpDist &dist, const ModulationModel &mod) { return expect_under(dist, mod.awgn_ser); }

// BPSK over an exponential SINR with mean m: 0.5 (1 - sqrt(m / (1 + m))).
inline double ser_bpsk_closed_form(double mean) { return 0.5 * (1.0 - std::sqrt(mean / (1.0 + mean))); }

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

// Kolmogorov-Smirnov statistic sup |F_emp - F|.
inline double ks_statistic(std::span<const double> samples, const ExpDist &dist)
{
    if (samples.empty())
        throw std::invalid_argument("ks_statistic: no samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double F = dist.cdf(x[i]);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    return D;
}

inline constexpr std::size_t kl_min_samples = 1000;

// D(empirical || analytic) on a uniform grid of `bins` cells over
// [0, empirical 99.9th percentile]. Both distributions are renormalized to the
// truncated support; empty empirical bins contribute 0.
inline double kl_divergence(std::span<const double> samples, const ExpDist &dist, std::size_t bins = 100)
{
    if (samples.size() < kl_min_samples)
        throw std::invalid_argument("kl_divergence: need at least 1000 samples");
    if (bins < 1)
        throw std::invalid_argument("kl_divergence: need at least one bin");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.999 * static_cast<double>(x.size())));
    const double top = x[std::max<std::size_t>(rank, 1) - 1];
    if (!(top > 0.0))
        throw std::invalid_argument("kl_divergence: degenerate sample set");

    std::vector<double> counts(bins, 0.0);
    double retained = 0.0;
    const double width = top / static_cast<double>(bins);
    for (double v : x)
    {
        if (v < 0.0 || v > top)
            continue;
        auto j = static_cast<std::size_t>(v / width);
        counts[std::min(j, bins - 1)] += 1.0;
        retained += 1.0;
    }
    const double mass = dist.cdf(top);
    double kld = 0.0;
    for (std::size_t j = 0; j < bins; ++j)
    {
        if (counts[j] == 0.0)
            continue;
        const double p = counts[j] / retained;
        const double lo = j * width, hi = (j + 1 == bins) ? top : (j + 1) * width;
        const double q = (dist.cdf(hi) - dist.cdf(lo)) / mass;
        kld += p * std::log(p / q);
    }
    return kld;
}

// ---------------------------------------------------------------------------
// SM vs IA mean-SINR ratio
// ---------------------------------------------------------------------------

struct RatioInputs
{
    double sigma2_ia = 1.0; // [Rtilde^{-1}]_{n,n} of the IA stream
    double calI = 0.0;      // aggregate precoder correlation of the IA network
    double sigma2_sm = 1.0; // [R^{-1}]_{n,n} of the SM stream
    double trace_Rt = 0.0;  // tr(R), = N after normalization
    int N = 2;              // SM streams (antennas)
    int d = 1;              // IA streams per user
};

// E{SM SINR} / E{IA SINR}
//   = sigma2_ia d (beta^2 I + 1/gamma_o) / (sigma2_sm (beta^2 tr(R) + N/gamma_o))
// Values above 1 favor spatial multiplexing.
inline double mean_sinr_ratio(double beta, double gammaO, const RatioInputs &in)
{
    const double b2 = beta * beta;
    return in.sigma2_ia * in.d * (b2 * in.calI + 1.0 / gammaO) /
           (in.sigma2_sm * (b2 * in.trace_Rt + in.N / gammaO));
}

// Analytic ratio inputs for a K-user N x N IA network with d streams per user
// against an N x N SM link, both under exponential correlation alpha.
inline RatioInputs ratio_inputs(cd alpha, int K, int N, int d)
{
    const auto Rt = exp_correlation_matrix(alpha, N);
    const std::vector<int> ds(K, d);
    const auto approx = approx_Rtilde_all(Rt, K, ds);
    RatioInputs in;
    in.sigma2_ia = approx[0].sigma2(0);
    in.calI = calI(Rt, K, ds, approx);
    in.sigma2_sm = Rt.matrix().inverse()(0, 0).real();
    in.trace_Rt = linalg::trace_real(Rt.matrix());
    in.N = N;
    in.d = d;
    return in;
}

// ---------------------------------------------------------------------------
// Level-set extraction
// ---------------------------------------------------------------------------

struct ContourPoint
{
    double alpha = 0.0;
    double beta = 0.0;
};
using Polyline = std::vector<ContourPoint>;

// Regular grid of values; values(a, b) is the surface at (alpha[a], beta[b]).
struct RatioGrid
{
    std::vector<double> alpha;
    std::vector<double> beta;
    RealMatrix values; // alpha.size() x beta.size()
};

// Marching squares at `level` with linear interpolation along cell edges;
// segments are chained into polylines. Grid values equal to the level count as
// above it. Saddle cells are resolved by the cell-center average.
inline std::vector<Polyline> level_contour(const RatioGrid &g, double level = 1.0)
{
    const auto na = static_cast<int>(g.alpha.size()), nb = static_cast<int>(g.beta.size());
    if (g.values.rows() != na || g.values.cols() != nb)
        throw std::invalid_argument("level_contour: value grid does not match axes");
    if (na < 2 || nb < 2)
        return {};

    // Edge ids: horizontal (a,b)-(a+1,b) -> 2 (a nb + b); vertical (a,b)-(a,b+1) -> 2 (a nb + b) + 1
    auto h_edge = [nb](int a, int b) { return 2L * (static_cast<long>(a) * nb + b); };
    auto v_edge = [nb](int a, int b) { return 2L * (static_cast<long>(a) * nb + b) + 1; };
    auto above = [&](int a, int b) { return g.values(a, b) >= level; };
    auto edge_point = [&](long id) {
        const long base = id / 2;
        const int a = static_cast<int>(base / nb), b = static_cast<int>(base % nb);
        const int a2 = (id % 2 == 0) ? a + 1 : a, b2 = (id % 2 == 0) ? b : b + 1;
        const double v1 = g.values(a, b), v2 = g.values(a2, b2);
        const double t = (v1 == v2) ? 0.5 : (level - v1) / (v2 - v1);
        return ContourPoint{g.alpha[a] + t * (g.alpha[a2] - g.alpha[a]), g.beta[b] + t * (g.beta[b2] - g.beta[b])};
    };

    std::vector<std::pair<long, long>> segments;
    for (int a = 0; a + 1 < na; ++a)
        for (int b = 0; b + 1 < nb; ++b)
        {
            // corners: 0=(a,b) 1=(a+1,b) 2=(a+1,b+1) 3=(a,b+1)
            const int code = (above(a, b) ? 1 : 0) | (above(a + 1, b) ? 2 : 0) | (above(a + 1, b + 1) ? 4 : 0) |
                             (above(a, b + 1) ? 8 : 0);
            const long e_bottom = h_edge(a, b), e_right = v_edge(a + 1, b), e_top = h_edge(a, b + 1),
                       e_left = v_edge(a, b);
            switch (code)
            {
            case 0:
            case 15:
                break;
            case 1:
            case 14:
                segments.emplace_back(e_left, e_bottom);
                break;
            case 2:
            case 13:
                segments.emplace_back(e_bottom, e_right);
                break;
            case 3:
            case 12:
                segments.emplace_back(e_left, e_right);
                break;
            case 4:
            case 11:
                segments.emplace_back(e_right, e_top);
                break;
            case 6:
            case 9:
                segments.emplace_back(e_bottom, e_top);
                break;
            case 7:
            case 8:
                segments.emplace_back(e_left, e_top);
                break;
            case 5:
            case 10: {
                const double center = 0.25 * (g.values(a, b) + g.values(a + 1, b) + g.values(a + 1, b + 1) +
                                              g.values(a, b + 1));
                const bool center_above = center >= level;
                if ((code == 5) == center_above)
                {
                    segments.emplace_back(e_left, e_top);
                    segments.emplace_back(e_bottom, e_right);
                }
                else
                {
                    segments.emplace_back(e_left, e_bottom);
                    segments.emplace_back(e_right, e_top);
                }
                break;
            }
            default:
                break;
            }
        }

    std::multimap<long, std::size_t> at_edge;
    for (std::size_t s = 0; s < segments.size(); ++s)
    {
        at_edge.emplace(segments[s].first, s);
        at_edge.emplace(segments[s].second, s);
    }
    std::vector<bool> used(segments.size(), false);
    auto next_segment = [&](long edge) -> std::ptrdiff_t {
        auto [lo, hi] = at_edge.equal_range(edge);
        for (auto it = lo; it != hi; ++it)
            if (!used[it->second])
                return static_cast<std::ptrdiff_t>(it->second);
        return -1;
    };

    std::vector<Polyline> out;
    // Open chains first (start at edges touched by exactly one segment), then closed loops.
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t s0 = 0; s0 < segments.size(); ++s0)
        {
            if (used[s0])
                continue;
            long start = segments[s0].first;
            if (pass == 0)
            {
                if (at_edge.count(segments[s0].first) == 1)
                    start = segments[s0].first;
                else if (at_edge.count(segments[s0].second) == 1)
                    start = segments[s0].second;
                else
                    continue;
            }
            std::vector<long> chain{start};
            long cur = start;
            std::ptrdiff_t s = static_cast<std::ptrdiff_t>(s0);
            while (s >= 0)
            {
                used[s] = true;
                cur = (segments[s].first == cur) ? segments[s].second : segments[s].first;
                chain.push_back(cur);
                s = next_segment(cur);
            }
            Polyline line;
            for (long e : chain)
                line.push_back(edge_point(e));
            out.push_back(std::move(line));
        }
    return out;
}

// Smallest scaled Chebyshev distance max(|da|/tol_a, |db|/tol_b) from
// (a0, b0) to any polyline segment. Values <= 1 mean "passes within tolerance".
inline double contour_distance(const std::vector<Polyline> &lines, double a0, double b0, double tol_a, double tol_b)
{
    double best = std::numeric_limits<double>::infinity();
    auto scaled = [&](double a, double b) { return std::max(std::abs(a - a0) / tol_a, std::abs(b - b0) / tol_b); };
    for (const auto &line : lines)
    {
        for (std::size_t k = 0; k < line.size(); ++k)
        {
            best = std::min(best, scaled(line[k].alpha, line[k].beta));
            if (k + 1 == line.size())
                continue;
            // the scaled distance is convex along the segment; ternary search for its minimum
            double lo = 0.0, hi = 1.0;
            auto at = [&](double t) {
                return scaled(line[k].alpha + t * (line[k + 1].alpha - line[k].alpha),
                              line[k].beta + t * (line[k + 1].beta - line[k].beta));
            };
            for (int it = 0; it < 100; ++it)
            {
                const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                (at(m1) <= at(m2) ? hi : lo) = (at(m1) <= at(m2) ? m2 : m1);
            }
            best = std::min(best, at(0.5 * (lo + hi)));
        }
    }
    return best;
}

inline RatioGrid theoretical_ratio_grid(const std::vector<double> &alphas, const std::vector<double> &betas,
                                        double gammaO, int K, int N, int d)
{
    RatioGrid g{alphas, betas, RealMatrix(alphas.size(), betas.size())};
    for (std::size_t a = 0; a < alphas.size(); ++a)
    {
        const auto in = ratio_inputs(cd(alphas[a], 0.0), K, N, d);
        for (std::size_t b = 0; b < betas.size(); ++b)
            g.values(a, b) = mean_sinr_ratio(betas[b], gammaO, in);
    }
    return g;
}

// Unity contours of the theoretical ratio surface, one family member per gamma_o (dB).
inline std::vector<std::vector<Polyline>> unity_contour(const std::vector<double> &alphas,
                                                        const std::vector<double> &betas,
                                                        const std::vector<double> &gamma_dB, int K, int N, int d)
{
    std::vector<std::vector<Polyline>> out;
    for (double gdb : gamma_dB)
        out.push_back(level_contour(theoretical_ratio_grid(alphas, betas, db_to_linear(gdb), K, N, d), 1.0));
    return out;
}

} // namespace iasim

#endif
