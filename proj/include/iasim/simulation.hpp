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

#ifndef IASIM_SIMULATION_HPP
#define IASIM_SIMULATION_HPP

#include "iasim/channel_model.hpp"
#include "iasim/ia_solver.hpp"
#include "iasim/link_level.hpp"
#include "iasim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <vector>

namespace iasim
{

inline unsigned resolve_threads(unsigned requested)
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(t) for t in [0, n) on a pool of worker threads. fn must write only
// to per-trial state; callers reduce afterwards in trial order, so results do
// not depend on the worker count. The exception of the lowest failing trial
// index is rethrown.
template <class Fn>
void for_each_trial(std::int64_t n, unsigned threads, Fn &&fn)
{
    threads = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::int64_t>(n, 1)));
    std::atomic<std::int64_t> next{0};
    std::mutex err_mutex;
    std::int64_t err_index = n;
    std::exception_ptr err;

    auto worker = [&]() {
        for (;;)
        {
            const std::int64_t t = next.fetch_add(1);
            if (t >= n)
                return;
            try
            {
                fn(t);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (t < err_index)
                {
                    err_index = t;
                    err = std::current_exception();
                }
            }
        }
    };

    if (threads <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (err)
        std::rethrow_exception(err);
}

// Empirical per-stream SINR samples (linear), keyed by (user, stream, gamma index).
struct SampleKey
{
    int user = 0;
    int stream = 0;
    int gamma = 0;
    friend bool operator<(const SampleKey &a, const SampleKey &b)
    {
        return std::tie(a.user, a.stream, a.gamma) < std::tie(b.user, b.stream, b.gamma);
    }
    friend bool operator==(const SampleKey &, const SampleKey &) = default;
};

class SinrSampleSet
{
public:
    SinrSampleSet() = default;
    SinrSampleSet(Scenario meta) : meta_(std::move(meta)) {}

    const Scenario &meta() const { return meta_; }

    void add(const SampleKey &key, double value)
    {
        if (!(value >= 0.0))
            throw std::invalid_argument("SinrSampleSet: SINR samples must be non-negative");
        samples_[key].push_back(value);
    }

    const std::vector<double> &at(const SampleKey &key) const
    {
        auto it = samples_.find(key);
        if (it == samples_.end())
            throw std::out_of_range("SinrSampleSet: no samples for the requested cell");
        return it->second;
    }

    bool contains(const SampleKey &key) const { return samples_.count(key) > 0; }

    // All users and streams at one gamma point, concatenated in key order.
    std::vector<double> pooled(int gamma) const
    {
        std::vector<double> out;
        for (const auto &[key, v] : samples_)
            if (key.gamma == gamma)
                out.insert(out.end(), v.begin(), v.end());
        return out;
    }

    const std::map<SampleKey, std::vector<double>> &cells() const { return samples_; }

private:
    Scenario meta_;
    std::map<SampleKey, std::vector<double>> samples_;
};

struct RunCounters
{
    std::int64_t trials = 0;      // attempted
    std::int64_t accepted = 0;    // contributing samples
    std::int64_t degenerate = 0;  // singular receiver matrices
    std::int64_t unconverged = 0; // solver did not reach tol

    std::int64_t discarded() const { return degenerate + unconverged; }
    double discard_rate() const { return trials ? static_cast<double>(discarded()) / trials : 0.0; }
};

struct IaRunOptions
{
    SolverOptions solver;
    SinrModel model = SinrModel::ExpectedError;
    unsigned threads = 0;
    std::vector<double> betas; // empty: {scenario.beta}
};

struct IaRunResult
{
    std::vector<double> betas;
    std::vector<SinrSampleSet> samples; // one per beta
    RunCounters counters;
    std::vector<ComplexMatrix> rtilde_mean; // per user, mean of F_i^H R F_i over accepted trials
    double calI_mean = 0.0;                 // mean of sum_i tr(F_i^H R F_i) / d_i
    std::vector<int> iterations;            // per accepted trial
};

namespace detail
{
struct IaTrial
{
    bool accepted = false;
    bool degenerate = false;
    bool unconverged = false;
    int iterations = 0;
    std::vector<double> sinr;                 // [beta][user][stream][gamma], flattened
    std::vector<ComplexMatrix> rtilde;        // per user
};
} // namespace detail

// Monte-Carlo IA sweep. For trial t the channels come from
// Rng::substream(seed, streams::channel, t) and the solver start from
// Rng::substream(seed, streams::solver, t). The observed channels do not
// depend on beta, so one solution serves every (beta, gamma_o) point.
inline IaRunResult run_ia(const Scenario &sc, const IaRunOptions &opt = {})
{
    sc.validate();
    const auto report = check_feasibility(sc.K, sc.Nt, sc.Nr, sc.d);
    if (!report.feasible)
        throw std::invalid_argument("infeasible scenario: " + report.reason);

    IaRunResult res;
    res.betas = opt.betas.empty() ? std::vector<double>{sc.beta} : opt.betas;
    for (double b : res.betas)
        if (!(b >= 0.0 && b <= 1.0))
            throw std::invalid_argument("run_ia: beta must lie in [0, 1]");

    const auto Rt = exp_correlation_matrix(sc.alpha, sc.Nt);
    const ComplexMatrix Rs = psd_sqrt(Rt);
    std::vector<double> gammas;
    for (double g : sc.gamma_dB)
        gammas.push_back(db_to_linear(g));
    const int streams_total = sc.total_streams();
    const std::size_t per_trial = res.betas.size() * streams_total * gammas.size();

    std::vector<detail::IaTrial> trials(sc.trials);
    for_each_trial(sc.trials, opt.threads, [&](std::int64_t t) {
        auto &out = trials[t];
        Rng ch_rng = Rng::substream(sc.seed, streams::channel, t);
        Rng sv_rng = Rng::substream(sc.seed, streams::solver, t);
        Scenario draw = sc;
        draw.beta = 0.0; // true channels are re-mixed per beta below
        const ChannelSet ch = sample_channel_set(draw, Rt, Rs, ch_rng);
        const IaSolution sol = alternating_min(ch.obsH, sc.d, opt.solver, sv_rng);
        out.iterations = sol.iterations;
        if (!sol.converged(opt.solver.tol))
        {
            out.unconverged = true;
            return;
        }
        try
        {
            std::vector<ReceiverObservation> obs;
            obs.reserve(sc.K);
            for (int i = 0; i < sc.K; ++i)
                obs.push_back(observe_receiver(ch, sol, i));
            const double calI = precoder_correlation_sum(sol, Rt.matrix());
            out.sinr.reserve(per_trial);
            for (double beta : res.betas)
                for (int i = 0; i < sc.K; ++i)
                    for (double g : gammas)
                    {
                        const RealVector s = receiver_sinr(obs[i], i, beta, g, calI, opt.model);
                        for (Eigen::Index n = 0; n < s.size(); ++n)
                            out.sinr.push_back(s(n));
                    }
        }
        catch (const DegenerateDraw &)
        {
            out.degenerate = true;
            out.sinr.clear();
            return;
        }
        out.rtilde.resize(sc.K);
        for (int i = 0; i < sc.K; ++i)
            out.rtilde[i] = sol.F[i].adjoint() * Rt.matrix() * sol.F[i];
        out.accepted = true;
    });

    // Ordered reduction.
    res.counters.trials = sc.trials;
    for (double b : res.betas)
    {
        Scenario meta = sc;
        meta.beta = b;
        res.samples.emplace_back(meta);
    }
    res.rtilde_mean.resize(sc.K);
    for (int i = 0; i < sc.K; ++i)
        res.rtilde_mean[i] = ComplexMatrix::Zero(sc.d[i], sc.d[i]);
    for (const auto &tr : trials)
    {
        res.counters.degenerate += tr.degenerate;
        res.counters.unconverged += tr.unconverged;
        if (!tr.accepted)
            continue;
        ++res.counters.accepted;
        res.iterations.push_back(tr.iterations);
        std::size_t pos = 0;
        for (std::size_t b = 0; b < res.betas.size(); ++b)
            for (int i = 0; i < sc.K; ++i)
                for (int g = 0; g < static_cast<int>(gammas.size()); ++g)
                    for (int n = 0; n < sc.d[i]; ++n)
                        res.samples[b].add({i, n, g}, tr.sinr[pos++]);
        for (int i = 0; i < sc.K; ++i)
        {
            res.rtilde_mean[i] += tr.rtilde[i];
            res.calI_mean += tr.rtilde[i].trace().real() / sc.d[i];
        }
    }
    if (res.counters.accepted > 0)
    {
        const double a = static_cast<double>(res.counters.accepted);
        for (auto &m : res.rtilde_mean)
            m /= a;
        res.calI_mean /= a;
    }
    return res;
}

// diag(E{F_i^H R F_i}^{-1}) per user from a run.
inline std::vector<RealVector> empirical_sigma2(const IaRunResult &res)
{
    std::vector<RealVector> out;
    for (const auto &m : res.rtilde_mean)
        out.push_back(m.inverse().diagonal().real());
    return out;
}

enum class LinkScheme
{
    Beamforming,
    SpatialMux
};

struct LinkRunOptions
{
    SinrModel model = SinrModel::ExpectedError;
    unsigned threads = 0;
    std::vector<double> betas; // empty: {scenario.beta}
};

struct LinkRunResult
{
    std::vector<double> betas;
    std::vector<SinrSampleSet> samples; // user 0; stream n; one set per beta
    RunCounters counters;
};

// Point-to-point N x N baselines (Nt = Nr = scenario.Nt). Trial t draws from
// Rng::substream(seed, streams::link, t).
inline LinkRunResult run_link(const Scenario &sc, LinkScheme scheme, const LinkRunOptions &opt = {})
{
    if (sc.trials < 1 || !(std::abs(sc.alpha) < 1.0))
        throw std::invalid_argument("run_link: invalid scenario");
    LinkRunResult res;
    res.betas = opt.betas.empty() ? std::vector<double>{sc.beta} : opt.betas;
    const int N = sc.Nt;
    const auto Rt = exp_correlation_matrix(sc.alpha, N);
    const ComplexMatrix Rs = psd_sqrt(Rt);
    std::vector<double> gammas;
    for (double g : sc.gamma_dB)
        gammas.push_back(db_to_linear(g));

    struct Trial
    {
        bool ok = false;
        std::vector<double> sinr; // [beta][gamma][stream]
    };
    std::vector<Trial> trials(sc.trials);
    for_each_trial(sc.trials, opt.threads, [&](std::int64_t t) {
        Rng rng = Rng::substream(sc.seed, streams::link, t);
        const LinkDraw link = sample_link(N, Rs, 0.0, rng);
        auto &out = trials[t];
        try
        {
            if (scheme == LinkScheme::Beamforming)
            {
                const auto o = observe_beamforming(link, Rt.matrix());
                for (double b : res.betas)
                    for (double g : gammas)
                        out.sinr.push_back(beamforming_sinr(o, b, g, opt.model));
            }
            else
            {
                const auto o = observe_spatial_mux(link, Rt.matrix());
                for (double b : res.betas)
                    for (double g : gammas)
                    {
                        const RealVector s = sm_zf_sinr(o, b, g, opt.model);
                        for (Eigen::Index n = 0; n < s.size(); ++n)
                            out.sinr.push_back(s(n));
                    }
            }
            out.ok = true;
        }
        catch (const DegenerateDraw &)
        {
            out.sinr.clear();
        }
    });

    res.counters.trials = sc.trials;
    for (double b : res.betas)
    {
        Scenario meta = sc;
        meta.beta = b;
        meta.K = 1;
        meta.Nr = N;
        meta.d = {scheme == LinkScheme::Beamforming ? 1 : N};
        res.samples.emplace_back(meta);
    }
    const int streams = scheme == LinkScheme::Beamforming ? 1 : N;
    for (const auto &tr : trials)
    {
        if (!tr.ok)
        {
            ++res.counters.degenerate;
            continue;
        }
        ++res.counters.accepted;
        std::size_t pos = 0;
        for (std::size_t b = 0; b < res.betas.size(); ++b)
            for (int g = 0; g < static_cast<int>(gammas.size()); ++g)
                for (int n = 0; n < streams; ++n)
                    res.samples[b].add({0, n, g}, tr.sinr[pos++]);
    }
    return res;
}

} // namespace iasim

#endif
