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

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace iasim;

namespace
{
bool feasible(int K, int Nt, int Nr, std::vector<int> d) { return check_feasibility(K, Nt, Nr, d).feasible; }
} // namespace

TEST_CASE("feasibility examples", "[ia_solver]")
{
    CHECK(feasible(3, 2, 2, {1, 1, 1}));
    CHECK(feasible(5, 3, 3, {1, 1, 1, 1, 1}));
    CHECK(feasible(4, 3, 3, {1, 1, 1, 1}));
    CHECK_FALSE(feasible(4, 2, 2, {1, 1, 1, 1}));
    CHECK_FALSE(feasible(3, 2, 2, {2, 1, 1}));
    CHECK(feasible(3, 4, 4, {2, 2, 2}));
    CHECK_FALSE(feasible(3, 3, 3, {2, 2, 2}));
    const auto r = check_feasibility(4, 2, 2, std::vector<int>{1, 1, 1, 1});
    CHECK_FALSE(r.reason.empty());
}

TEST_CASE("symmetric feasibility matches Nt + Nr >= (K + 1) d", "[ia_solver][property]")
{
    for (int K = 2; K <= 6; ++K)
        for (int Nt = 1; Nt <= 6; ++Nt)
            for (int Nr = 1; Nr <= 6; ++Nr)
                for (int d = 1; d <= std::min(Nt, Nr); ++d)
                {
                    INFO("K=" << K << " Nt=" << Nt << " Nr=" << Nr << " d=" << d);
                    CHECK(feasible(K, Nt, Nr, std::vector<int>(K, d)) == (Nt + Nr >= (K + 1) * d));
                }
}

TEST_CASE("solver rejects invalid requests", "[ia_solver]")
{
    Rng rng(1);
    Scenario sc = test::small_network(4, 2);
    const auto ch = sample_channel_set(sc, rng);
    CHECK_THROWS_AS(alternating_min(ch.obsH, sc.d, SolverOptions{}, rng), std::invalid_argument);
    CHECK_THROWS_AS(alternating_min(ch.obsH, std::vector<int>{1, 1, 1}, SolverOptions{}, rng), std::invalid_argument);
    SolverOptions bad;
    bad.tol = 0.0;
    bad.enforce_feasibility = false;
    CHECK_THROWS_AS(alternating_min(ch.obsH, sc.d, bad, rng), std::invalid_argument);
}

TEST_CASE("solver converges on proper networks", "[ia_solver]")
{
    SolverOptions opt;
    for (auto [K, N] : {std::pair{3, 2}, std::pair{5, 3}})
    {
        const Scenario sc = test::small_network(K, N);
        int converged = 0;
        for (int r = 0; r < 100; ++r)
            converged += test::ia_instance(sc, 1000 + r, 0, opt).has_value();
        INFO("K=" << K << " N=" << N);
        CHECK(converged >= 99);
    }
}

TEST_CASE("improper network keeps leakage away from zero", "[ia_solver]")
{
    Scenario sc = test::small_network(4, 2);
    SolverOptions opt;
    opt.enforce_feasibility = false;
    opt.max_iter = 2000;
    for (int r = 0; r < 5; ++r)
    {
        Rng ch_rng = Rng::substream(50 + r, streams::channel, 0);
        Rng sv_rng = Rng::substream(50 + r, streams::solver, 0);
        const auto ch = sample_channel_set(sc, ch_rng);
        const auto sol = alternating_min(ch.obsH, sc.d, opt, sv_rng);
        CHECK(sol.leakage > 1e-4);
    }
}

TEST_CASE("solver iterates keep orthonormal columns and monotone leakage", "[ia_solver][property]")
{
    for (int r = 0; r < 20; ++r)
    {
        Scenario sc = test::small_network(r % 2 ? 5 : 3, r % 2 ? 3 : 2, 0.1 * (r % 9));
        SolverOptions opt;
        opt.record_history = true;
        opt.max_iter = 400;
        double worst = 0.0;
        opt.on_iteration = [&](const IaSolution &s) {
            for (const auto &F : s.F)
                worst = std::max(worst, linalg::orthonormality_defect(F));
            for (const auto &C : s.C)
                worst = std::max(worst, linalg::orthonormality_defect(C));
        };
        Rng ch_rng = Rng::substream(r, streams::channel, 0);
        Rng sv_rng = Rng::substream(r, streams::solver, 0);
        const auto ch = sample_channel_set(sc, ch_rng);
        const auto sol = alternating_min(ch.obsH, sc.d, opt, sv_rng);
        CHECK(worst <= 1e-10);
        const auto &h = sol.leakage_history;
        REQUIRE(!h.empty());
        for (std::size_t k = 1; k < h.size(); ++k)
            CHECK(h[k] <= h[k - 1] * (1.0 + 1e-9) + 1e-14);
        CHECK(sol.leakage == Catch::Approx(interference_leakage(sol, ch.obsH)).margin(1e-10));
    }
}

TEST_CASE("leakage is invariant under a unitary change of interference basis", "[ia_solver][property]")
{
    Rng rng(9);
    const Scenario sc = test::small_network(3, 3);
    std::vector<int> d{1, 1, 1};
    for (int t = 0; t < 20; ++t)
    {
        const auto ch = sample_channel_set(sc, rng);
        IaSolution s;
        for (int i = 0; i < 3; ++i)
        {
            s.F.push_back(rng.haar_frame(3, 1));
            s.C.push_back(rng.haar_frame(3, 2));
        }
        const double base = interference_leakage(s, ch.obsH);
        IaSolution rotated = s;
        for (auto &C : rotated.C)
            C = C * rng.haar_frame(2, 2);
        CHECK(interference_leakage(rotated, ch.obsH) == Catch::Approx(base).epsilon(1e-10));
        CHECK(base > 0.0);
    }
}

TEST_CASE("solver never reads the direct links", "[ia_solver][property]")
{
    const Scenario sc = test::small_network(3, 2);
    for (int r = 0; r < 10; ++r)
    {
        Rng ch_rng = Rng::substream(r, streams::channel, 0);
        auto ch = sample_channel_set(sc, ch_rng);
        Rng s1 = Rng::substream(r, streams::solver, 0), s2 = s1;
        const auto a = alternating_min(ch.obsH, sc.d, SolverOptions{}, s1);
        Rng junk(1000 + r);
        for (int i = 0; i < 3; ++i)
            ch.obsH(i, i) = junk.complex_gaussian(2, 2) * 10.0;
        const auto b = alternating_min(ch.obsH, sc.d, SolverOptions{}, s2);
        REQUIRE(a.iterations == b.iterations);
        for (int i = 0; i < 3; ++i)
        {
            CHECK(a.F[i] == b.F[i]);
            CHECK(a.C[i] == b.C[i]);
        }
    }
}

TEST_CASE("leakage on true channels grows with CSI error", "[ia_solver][property]")
{
    const Scenario base = test::small_network(3, 2);
    std::vector<double> mean_leak;
    for (double beta : {0.0, 0.1, 0.3})
    {
        double acc = 0.0;
        int n = 0;
        Scenario sc = base;
        sc.beta = beta;
        for (int r = 0; r < 60; ++r)
        {
            const auto inst = test::ia_instance(sc, 77, r);
            if (!inst)
                continue;
            const double leak = interference_leakage(inst->sol, inst->ch.trueH);
            if (beta > 0.0)
                CHECK(leak > 0.0);
            acc += leak;
            ++n;
        }
        REQUIRE(n > 50);
        mean_leak.push_back(acc / n);
    }
    CHECK(mean_leak[0] < 1e-7);
    CHECK(mean_leak[1] > mean_leak[0]);
    CHECK(mean_leak[2] > mean_leak[1]);
}

TEST_CASE("interference_leakage rejects inconsistent shapes", "[ia_solver]")
{
    Rng rng(2);
    const Scenario sc = test::small_network(3, 2);
    const auto ch = sample_channel_set(sc, rng);
    IaSolution s;
    for (int i = 0; i < 3; ++i)
    {
        s.F.push_back(rng.haar_frame(3, 1));
        s.C.push_back(rng.haar_frame(2, 1));
    }
    CHECK_THROWS_AS(interference_leakage(s, ch.obsH), std::invalid_argument);
    s.F.pop_back();
    CHECK_THROWS_AS(interference_leakage(s, ch.obsH), std::invalid_argument);
}

TEST_CASE("verify_ia on converged and random solutions", "[ia_solver]")
{
    const Scenario sc = test::small_network(3, 2);
    const auto inst = test::ia_instance(sc, 5, 0);
    REQUIRE(inst);
    const auto rep = verify_ia(inst->sol, inst->ch.obsH, 1e-8);
    CHECK(rep.aligned);
    CHECK(rep.full_rank);
    CHECK(rep.ok());

    Rng rng(11);
    IaSolution random = inst->sol;
    for (auto &C : random.C)
        C = rng.haar_frame(2, 1);
    CHECK_FALSE(verify_ia(random, inst->ch.obsH, 1e-8).aligned);
}

TEST_CASE("converged solutions keep the desired signal full rank", "[ia_solver][property]")
{
    const Scenario sc = test::small_network(3, 2);
    int total = 0, good = 0;
    for (int r = 0; r < 200; ++r)
    {
        const auto inst = test::ia_instance(sc, 31, r);
        if (!inst)
            continue;
        ++total;
        good += verify_ia(inst->sol, inst->ch.obsH, 1e-8).min_rank_margin > 1e-3;
    }
    REQUIRE(total >= 198);
    CHECK(good >= 0.99 * total);
}
