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

#include "iasim/config.hpp"
#include "iasim/experiments.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace iasim;
namespace fs = std::filesystem;
using Catch::Approx;

namespace
{
fs::path scratch(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("iasim_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct CliResult
{
    int status;
    std::string out;
};

CliResult run_cli(const std::string &args, const fs::path &dir)
{
    const fs::path log = dir / "cli.log";
    const std::string cmd = std::string("\"") + IASIM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(log)};
}

RunConfig small_config(std::int64_t trials = 300)
{
    return parse_config_string("K = 3\nNt = 2\nNr = 2\nalpha = 0.3,0\nbeta = 0.05\n"
                               "gammaO_dB = 0,10,20\ntrials = " +
                               std::to_string(trials) + "\nseed = 11\n");
}
} // namespace

TEST_CASE("config parsing", "[expcli]")
{
    const auto cfg = parse_config_string("# comment\nK = 5\nNt = 3\nNr = 3   # trailing\nalpha = 0.8193,0.1101\n"
                                         "beta = 0.1\ngammaO_dB = 0, 20\ntrials = 10\nseed = 4\n"
                                         "sinr_model = realized\nmodulation = qpsk\n");
    CHECK(cfg.scenario.K == 5);
    CHECK(cfg.scenario.d == std::vector<int>(5, 1));
    CHECK(cfg.scenario.alpha == cd(0.8193, 0.1101));
    CHECK(cfg.scenario.gamma_dB == std::vector<double>{0.0, 20.0});
    CHECK(cfg.model == SinrModel::RealizedError);
    CHECK(cfg.modulation == "qpsk");

    const auto again = parse_config_string(format_config(cfg));
    CHECK(again.scenario.alpha == cfg.scenario.alpha);
    CHECK(again.scenario.beta == cfg.scenario.beta);
    CHECK(again.scenario.seed == cfg.scenario.seed);
    CHECK(again.model == cfg.model);
}

TEST_CASE("config errors", "[expcli]")
{
    CHECK_THROWS_AS(parse_config_string("K = 3\nK = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("antennas = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("K = three\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("alpha = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("alpha = 1.0,0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("beta = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("K = 3\nd = 1,1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("sinr_model = average\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("just text\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/iasim.cfg"), std::runtime_error);
}

TEST_CASE("results do not depend on the thread count", "[expcli][property]")
{
    Scenario sc = small_config(200).scenario;
    IaRunOptions one, many;
    one.threads = 1;
    many.threads = 4;
    one.betas = many.betas = {0.0, 0.1};
    const auto a = run_ia(sc, one);
    const auto b = run_ia(sc, many);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k)
        CHECK(a.samples[k].cells() == b.samples[k].cells());
    CHECK(a.counters.accepted == b.counters.accepted);
    CHECK(a.calI_mean == b.calI_mean);
}

TEST_CASE("identical seeds give byte-identical tables", "[expcli][property]")
{
    const auto cfg = small_config();
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    RunOptions o1, o2;
    o1.threads = 1;
    o2.threads = 3;
    cmd_simulate(cfg, d1, o1);
    cmd_simulate(cfg, d2, o2);
    for (const char *f : {"sim_streams.csv", "sim_sum_rate.csv"})
    {
        INFO(f);
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    RunOptions o3;
    o3.seed = 12;
    const auto d3 = scratch("det3");
    cmd_simulate(cfg, d3, o3);
    CHECK(slurp(d1 / "sim_streams.csv") != slurp(d3 / "sim_streams.csv"));
}

TEST_CASE("CSV schema validation", "[expcli]")
{
    CsvTable t(schema("sim_sum_rate"));
    t.add_row({0.0, 10.0, 1.0, 1.0, 2.0});
    CHECK_NOTHROW(t.validate());
    t.add_row({0.0, 10.0});
    CHECK_THROWS_AS(t.validate(), SchemaError);

    CsvSchema renamed = schema("sim_sum_rate");
    renamed.columns[2] = "sumrate";
    CHECK_THROWS_AS(CsvTable(renamed).validate(), SchemaError);
    CHECK_THROWS_AS(schema("no_such_table"), SchemaError);

    const auto dir = scratch("schema");
    {
        std::ofstream f(dir / "bad.csv");
        f << "beta,gammaO_dB,sumrate,analytic_sum_rate,analytic_cap\n";
    }
    CHECK_THROWS_AS(check_csv_header(dir / "bad.csv", "sim_sum_rate"), SchemaError);
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("manifest records the run", "[expcli]")
{
    const auto dir = scratch("manifest");
    const auto m = cmd_simulate(small_config(), dir);
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j["command"] == "simulate");
    CHECK(j["scenario"]["K"] == 3);
    CHECK(j["scenario"]["seed"] == 11);
    CHECK(j["sinrModel"] == "expected");
    CHECK(j["trials"] == 300);
    CHECK(j.contains("discardCount"));
    CHECK(j.contains("wallTime"));
    CHECK(j["build"] == build_id());
    REQUIRE(j["outputs"].size() == 2);
    for (const auto &o : j["outputs"])
    {
        check_csv_header(dir / o["file"].get<std::string>(), o["schema"].get<std::string>());
        CHECK(o["rows"].get<int>() > 0);
    }
    CHECK(m.discard_rate() < 1e-3);
}

TEST_CASE("perfect-CSI sum rate matches the analytic value", "[expcli]")
{
    auto cfg = small_config(3000);
    cfg.scenario.alpha = cd(0.0, 0.0);
    cfg.scenario.beta = 0.0;
    const auto dir = scratch("sumrate");
    cmd_simulate(cfg, dir);
    std::istringstream csv(slurp(dir / "sim_sum_rate.csv"));
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    while (std::getline(csv, line))
    {
        std::vector<double> v;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            v.push_back(std::stod(cell));
        INFO(line);
        CHECK(v[2] == Approx(v[3]).epsilon(0.03));
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("analytic and compare commands", "[expcli]")
{
    const auto dir = scratch("analytic");
    const auto m = cmd_analytic(small_config(), dir);
    CHECK(m.trials == 0);
    check_csv_header(dir / "analytic_streams.csv", "analytic_streams");
    check_csv_header(dir / "analytic_pdf.csv", "analytic_pdf");
    check_csv_header(dir / "analytic_ratio.csv", "analytic_ratio");

    const auto cdir = scratch("compare");
    cmd_compare(small_config(1200), cdir);
    check_csv_header(cdir / "compare_fit.csv", "compare_fit");
    CHECK(fs::exists(cdir / "compare_summary.json"));
}

TEST_CASE("infeasible scenarios are refused", "[expcli]")
{
    auto cfg = parse_config_string("K = 4\nNt = 2\nNr = 2\ntrials = 10\n");
    const auto dir = scratch("infeasible");
    CHECK_THROWS_WITH(cmd_simulate(cfg, dir), Catch::Matchers::ContainsSubstring("infeasible"));
}

TEST_CASE("command-line driver", "[expcli]")
{
    const auto dir = scratch("cli");
    SECTION("list-presets")
    {
        const auto r = run_cli("list-presets", dir);
        CHECK(r.status == 0);
        for (const char *p : {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"})
            CHECK(r.out.find(p) != std::string::npos);
    }
    SECTION("invalid config")
    {
        {
            std::ofstream f(dir / "bad.cfg");
            f << "K = 3\nbogus = 1\n";
        }
        const auto r = run_cli("simulate --config \"" + (dir / "bad.cfg").string() + "\" --out \"" +
                                   (dir / "o").string() + "\"",
                               dir);
        CHECK(r.status != 0);
        CHECK(r.out.find("bogus") != std::string::npos);
    }
    SECTION("infeasible config")
    {
        {
            std::ofstream f(dir / "inf.cfg");
            f << "K = 4\nNt = 2\nNr = 2\n";
        }
        const auto r = run_cli("simulate --config \"" + (dir / "inf.cfg").string() + "\" --out \"" +
                                   (dir / "o").string() + "\"",
                               dir);
        CHECK(r.status != 0);
        CHECK(r.out.find("infeasible") != std::string::npos);
    }
    SECTION("missing scenario source")
    {
        const auto r = run_cli("simulate", dir);
        CHECK(r.status != 0);
    }
    SECTION("theoretical ratio preset")
    {
        const auto r = run_cli("analytic --preset fig6 --out \"" + (dir / "fig6").string() + "\"", dir);
        CHECK(r.status == 0);
        check_csv_header(dir / "fig6" / "fig6_ratio.csv", "ratio_grid");
        check_csv_header(dir / "fig6" / "fig6_contour.csv", "unity_contour");
        const auto j = nlohmann::json::parse(slurp(dir / "fig6" / "manifest.json"));
        CHECK(j["preset"] == "fig6");
    }
    SECTION("simulate with overrides")
    {
        {
            std::ofstream f(dir / "ok.cfg");
            f << "K = 3\nNt = 2\nNr = 2\ngammaO_dB = 10\ntrials = 50\n";
        }
        const auto r = run_cli("simulate --config \"" + (dir / "ok.cfg").string() + "\" --out \"" +
                                   (dir / "ok").string() + "\" --trials 40 --seed 3 --threads 2 --sinr-model realized",
                               dir);
        CHECK(r.status == 0);
        const auto j = nlohmann::json::parse(slurp(dir / "ok" / "manifest.json"));
        CHECK(j["trials"] == 40);
        CHECK(j["scenario"]["seed"] == 3);
        CHECK(j["sinrModel"] == "realized");
    }
}
