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

// Experiment driver: iasim <simulate|analytic|compare|list-presets> [options]

#include "iasim/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

struct CommonArgs
{
    std::string config;
    std::string out = "out";
    std::string preset;
    std::string sinr_model;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool seed_set = false;
};

iasim::RunOptions run_options(const CommonArgs &a)
{
    iasim::RunOptions opt;
    opt.threads = a.threads;
    if (a.trials > 0)
        opt.trials = a.trials;
    if (a.seed_set)
        opt.seed = a.seed;
    if (!a.sinr_model.empty())
        opt.model = iasim::sinr_model_from_string(a.sinr_model);
    return opt;
}

void report(const iasim::RunManifest &m, const std::string &out)
{
    std::cout << "wrote " << m.outputs.size() << " table(s) to " << out << " in " << m.wall_time << " s";
    if (m.trials > 0)
        std::cout << "; discarded " << m.discard_count << " of " << m.trials << " trials";
    std::cout << "\n";
    if (m.discard_rate() >= 1e-3)
        std::cerr << "warning: discard rate " << m.discard_rate() << " exceeds 0.1%\n";
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"iasim: interference alignment link-level simulator and analytic SINR toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", iasim::build_id());

    CommonArgs sim, ana, cmp;
    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo sweep: per-stream SINR statistics and sum rates");
    auto *analytic = app.add_subcommand("analytic", "closed-form means, pdfs, sum rates, SER and SM/IA ratio");
    auto *compare = app.add_subcommand("compare", "analytic vs Monte-Carlo comparison and figure data");
    auto *list = app.add_subcommand("list-presets", "list figure presets");
    for (auto [cmd, args] : {std::pair{simulate, &sim}, std::pair{analytic, &ana}, std::pair{compare, &cmp}})
    {
        cmd->add_option("--config", args->config, "scenario file (key = value)")->check(CLI::ExistingFile);
        cmd->add_option("--out", args->out, "output directory")->capture_default_str();
        cmd->add_option("--preset", args->preset, "figure preset")
            ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}));
        cmd->add_option("--trials", args->trials, "override the Monte-Carlo trial count")->check(CLI::PositiveNumber);
        CommonArgs *target = args;
        cmd->add_option_function<std::uint64_t>(
            "--seed",
            [target](const std::uint64_t &s) {
                target->seed = s;
                target->seed_set = true;
            },
            "override the master seed");
        cmd->add_option("--threads", args->threads, "worker threads (0 = hardware concurrency)");
        cmd->add_option("--sinr-model", args->sinr_model, "imperfect-CSI SINR model (expected|realized)")
            ->check(CLI::IsMember({"expected", "realized"}));
    }

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (list->parsed())
        {
            for (const auto &p : iasim::presets())
                std::cout << p.name << "  " << p.description << "\n";
            return 0;
        }

        auto dispatch = [](const CommonArgs &a, auto &&generic) -> int {
            const auto opt = run_options(a);
            if (!a.preset.empty() && !a.config.empty())
                throw CLI::ValidationError("--preset and --config are mutually exclusive");
            iasim::RunManifest m;
            if (!a.preset.empty())
                m = iasim::find_preset(a.preset).run(a.out, opt);
            else if (!a.config.empty())
                m = generic(iasim::load_config(a.config), a.out, opt);
            else
                throw CLI::ValidationError("one of --config or --preset is required");
            report(m, a.out);
            return 0;
        };

        if (simulate->parsed())
            return dispatch(sim, [](const iasim::RunConfig &c, const std::string &o, const iasim::RunOptions &r) {
                return iasim::cmd_simulate(c, o, r);
            });
        if (analytic->parsed())
            return dispatch(ana, [](const iasim::RunConfig &c, const std::string &o, const iasim::RunOptions &r) {
                return iasim::cmd_analytic(c, o, r);
            });
        if (compare->parsed())
            return dispatch(cmp, [](const iasim::RunConfig &c, const std::string &o, const iasim::RunOptions &r) {
                return iasim::cmd_compare(c, o, r);
            });
    }
    catch (const CLI::Error &e)
    {
        return app.exit(e);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
