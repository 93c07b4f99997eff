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

#ifndef IASIM_EXPERIMENTS_HPP
#define IASIM_EXPERIMENTS_HPP

#include "iasim/analytic.hpp"
#include "iasim/config.hpp"
#include "iasim/metrics.hpp"
#include "iasim/simulation.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef IASIM_BUILD_ID
#define IASIM_BUILD_ID "unknown"
#endif

namespace iasim
{

inline std::string build_id() { return IASIM_BUILD_ID; }

// ---------------------------------------------------------------------------
// Versioned CSV output
// ---------------------------------------------------------------------------

struct CsvSchema
{
    std::string name;
    int version = 1;
    std::vector<std::string> columns;
};

class SchemaError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Every table the driver can emit. Column meanings are listed in the README.
inline const std::map<std::string, CsvSchema> &csv_schemas()
{
    static const std::map<std::string, CsvSchema> table = [] {
        std::map<std::string, CsvSchema> m;
        auto add = [&m](CsvSchema s) { m.emplace(s.name, std::move(s)); };
        add({"sim_streams", 1,
             {"beta", "gammaO_dB", "user", "stream", "samples", "mean_sinr", "rate", "ser", "analytic_mean",
              "analytic_rate", "analytic_ser"}});
        add({"sim_sum_rate", 1, {"beta", "gammaO_dB", "sum_rate", "analytic_sum_rate", "analytic_cap"}});
        add({"analytic_streams", 1,
             {"gammaO_dB", "user", "stream", "sigma2", "sigma2_lower", "sigma2_upper", "calI", "mean", "mean_cap",
              "rate", "ser"}});
        add({"analytic_pdf", 1, {"gammaO_dB", "user", "stream", "sinr", "pdf"}});
        add({"analytic_ratio", 1, {"gammaO_dB", "sm_stream", "sm_mean", "ia_mean", "ratio"}});
        add({"compare_fit", 1,
             {"gammaO_dB", "user", "stream", "samples", "mean_empirical", "mean_analytic", "kld", "ks"}});
        add({"fig2_rtilde", 1,
             {"K", "N", "alpha", "samples", "sigma2_mc", "sigma2_approx", "sigma2_lower", "sigma2_upper",
              "rel_error", "calI_mc", "calI_approx"}});
        add({"fig3_kld", 1,
             {"spacing", "alpha_re", "alpha_im", "alpha_abs", "beta", "gammaO_dB", "samples", "mean_empirical",
              "mean_analytic", "kld", "ks"}});
        add({"fig4_sum_rate", 1, {"beta", "gammaO_dB", "sum_rate_mc", "sum_rate_analytic", "sum_rate_cap"}});
        add({"fig5_sum_rate", 1, {"scheme", "alpha", "beta", "gammaO_dB", "sum_rate_mc", "sum_rate_analytic"}});
        add({"ratio_grid", 1, {"gammaO_dB", "alpha", "beta", "ratio"}});
        add({"unity_contour", 1, {"gammaO_dB", "polyline", "vertex", "alpha", "beta"}});
        return m;
    }();
    return table;
}

inline const CsvSchema &schema(const std::string &name)
{
    auto it = csv_schemas().find(name);
    if (it == csv_schemas().end())
        throw SchemaError("unknown CSV schema '" + name + "'");
    return it->second;
}

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class CsvTable
{
public:
    explicit CsvTable(const CsvSchema &s) : schema_(s) {}

    struct Cell
    {
        std::string text;
        Cell(double v) : text(format_number(v)) {}
        Cell(int v) : text(std::to_string(v)) {}
        Cell(long v) : text(std::to_string(v)) {}
        Cell(long long v) : text(std::to_string(v)) {}
        Cell(std::size_t v) : text(std::to_string(v)) {}
        Cell(const char *v) : text(v) {}
        Cell(std::string v) : text(std::move(v)) {}
    };

    void add_row(std::initializer_list<Cell> cells)
    {
        std::vector<std::string> row;
        for (const auto &c : cells)
            row.push_back(c.text);
        rows_.push_back(std::move(row));
    }

    const CsvSchema &schema() const { return schema_; }
    std::size_t size() const { return rows_.size(); }
    const std::vector<std::vector<std::string>> &rows() const { return rows_; }

    // Checks the table against the registered schema of the same name.
    void validate() const
    {
        const auto &reg = iasim::schema(schema_.name);
        if (reg.version != schema_.version || reg.columns != schema_.columns)
            throw SchemaError("table '" + schema_.name + "' does not match its registered schema");
        for (std::size_t r = 0; r < rows_.size(); ++r)
        {
            if (rows_[r].size() != schema_.columns.size())
                throw SchemaError("table '" + schema_.name + "' row " + std::to_string(r) + " has " +
                                  std::to_string(rows_[r].size()) + " fields, expected " +
                                  std::to_string(schema_.columns.size()));
            for (const auto &f : rows_[r])
                if (f.find_first_of(",\n\"") != std::string::npos)
                    throw SchemaError("table '" + schema_.name + "': field needs quoting: " + f);
        }
    }

    std::string str() const
    {
        std::string out;
        for (std::size_t c = 0; c < schema_.columns.size(); ++c)
            out += (c ? "," : "") + schema_.columns[c];
        out += "\n";
        for (const auto &row : rows_)
        {
            for (std::size_t c = 0; c < row.size(); ++c)
                out += (c ? "," : "") + row[c];
            out += "\n";
        }
        return out;
    }

    void write(const std::filesystem::path &path) const
    {
        validate();
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        f << str();
    }

private:
    CsvSchema schema_;
    std::vector<std::vector<std::string>> rows_;
};

// Reads a CSV header and checks it against a registered schema.
inline void check_csv_header(const std::filesystem::path &path, const std::string &schema_name)
{
    std::ifstream f(path);
    std::string header;
    if (!f || !std::getline(f, header))
        throw SchemaError("cannot read header of '" + path.string() + "'");
    const auto &s = schema(schema_name);
    std::string expected;
    for (std::size_t c = 0; c < s.columns.size(); ++c)
        expected += (c ? "," : "") + s.columns[c];
    if (header != expected)
        throw SchemaError("'" + path.string() + "' header does not match schema " + schema_name + " v" +
                          std::to_string(s.version));
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct OutputFile
{
    std::string file;
    std::string schema;
    int version = 1;
    std::size_t rows = 0;
};

struct RunManifest
{
    std::string command;
    std::string preset;
    Scenario scenario;
    SinrModel model = SinrModel::ExpectedError;
    std::string build = build_id();
    std::int64_t trials = 0; // total attempted Monte-Carlo trials
    std::int64_t discard_count = 0;
    double wall_time = 0.0;
    std::vector<OutputFile> outputs;
    nlohmann::json summary = nlohmann::json::object();

    double discard_rate() const { return trials ? static_cast<double>(discard_count) / trials : 0.0; }

    nlohmann::json to_json() const
    {
        nlohmann::json sc = {{"K", scenario.K},
                             {"Nt", scenario.Nt},
                             {"Nr", scenario.Nr},
                             {"d", scenario.d},
                             {"alpha", {scenario.alpha.real(), scenario.alpha.imag()}},
                             {"beta", scenario.beta},
                             {"gammaO_dB", scenario.gamma_dB},
                             {"trials", scenario.trials},
                             {"seed", scenario.seed}};
        nlohmann::json outs = nlohmann::json::array();
        for (const auto &o : outputs)
            outs.push_back({{"file", o.file}, {"schema", o.schema}, {"version", o.version}, {"rows", o.rows}});
        return {{"command", command},
                {"preset", preset},
                {"scenario", sc},
                {"sinrModel", to_string(model)},
                {"build", build},
                {"trials", trials},
                {"discardCount", discard_count},
                {"discardRate", discard_rate()},
                {"wallTime", wall_time},
                {"outputs", outs},
                {"summary", summary}};
    }
};

struct RunOptions
{
    unsigned threads = 0;
    std::optional<std::int64_t> trials; // overrides scenario / preset trial counts
    std::optional<std::uint64_t> seed;
    std::optional<SinrModel> model;
};

// Collects tables for one command invocation and writes them with a manifest.
class OutputSet
{
public:
    OutputSet(std::filesystem::path dir, RunManifest manifest) : dir_(std::move(dir)), manifest_(std::move(manifest))
    {
        start_ = std::chrono::steady_clock::now();
    }

    RunManifest &manifest() { return manifest_; }

    void add(const std::string &file, const CsvTable &table)
    {
        table.validate();
        tables_.emplace_back(file, table);
    }

    void count(const RunCounters &c)
    {
        manifest_.trials += c.trials;
        manifest_.discard_count += c.discarded();
    }

    RunManifest finish()
    {
        std::filesystem::create_directories(dir_);
        for (const auto &[file, table] : tables_)
        {
            table.write(dir_ / file);
            manifest_.outputs.push_back({file, table.schema().name, table.schema().version, table.size()});
        }
        manifest_.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ofstream f(dir_ / "manifest.json", std::ios::binary);
        f << manifest_.to_json().dump(2) << "\n";
        return manifest_;
    }

private:
    std::filesystem::path dir_;
    RunManifest manifest_;
    std::vector<std::pair<std::string, CsvTable>> tables_;
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Analytic laws for a scenario
// ---------------------------------------------------------------------------

struct IaAnalytic
{
    CorrelationMatrix Rt;
    std::vector<RtildeApprox> rtilde;
    double calI = 0.0;

    ExpDist law(int user, int stream, double beta, double gammaO, int d) const
    {
        return pdf_ci(gammaO, d, beta, rtilde[user].sigma2(stream), calI);
    }
    double cap(int user, int stream, double beta, int d) const
    {
        return mean_ci_limit(d, beta, rtilde[user].sigma2(stream), calI);
    }
};

inline IaAnalytic ia_analytic(const Scenario &sc)
{
    IaAnalytic a{exp_correlation_matrix(sc.alpha, sc.Nt), {}, 0.0};
    a.rtilde = approx_Rtilde_all(a.Rt, sc.K, sc.d);
    a.calI = calI(a.Rt, sc.K, sc.d, a.rtilde);
    return a;
}

inline double sample_mean(const std::vector<double> &v)
{
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_rate(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v)
        s += std::log2(1.0 + x);
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

inline double sample_ser(const std::vector<double> &v, const ModulationModel &mod)
{
    double s = 0.0;
    for (double x : v)
        s += mod.awgn_ser(x);
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// Empirical sum over users and streams of E{log2(1 + SINR)} at one gamma index.
inline double empirical_sum_rate(const SinrSampleSet &s, int gamma)
{
    double total = 0.0;
    for (const auto &[key, v] : s.cells())
        if (key.gamma == gamma)
            total += sample_rate(v);
    return total;
}

inline double analytic_sum_rate(const Scenario &sc, const IaAnalytic &a, double beta, double gammaO)
{
    double total = 0.0;
    for (int i = 0; i < sc.K; ++i)
        for (int n = 0; n < sc.d[i]; ++n)
            total += expected_rate(a.law(i, n, beta, gammaO, sc.d[i]));
    return total;
}

inline double analytic_sum_rate_cap(const Scenario &sc, const IaAnalytic &a, double beta)
{
    if (!(beta > 0.0))
        return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int i = 0; i < sc.K; ++i)
        for (int n = 0; n < sc.d[i]; ++n)
            total += expected_rate(ExpDist(a.cap(i, n, beta, sc.d[i])));
    return total;
}

inline Scenario apply_options(Scenario sc, const RunOptions &opt)
{
    if (opt.trials)
        sc.trials = *opt.trials;
    if (opt.seed)
        sc.seed = *opt.seed;
    return sc;
}

// ---------------------------------------------------------------------------
// Generic commands
// ---------------------------------------------------------------------------

inline void require_feasible(const Scenario &sc)
{
    const auto rep = check_feasibility(sc.K, sc.Nt, sc.Nr, sc.d);
    if (!rep.feasible)
        throw std::invalid_argument("infeasible scenario: " + rep.reason);
}

inline RunManifest cmd_simulate(const RunConfig &cfg_in, const std::filesystem::path &out, const RunOptions &opt = {},
                                std::vector<double> betas = {})
{
    RunConfig cfg = cfg_in;
    cfg.scenario = apply_options(cfg.scenario, opt);
    if (opt.model)
        cfg.model = *opt.model;
    const auto &sc = cfg.scenario;
    sc.validate();
    require_feasible(sc);
    if (betas.empty())
        betas = {sc.beta};

    OutputSet outs(out, {"simulate", "", sc, cfg.model});
    IaRunOptions ro;
    ro.model = cfg.model;
    ro.threads = opt.threads;
    ro.betas = betas;
    const auto run = run_ia(sc, ro);
    outs.count(run.counters);

    const auto a = ia_analytic(sc);
    const auto mod = modulation_by_name(cfg.modulation);
    CsvTable streams(schema("sim_streams")), sums(schema("sim_sum_rate"));
    for (std::size_t b = 0; b < betas.size(); ++b)
    {
        const double beta = betas[b];
        const bool analytic_ok = beta < 1.0;
        for (int g = 0; g < static_cast<int>(sc.gamma_dB.size()); ++g)
        {
            const double gammaO = db_to_linear(sc.gamma_dB[g]);
            for (int i = 0; i < sc.K; ++i)
                for (int n = 0; n < sc.d[i]; ++n)
                {
                    const auto &v = run.samples[b].contains({i, n, g}) ? run.samples[b].at({i, n, g})
                                                                       : std::vector<double>{};
                    double am = std::nan(""), ar = std::nan(""), as = std::nan("");
                    if (analytic_ok)
                    {
                        const auto law = a.law(i, n, beta, gammaO, sc.d[i]);
                        am = law.mean();
                        ar = expected_rate(law);
                        as = ser(law, mod);
                    }
                    streams.add_row({beta, sc.gamma_dB[g], i, n, v.size(), sample_mean(v), sample_rate(v),
                                     sample_ser(v, mod), am, ar, as});
                }
            sums.add_row({beta, sc.gamma_dB[g], empirical_sum_rate(run.samples[b], g),
                          analytic_ok ? analytic_sum_rate(sc, a, beta, gammaO) : std::nan(""),
                          analytic_ok ? analytic_sum_rate_cap(sc, a, beta) : std::nan("")});
        }
    }
    outs.add("sim_streams.csv", streams);
    outs.add("sim_sum_rate.csv", sums);
    return outs.finish();
}

inline RunManifest cmd_analytic(const RunConfig &cfg_in, const std::filesystem::path &out, const RunOptions &opt = {})
{
    RunConfig cfg = cfg_in;
    cfg.scenario = apply_options(cfg.scenario, opt);
    if (opt.model)
        cfg.model = *opt.model;
    const auto &sc = cfg.scenario;
    sc.validate();
    require_feasible(sc);
    if (!(sc.beta < 1.0))
        throw std::invalid_argument("analytic: beta must be < 1");

    OutputSet outs(out, {"analytic", "", sc, cfg.model});
    const auto a = ia_analytic(sc);
    const auto mod = modulation_by_name(cfg.modulation);
    CsvTable streams(schema("analytic_streams")), pdf(schema("analytic_pdf")), ratio(schema("analytic_ratio"));
    constexpr int pdf_points = 200;
    for (double gdb : sc.gamma_dB)
    {
        const double gammaO = db_to_linear(gdb);
        for (int i = 0; i < sc.K; ++i)
            for (int n = 0; n < sc.d[i]; ++n)
            {
                const auto law = a.law(i, n, sc.beta, gammaO, sc.d[i]);
                const auto &bd = a.rtilde[i].bounds[n];
                streams.add_row({gdb, i, n, a.rtilde[i].sigma2(n), bd.lower.value_or(std::nan("")),
                                 bd.upper, a.calI, law.mean(),
                                 sc.beta > 0.0 ? a.cap(i, n, sc.beta, sc.d[i])
                                               : std::numeric_limits<double>::infinity(),
                                 expected_rate(law), ser(law, mod)});
                const double top = law.quantile(0.999);
                for (int p = 0; p < pdf_points; ++p)
                {
                    const double x = top * p / (pdf_points - 1);
                    pdf.add_row({gdb, i, n, x, law.pdf(x)});
                }
            }
        // SM comparison link of the same size, only for square antenna setups with equal streams.
        const bool equal_d = std::all_of(sc.d.begin(), sc.d.end(), [&](int x) { return x == sc.d[0]; });
        if (sc.Nt == sc.Nr && equal_d)
        {
            const auto sm = pdf_sm(gammaO, sc.Nt, sc.beta, a.Rt);
            const auto ia = a.law(0, 0, sc.beta, gammaO, sc.d[0]);
            for (int n = 0; n < sc.Nt; ++n)
                ratio.add_row({gdb, n, sm[n].mean(), ia.mean(), sm[n].mean() / ia.mean()});
        }
    }
    outs.add("analytic_streams.csv", streams);
    outs.add("analytic_pdf.csv", pdf);
    if (ratio.size())
        outs.add("analytic_ratio.csv", ratio);
    return outs.finish();
}

inline RunManifest cmd_compare(const RunConfig &cfg_in, const std::filesystem::path &out, const RunOptions &opt = {})
{
    RunConfig cfg = cfg_in;
    cfg.scenario = apply_options(cfg.scenario, opt);
    if (opt.model)
        cfg.model = *opt.model;
    const auto &sc = cfg.scenario;
    sc.validate();
    require_feasible(sc);
    if (!(sc.beta < 1.0))
        throw std::invalid_argument("compare: beta must be < 1");

    OutputSet outs(out, {"compare", "", sc, cfg.model});
    IaRunOptions ro;
    ro.model = cfg.model;
    ro.threads = opt.threads;
    const auto run = run_ia(sc, ro);
    outs.count(run.counters);
    const auto a = ia_analytic(sc);

    CsvTable fit(schema("compare_fit"));
    double worst_kld = 0.0;
    for (int g = 0; g < static_cast<int>(sc.gamma_dB.size()); ++g)
        for (int i = 0; i < sc.K; ++i)
            for (int n = 0; n < sc.d[i]; ++n)
            {
                const auto &v = run.samples[0].at({i, n, g});
                const auto law = a.law(i, n, sc.beta, db_to_linear(sc.gamma_dB[g]), sc.d[i]);
                const double kld = v.size() >= kl_min_samples ? kl_divergence(v, law) : std::nan("");
                if (!std::isnan(kld))
                    worst_kld = std::max(worst_kld, kld);
                fit.add_row({sc.gamma_dB[g], i, n, v.size(), sample_mean(v), law.mean(), kld, ks_statistic(v, law)});
            }
    outs.add("compare_fit.csv", fit);
    outs.manifest().summary = {{"maxKld", worst_kld}, {"calIEmpirical", run.calI_mean}, {"calIApprox", a.calI}};
    auto m = outs.finish();
    std::ofstream(out / "compare_summary.json") << m.summary.dump(2) << "\n";
    return m;
}

// ---------------------------------------------------------------------------
// Figure presets
// ---------------------------------------------------------------------------

inline std::vector<double> linspace_step(double lo, double hi, double step)
{
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int k = 0; k <= n; ++k)
        v.push_back(lo + k * step);
    return v;
}

inline std::vector<double> default_gamma_grid() { return linspace_step(0.0, 40.0, 5.0); }

struct TableAlpha
{
    double spacing; // antenna spacing in wavelengths
    cd alpha;
};

// Suburban macro-cell correlation values for a 2-element ULA.
inline const std::vector<TableAlpha> &suburban_alpha_table()
{
    static const std::vector<TableAlpha> t = {
        {10, {-0.1743, 0.0951}}, {9, {0.2064, 0.1066}},  {8, {-0.0341, -0.2872}}, {7, {-0.2817, 0.2408}},
        {6, {0.4551, 0.1317}},   {5, {-0.1717, -0.5660}}, {4, {-0.4616, 0.5439}}, {3, {0.8193, 0.1101}}};
    return t;
}

inline Scenario network(int K, int N, std::int64_t trials, std::uint64_t seed)
{
    Scenario sc;
    sc.K = K;
    sc.Nt = sc.Nr = N;
    sc.d.assign(K, 1);
    sc.trials = trials;
    sc.seed = seed;
    return sc;
}

// Relative approximation error of sigma^2 at one alpha against a Monte-Carlo run.
struct Sigma2Point
{
    double alpha = 0.0;
    double mc = 0.0;
    double approx = 0.0;
    Sigma2Bounds bounds;
    double calI_mc = 0.0;
    double calI_approx = 0.0;
    std::int64_t samples = 0;
    RunCounters counters;
    double rel_error() const { return (approx - mc) / mc; }
};

inline Sigma2Point sigma2_point(int K, int N, double alpha, std::int64_t trials, std::uint64_t seed, unsigned threads)
{
    Scenario sc = network(K, N, trials, seed);
    sc.alpha = cd(alpha, 0.0);
    sc.gamma_dB.clear();
    IaRunOptions ro;
    ro.threads = threads;
    const auto run = run_ia(sc, ro);
    const auto mc = empirical_sigma2(run);
    Sigma2Point p;
    p.alpha = alpha;
    for (const auto &s : mc)
        p.mc += s(0) / static_cast<double>(K);
    const auto a = ia_analytic(sc);
    p.approx = a.rtilde[0].sigma2(0);
    p.bounds = a.rtilde[0].bounds[0];
    p.calI_mc = run.calI_mean;
    p.calI_approx = a.calI;
    p.samples = run.counters.accepted;
    p.counters = run.counters;
    return p;
}

inline RunManifest preset_fig2(const std::filesystem::path &out, const RunOptions &opt)
{
    const std::int64_t trials = opt.trials.value_or(20000);
    const std::uint64_t seed = opt.seed.value_or(2);
    OutputSet outs(out, {"compare", "fig2", network(3, 2, trials, seed)});
    CsvTable t(schema("fig2_rtilde"));
    nlohmann::json worst = nlohmann::json::object();
    for (auto [K, N] : {std::pair{3, 2}, std::pair{5, 3}})
    {
        double max_err_small = 0.0;
        for (double alpha : linspace_step(0.0, 0.9, 0.05))
        {
            const auto p = sigma2_point(K, N, alpha, trials, seed, opt.threads);
            outs.count(p.counters);
            t.add_row({K, N, alpha, p.samples, p.mc, p.approx, p.bounds.lower.value_or(std::nan("")),
                       p.bounds.upper, p.rel_error(), p.calI_mc, p.calI_approx});
            if (alpha < 0.3 - 1e-12)
                max_err_small = std::max(max_err_small, std::abs(p.rel_error()));
        }
        worst[std::to_string(K) + "x" + std::to_string(N)] = max_err_small;
    }
    outs.add("fig2_rtilde.csv", t);
    outs.manifest().summary = {{"maxRelErrorAlphaBelow0.3", worst}};
    return outs.finish();
}

struct KldPoint
{
    double kld = 0.0;
    double ks = 0.0;
    double mean_empirical = 0.0;
    double mean_analytic = 0.0;
    std::size_t samples = 0;
};

// KLD of user 0, stream 0 against the imperfect-CSI law for each beta.
inline std::vector<KldPoint> kld_points(Scenario sc, const std::vector<double> &betas, SinrModel model,
                                        unsigned threads, RunCounters *counters = nullptr)
{
    IaRunOptions ro;
    ro.model = model;
    ro.threads = threads;
    ro.betas = betas;
    const auto run = run_ia(sc, ro);
    if (counters)
        *counters = run.counters;
    const auto a = ia_analytic(sc);
    std::vector<KldPoint> out;
    for (std::size_t b = 0; b < betas.size(); ++b)
        for (int g = 0; g < static_cast<int>(sc.gamma_dB.size()); ++g)
        {
            const auto &v = run.samples[b].at({0, 0, g});
            const auto law = a.law(0, 0, betas[b], db_to_linear(sc.gamma_dB[g]), sc.d[0]);
            out.push_back({kl_divergence(v, law), ks_statistic(v, law), sample_mean(v), law.mean(), v.size()});
        }
    return out; // [beta][gamma]
}

inline RunManifest preset_fig3(const std::filesystem::path &out, const RunOptions &opt)
{
    const std::int64_t trials = opt.trials.value_or(20000);
    const std::uint64_t seed = opt.seed.value_or(3);
    const SinrModel model = opt.model.value_or(SinrModel::ExpectedError);
    const std::vector<double> betas{0.01, 0.1, 0.3};
    Scenario sc = network(3, 2, trials, seed);
    sc.gamma_dB = {10.0, 20.0};
    OutputSet outs(out, {"compare", "fig3", sc, model});
    CsvTable t(schema("fig3_kld"));
    for (const auto &row : suburban_alpha_table())
    {
        sc.alpha = row.alpha;
        RunCounters c;
        const auto pts = kld_points(sc, betas, model, opt.threads, &c);
        outs.count(c);
        for (std::size_t b = 0; b < betas.size(); ++b)
            for (std::size_t g = 0; g < sc.gamma_dB.size(); ++g)
            {
                const auto &p = pts[b * sc.gamma_dB.size() + g];
                t.add_row({row.spacing, row.alpha.real(), row.alpha.imag(), std::abs(row.alpha), betas[b],
                           sc.gamma_dB[g], p.samples, p.mean_empirical, p.mean_analytic, p.kld, p.ks});
            }
    }
    outs.add("fig3_kld.csv", t);
    return outs.finish();
}

inline RunManifest preset_fig4(const std::filesystem::path &out, const RunOptions &opt)
{
    const std::int64_t trials = opt.trials.value_or(20000);
    const std::uint64_t seed = opt.seed.value_or(4);
    const SinrModel model = opt.model.value_or(SinrModel::ExpectedError);
    const std::vector<double> betas{0.0, 0.01, 0.05, 0.15};
    Scenario sc = network(4, 3, trials, seed);
    sc.gamma_dB = default_gamma_grid();
    OutputSet outs(out, {"simulate", "fig4", sc, model});
    IaRunOptions ro;
    ro.model = model;
    ro.threads = opt.threads;
    ro.betas = betas;
    const auto run = run_ia(sc, ro);
    outs.count(run.counters);
    const auto a = ia_analytic(sc);
    CsvTable t(schema("fig4_sum_rate"));
    for (std::size_t b = 0; b < betas.size(); ++b)
        for (int g = 0; g < static_cast<int>(sc.gamma_dB.size()); ++g)
            t.add_row({betas[b], sc.gamma_dB[g], empirical_sum_rate(run.samples[b], g),
                       analytic_sum_rate(sc, a, betas[b], db_to_linear(sc.gamma_dB[g])),
                       betas[b] > 0.0 ? analytic_sum_rate_cap(sc, a, betas[b]) : std::nan("")});
    outs.add("fig4_sum_rate.csv", t);
    return outs.finish();
}

// Beamforming sum rate from Monte-Carlo largest-eigenvalue draws and the
// moment-based nu: E{log2(1 + (1 - beta^2) lambda / (beta^2 nu + 1/gamma_o))}.
inline double bf_analytic_rate(const std::vector<double> &lambda, double nu, double beta, double gammaO)
{
    double s = 0.0;
    for (double l : lambda)
        s += std::log2(1.0 + (1.0 - beta * beta) * l / (beta * beta * nu + 1.0 / gammaO));
    return s / static_cast<double>(lambda.size());
}

inline RunManifest preset_fig5(const std::filesystem::path &out, const RunOptions &opt)
{
    const std::int64_t trials = opt.trials.value_or(20000);
    const std::uint64_t seed = opt.seed.value_or(5);
    const SinrModel model = opt.model.value_or(SinrModel::ExpectedError);
    constexpr double beta = 0.19;
    Scenario sc = network(3, 2, trials, seed);
    sc.beta = beta;
    sc.gamma_dB = default_gamma_grid();
    OutputSet outs(out, {"compare", "fig5", sc, model});
    CsvTable t(schema("fig5_sum_rate"));
    for (double alpha : {0.0, 0.3, 0.6, 0.9})
    {
        sc.alpha = cd(alpha, 0.0);
        IaRunOptions ro;
        ro.model = model;
        ro.threads = opt.threads;
        const auto ia = run_ia(sc, ro);
        outs.count(ia.counters);
        LinkRunOptions lo;
        lo.model = model;
        lo.threads = opt.threads;
        const auto bf = run_link(sc, LinkScheme::Beamforming, lo);
        outs.count(bf.counters);
        const auto a = ia_analytic(sc);
        const auto Rt = exp_correlation_matrix(sc.alpha, sc.Nt);
        Rng aux = Rng::substream(sc.seed, streams::auxiliary, static_cast<std::uint64_t>(alpha * 1000));
        const auto lambda = largest_eigenvalue_samples(Rt, sc.Nr, static_cast<std::size_t>(trials), aux);
        const double nu = bf_mean_nu(Rt, sc.Nt);
        for (int g = 0; g < static_cast<int>(sc.gamma_dB.size()); ++g)
        {
            const double gammaO = db_to_linear(sc.gamma_dB[g]);
            t.add_row({"ia", alpha, beta, sc.gamma_dB[g], empirical_sum_rate(ia.samples[0], g),
                       analytic_sum_rate(sc, a, beta, gammaO)});
            t.add_row({"bf", alpha, beta, sc.gamma_dB[g], empirical_sum_rate(bf.samples[0], g),
                       bf_analytic_rate(lambda, nu, beta, gammaO)});
        }
    }
    outs.add("fig5_sum_rate.csv", t);
    return outs.finish();
}

// Contour comparison grid shared by the theoretical and numerical ratio presets.
struct ContourGrid
{
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> gamma_dB{10.0, 20.0, 30.0};
};

inline ContourGrid theoretical_contour_grid() { return {linspace_step(0.0, 0.9, 0.01), linspace_step(0.0, 0.5, 0.005)}; }
inline ContourGrid numerical_contour_grid() { return {linspace_step(0.0, 0.9, 0.05), linspace_step(0.0, 0.5, 0.01)}; }

inline void add_contours(CsvTable &t, double gdb, const std::vector<Polyline> &lines)
{
    for (std::size_t l = 0; l < lines.size(); ++l)
        for (std::size_t v = 0; v < lines[l].size(); ++v)
            t.add_row({gdb, l, v, lines[l][v].alpha, lines[l][v].beta});
}

// Reference point where the contours are reported to meet.
inline constexpr double contour_ref_alpha = 0.58;
inline constexpr double contour_ref_beta = 0.04;
inline constexpr double contour_tol_alpha = 0.1;
inline constexpr double contour_tol_beta = 0.02;

inline RunManifest preset_fig6(const std::filesystem::path &out, const RunOptions &opt)
{
    const auto grid = theoretical_contour_grid();
    Scenario sc = network(3, 2, 0, 0);
    sc.trials = 1;
    sc.gamma_dB = grid.gamma_dB;
    OutputSet outs(out, {"analytic", "fig6", sc});
    CsvTable surface(schema("ratio_grid")), contour(schema("unity_contour"));
    nlohmann::json dist = nlohmann::json::object();
    for (double gdb : grid.gamma_dB)
    {
        const auto g = theoretical_ratio_grid(grid.alphas, grid.betas, db_to_linear(gdb), 3, 2, 1);
        for (std::size_t a = 0; a < grid.alphas.size(); ++a)
            for (std::size_t b = 0; b < grid.betas.size(); ++b)
                surface.add_row({gdb, grid.alphas[a], grid.betas[b], g.values(a, b)});
        const auto lines = level_contour(g, 1.0);
        add_contours(contour, gdb, lines);
        dist[format_number(gdb)] =
            contour_distance(lines, contour_ref_alpha, contour_ref_beta, contour_tol_alpha, contour_tol_beta);
    }
    outs.add("fig6_ratio.csv", surface);
    outs.add("fig6_contour.csv", contour);
    outs.manifest().summary = {{"scaledDistanceToReference", dist}};
    return outs.finish();
}

// Empirical SM / IA mean-SINR ratio surfaces, one per gamma_o.
inline std::vector<RatioGrid> numerical_ratio_grids(const ContourGrid &grid, std::int64_t trials, std::uint64_t seed,
                                                    SinrModel model, unsigned threads, RunCounters *total = nullptr)
{
    std::vector<RatioGrid> out;
    for (std::size_t g = 0; g < grid.gamma_dB.size(); ++g)
        out.push_back({grid.alphas, grid.betas, RealMatrix(grid.alphas.size(), grid.betas.size())});
    for (std::size_t a = 0; a < grid.alphas.size(); ++a)
    {
        Scenario sc = network(3, 2, trials, seed);
        sc.alpha = cd(grid.alphas[a], 0.0);
        sc.gamma_dB = grid.gamma_dB;
        IaRunOptions ro;
        ro.model = model;
        ro.threads = threads;
        ro.betas = grid.betas;
        const auto ia = run_ia(sc, ro);
        LinkRunOptions lo;
        lo.model = model;
        lo.threads = threads;
        lo.betas = grid.betas;
        const auto sm = run_link(sc, LinkScheme::SpatialMux, lo);
        if (total)
        {
            total->trials += ia.counters.trials + sm.counters.trials;
            total->degenerate += ia.counters.degenerate + sm.counters.degenerate;
            total->unconverged += ia.counters.unconverged;
            total->accepted += ia.counters.accepted + sm.counters.accepted;
        }
        for (std::size_t b = 0; b < grid.betas.size(); ++b)
            for (std::size_t g = 0; g < grid.gamma_dB.size(); ++g)
            {
                const double ia_mean = sample_mean(ia.samples[b].pooled(static_cast<int>(g)));
                const double sm_mean = sample_mean(sm.samples[b].at({0, 0, static_cast<int>(g)}));
                out[g].values(a, b) = sm_mean / ia_mean;
            }
    }
    return out;
}

inline RunManifest preset_fig7(const std::filesystem::path &out, const RunOptions &opt)
{
    const auto grid = numerical_contour_grid();
    const std::int64_t trials = opt.trials.value_or(20000);
    const std::uint64_t seed = opt.seed.value_or(7);
    const SinrModel model = opt.model.value_or(SinrModel::ExpectedError);
    Scenario sc = network(3, 2, trials, seed);
    sc.gamma_dB = grid.gamma_dB;
    OutputSet outs(out, {"compare", "fig7", sc, model});
    RunCounters total;
    const auto grids = numerical_ratio_grids(grid, trials, seed, model, opt.threads, &total);
    outs.count(total);
    CsvTable surface(schema("ratio_grid")), contour(schema("unity_contour"));
    nlohmann::json dist = nlohmann::json::object();
    for (std::size_t g = 0; g < grid.gamma_dB.size(); ++g)
    {
        for (std::size_t a = 0; a < grid.alphas.size(); ++a)
            for (std::size_t b = 0; b < grid.betas.size(); ++b)
                surface.add_row({grid.gamma_dB[g], grid.alphas[a], grid.betas[b], grids[g].values(a, b)});
        const auto lines = level_contour(grids[g], 1.0);
        add_contours(contour, grid.gamma_dB[g], lines);
        dist[format_number(grid.gamma_dB[g])] =
            contour_distance(lines, contour_ref_alpha, contour_ref_beta, contour_tol_alpha, contour_tol_beta);
    }
    outs.add("fig7_ratio.csv", surface);
    outs.add("fig7_contour.csv", contour);
    outs.manifest().summary = {{"scaledDistanceToReference", dist}};
    return outs.finish();
}

struct Preset
{
    std::string name;
    std::string description;
    std::function<RunManifest(const std::filesystem::path &, const RunOptions &)> run;
};

inline const std::vector<Preset> &presets()
{
    static const std::vector<Preset> list = {
        {"fig2", "sigma^2 vs alpha: Monte-Carlo, approximation, bounds (3-user 2x2, 5-user 3x3)", preset_fig2},
        {"fig3", "KLD vs tabulated alpha for beta {0.01, 0.1, 0.3}, gamma_o {10, 20} dB (3-user 2x2)", preset_fig3},
        {"fig4", "sum rate vs gamma_o, 4-user 3x3, alpha = 0, beta {0, 0.01, 0.05, 0.15}", preset_fig4},
        {"fig5", "IA vs beamforming sum rate, beta = 0.19, alpha {0, 0.3, 0.6, 0.9}", preset_fig5},
        {"fig6", "theoretical SM/IA mean-SINR ratio surface and unity contours", preset_fig6},
        {"fig7", "numerical SM/IA mean-SINR ratio surface and unity contours", preset_fig7},
    };
    return list;
}

inline const Preset &find_preset(const std::string &name)
{
    for (const auto &p : presets())
        if (p.name == name)
            return p;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

} // namespace iasim

#endif
