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

#ifndef IASIM_CONFIG_HPP
#define IASIM_CONFIG_HPP

#include "iasim/channel_model.hpp"
#include "iasim/link_level.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace iasim
{

// Scenario file format: one `key = value` per line, `#` starts a comment.
//
//   K         = 3            user count
//   Nt        = 2            transmit antennas
//   Nr        = 2            receive antennas
//   d         = 1,1,1        streams per user (default: 1 for every user)
//   alpha     = 0.5,0        correlation parameter as "re,im"
//   beta      = 0.1          CSI error
//   gammaO_dB = 0,5,10       transmit SNR grid in dB
//   trials    = 20000
//   seed      = 1
//   sinr_model = expected    expected | realized
//   modulation = bpsk        bpsk | qpsk
struct RunConfig
{
    Scenario scenario;
    SinrModel model = SinrModel::ExpectedError;
    std::string modulation = "bpsk";
};

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail
{
inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

template <class T>
T parse_number(const std::string &text, const std::string &key, int line)
{
    T value{};
    const char *first = text.data(), *last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty())
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "': cannot parse '" + text + "'");
    return value;
}
} // namespace detail

inline RunConfig parse_config(std::istream &in)
{
    RunConfig cfg;
    auto &sc = cfg.scenario;
    bool have_d = false;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");

        if (key == "K")
            sc.K = detail::parse_number<int>(value, key, line);
        else if (key == "Nt")
            sc.Nt = detail::parse_number<int>(value, key, line);
        else if (key == "Nr")
            sc.Nr = detail::parse_number<int>(value, key, line);
        else if (key == "d")
        {
            sc.d.clear();
            for (const auto &item : detail::split_list(value))
                sc.d.push_back(detail::parse_number<int>(item, key, line));
            have_d = true;
        }
        else if (key == "alpha")
        {
            const auto parts = detail::split_list(value);
            if (parts.size() != 2)
                throw ConfigError("line " + std::to_string(line) + ": alpha must be given as 're,im'");
            sc.alpha = cd(detail::parse_number<double>(parts[0], key, line),
                          detail::parse_number<double>(parts[1], key, line));
        }
        else if (key == "beta")
            sc.beta = detail::parse_number<double>(value, key, line);
        else if (key == "gammaO_dB")
        {
            sc.gamma_dB.clear();
            for (const auto &item : detail::split_list(value))
                sc.gamma_dB.push_back(detail::parse_number<double>(item, key, line));
        }
        else if (key == "trials")
            sc.trials = detail::parse_number<std::int64_t>(value, key, line);
        else if (key == "seed")
            sc.seed = detail::parse_number<std::uint64_t>(value, key, line);
        else if (key == "sinr_model")
        {
            try
            {
                cfg.model = sinr_model_from_string(value);
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError("line " + std::to_string(line) + ": " + e.what());
            }
        }
        else if (key == "modulation")
        {
            if (value != "bpsk" && value != "qpsk")
                throw ConfigError("line " + std::to_string(line) + ": modulation must be bpsk or qpsk");
            cfg.modulation = value;
        }
        else
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (!have_d)
        sc.d.assign(sc.K, 1);
    try
    {
        sc.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline RunConfig parse_config_string(const std::string &text)
{
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

// Inverse of parse_config; round-trips exactly.
inline std::string format_config(const RunConfig &cfg)
{
    const auto &sc = cfg.scenario;
    std::ostringstream out;
    out << std::setprecision(17);
    auto join = [&out](const auto &v) {
        for (std::size_t k = 0; k < v.size(); ++k)
            out << (k ? "," : "") << v[k];
    };
    out << "K = " << sc.K << "\nNt = " << sc.Nt << "\nNr = " << sc.Nr << "\nd = ";
    join(sc.d);
    out << "\nalpha = " << sc.alpha.real() << "," << sc.alpha.imag() << "\nbeta = " << sc.beta << "\ngammaO_dB = ";
    join(sc.gamma_dB);
    out << "\ntrials = " << sc.trials << "\nseed = " << sc.seed << "\nsinr_model = " << to_string(cfg.model)
        << "\nmodulation = " << cfg.modulation << "\n";
    return out.str();
}

} // namespace iasim

#endif
