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

#ifndef IASIM_RNG_HPP
#define IASIM_RNG_HPP

#include "iasim/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace iasim
{

// Random stream used throughout the library.
//
// Substream derivation (counter based): the engine for (master, stream, index)
// is seeded with
//     s = splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
// so any trial can be regenerated in isolation, independent of thread count or
// evaluation order. `stream` separates independent uses of one master seed
// (channel draws, solver initialization, auxiliary Monte-Carlo, ...).
class Rng
{
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    static constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    static constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index)
    {
        return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
    }

    static Rng substream(std::uint64_t master, std::uint64_t stream, std::uint64_t index)
    {
        return Rng(derive_seed(master, stream, index));
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    // CN(0,1): real and imaginary parts each N(0, 1/2).
    cd complex_normal()
    {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    ComplexMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols)
    {
        ComplexMatrix out(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
                out(r, c) = complex_normal();
        return out;
    }

    // Haar-distributed n x k frame with orthonormal columns.
    ComplexMatrix haar_frame(Eigen::Index n, Eigen::Index k)
    {
        if (k == 0)
            return ComplexMatrix(n, 0);
        return linalg::orthonormalize(complex_gaussian(n, k));
    }

    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Stream identifiers for Rng::substream.
namespace streams
{
inline constexpr std::uint64_t channel = 1;
inline constexpr std::uint64_t solver = 2;
inline constexpr std::uint64_t link = 3;
inline constexpr std::uint64_t auxiliary = 4;
} // namespace streams

} // namespace iasim

#endif
