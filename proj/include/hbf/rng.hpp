// SPDX-License-Identifier: Apache-2.0
//
// hbfsim: hybrid analog/digital beamforming from implicit CSI for mmWave MIMO-OFDM links
// Copyright (C) 2026 The hbfsim authors
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

#ifndef HBF_RNG_HPP
#define HBF_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace hbf
{
    using Rng = std::mt19937_64;

    inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // FNV-1a, for turning stream labels into numbers
    inline constexpr std::uint64_t label_hash(std::string_view s) noexcept
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : s)
        {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    // Deterministic tree of independent substreams. A child depends only on the
    // parent seed and the child key, so work can be split in any order.
    class StreamSeed
    {
    public:
        constexpr explicit StreamSeed(std::uint64_t value = 0) noexcept : value_(value) {}

        constexpr StreamSeed child(std::uint64_t key) const noexcept
        {
            return StreamSeed(splitmix64(value_ ^ splitmix64(key + 0x632BE59BD9B4E019ULL)));
        }
        constexpr StreamSeed child(std::string_view label) const noexcept { return child(label_hash(label)); }
        constexpr StreamSeed child(std::string_view label, std::uint64_t key) const noexcept { return child(label).child(key); }

        constexpr std::uint64_t value() const noexcept { return value_; }
        Rng engine() const { return Rng(splitmix64(value_)); }

    private:
        std::uint64_t value_;
    };

    // Circularly symmetric complex Gaussian with E|z|^2 = variance
    class CscgSampler
    {
    public:
        explicit CscgSampler(double variance = 1.0) : dist_(0.0, std::sqrt(0.5 * variance)) {}
        template <class Engine>
        std::complex<double> operator()(Engine &eng)
        {
            const double re = dist_(eng);
            const double im = dist_(eng);
            return {re, im};
        }

    private:
        std::normal_distribution<double> dist_;
    };
} // namespace hbf

#endif
