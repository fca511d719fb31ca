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

#ifndef HBF_CONFIG_HPP
#define HBF_CONFIG_HPP

#include "errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace hbf
{
    enum class CodebookKind
    {
        orthogonal,
        weak,
        strong
    };

    enum class Criterion
    {
        eig, // sum of log2(1 + gamma * sigma^2) over the N_S strongest modes
        fro, // squared Frobenius norm (low-SNR key parameter)
        det  // squared determinant magnitude (high-SNR key parameter)
    };

    // How the random phases of the ray gains are drawn
    enum class RayPhase
    {
        per_cluster, // one phase shared by all rays of a cluster
        per_ray      // independent phase for every ray
    };

    inline std::string to_string(CodebookKind k)
    {
        switch (k)
        {
        case CodebookKind::orthogonal:
            return "orthogonal";
        case CodebookKind::weak:
            return "weak";
        case CodebookKind::strong:
            return "strong";
        }
        return "?";
    }

    inline std::string to_string(Criterion c)
    {
        switch (c)
        {
        case Criterion::eig:
            return "eig";
        case Criterion::fro:
            return "fro";
        case Criterion::det:
            return "det";
        }
        return "?";
    }

    inline std::string to_string(RayPhase p)
    {
        return p == RayPhase::per_cluster ? "per-cluster" : "per-ray";
    }

    inline CodebookKind parse_codebook_kind(const std::string &s)
    {
        if (s == "orthogonal")
            return CodebookKind::orthogonal;
        if (s == "weak")
            return CodebookKind::weak;
        if (s == "strong")
            return CodebookKind::strong;
        throw config_error("unknown codebook kind '" + s + "' (expected orthogonal, weak or strong)");
    }

    inline Criterion parse_criterion(const std::string &s)
    {
        if (s == "eig")
            return Criterion::eig;
        if (s == "fro")
            return Criterion::fro;
        if (s == "det")
            return Criterion::det;
        throw config_error("unknown criterion '" + s + "' (expected eig, fro or det)");
    }

    inline RayPhase parse_ray_phase(const std::string &s)
    {
        if (s == "per-cluster")
            return RayPhase::per_cluster;
        if (s == "per-ray")
            return RayPhase::per_ray;
        throw config_error("unknown ray phase model '" + s + "' (expected per-cluster or per-ray)");
    }

    struct ChannelConfig
    {
        std::size_t clusters = 5;         // C, the first cluster is the LoS cluster
        std::size_t rays = 8;             // R rays per cluster
        double asd_deg = 6.0;             // c_D, departure angular spread
        double asa_deg = 15.0;            // c_A, arrival angular spread
        std::vector<double> ray_offsets = // Delta_r, scaled by the spread
            {0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715};
        std::size_t max_delay = 63;       // cluster delays uniform on 0..max_delay samples
        double los_nlos_ratio = 100.0;    // LoS cluster power over each NLoS cluster power
        double avg_power = 1.0;           // rho
        RayPhase ray_phase = RayPhase::per_cluster;

        void validate() const
        {
            if (clusters < 1 || rays < 1)
                throw config_error("channel needs at least one cluster and one ray");
            if (ray_offsets.size() < rays)
                throw config_error("ray_offsets has " + std::to_string(ray_offsets.size()) + " entries, need " + std::to_string(rays));
            if (!(asd_deg >= 0.0) || !(asa_deg >= 0.0))
                throw config_error("angular spreads must be non-negative");
            if (!(los_nlos_ratio > 0.0) || !(avg_power > 0.0))
                throw config_error("los_nlos_ratio and avg_power must be positive");
        }
    };

    struct SystemConfig
    {
        std::size_t n_t = 32;  // transmit antennas
        std::size_t n_r = 32;  // receive antennas
        std::size_t n_rf = 2;  // RF chains on both sides
        std::size_t n_s = 2;   // data streams
        std::size_t k = 512;   // subcarriers
        std::vector<std::size_t> m = {3};
        std::vector<double> snr_db = {-20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30};
        std::size_t trials = 500;
        std::uint64_t seed = 1;
        std::vector<CodebookKind> codebooks = {CodebookKind::orthogonal};
        std::vector<Criterion> criteria = {Criterion::eig};
        bool noise_free_training = false;
        bool reference = false;  // also evaluate the OMP reference
        std::size_t workers = 1;
        std::size_t weak_size = 0;   // 0: smallest even count >= 9/8 of the antennas (36 for 32)
        std::size_t strong_size = 0; // 0: the antenna count
        ChannelConfig channel;

        // Number of beams of a codebook of the given kind on an array of `antennas`
        std::size_t codebook_size(CodebookKind kind, std::size_t antennas) const
        {
            switch (kind)
            {
            case CodebookKind::orthogonal:
                return antennas;
            case CodebookKind::weak:
                return weak_size ? weak_size : 2 * ((antennas * 9 + 15) / 16); // smallest even count >= 9N/8
            case CodebookKind::strong:
                return strong_size ? strong_size : antennas;
            }
            return antennas;
        }

        void validate() const
        {
            if (n_t < 1 || n_r < 1)
                throw config_error("antenna counts must be positive");
            if (k < 1)
                throw config_error("k (subcarriers) must be at least 1");
            if (trials < 1)
                throw config_error("trials must be at least 1");
            if (n_s < 1 || n_s > n_rf)
                throw config_error("need 1 <= n_s <= n_rf");
            if (m.empty() || snr_db.empty() || codebooks.empty() || criteria.empty())
                throw config_error("m, snr_db, codebook and criterion lists must not be empty");
            for (auto kind : codebooks)
            {
                if (kind == CodebookKind::orthogonal && (n_t % 2 || n_r % 2))
                    throw config_error("orthogonal codebooks need even antenna counts");
                if (kind == CodebookKind::weak)
                    for (std::size_t a : {n_t, n_r})
                        if (codebook_size(kind, a) % 2 || codebook_size(kind, a) <= a)
                            throw config_error("weak codebook size must be even and exceed the antenna count (" + std::to_string(a) + ")");
                const std::size_t beams = std::min(codebook_size(kind, n_t), codebook_size(kind, n_r));
                for (auto mm : m)
                    if (mm < n_rf || mm > beams)
                        throw config_error("need n_rf <= m <= codebook size: m = " + std::to_string(mm) +
                                           ", n_rf = " + std::to_string(n_rf) + ", " + to_string(kind) +
                                           " codebook has " + std::to_string(beams) + " beams");
            }
            for (double s : snr_db)
                if (!std::isfinite(s))
                    throw config_error("snr_db entries must be finite");
            if (workers < 1)
                throw config_error("workers must be at least 1");
            channel.validate();
            if (channel.clusters * channel.rays < n_rf)
                throw config_error("clusters * rays must be at least n_rf");
            if (channel.max_delay >= k)
                throw config_error("max_delay must be below the number of subcarriers");
        }
    };

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        inline std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, sep))
            {
                item = trim(item);
                if (!item.empty())
                    out.push_back(item);
            }
            return out;
        }

        inline double to_double(const std::string &key, const std::string &s)
        {
            errno = 0;
            char *end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
                throw config_error(key + ": '" + s + "' is not a number");
            return v;
        }

        inline std::uint64_t to_u64(const std::string &key, const std::string &s)
        {
            errno = 0;
            char *end = nullptr;
            if (s.empty() || s[0] == '-')
                throw config_error(key + ": '" + s + "' is not a non-negative integer");
            const unsigned long long v = std::strtoull(s.c_str(), &end, 0);
            if (end != s.c_str() + s.size() || errno == ERANGE)
                throw config_error(key + ": '" + s + "' is not a non-negative integer");
            return v;
        }

        inline bool to_bool(const std::string &key, const std::string &s)
        {
            if (s == "1" || s == "true" || s == "yes" || s == "on")
                return true;
            if (s == "0" || s == "false" || s == "no" || s == "off")
                return false;
            throw config_error(key + ": '" + s + "' is not a boolean");
        }
    } // namespace detail

    // "a:step:b" (inclusive) or a comma separated list
    inline std::vector<double> parse_snr_list(const std::string &s)
    {
        const std::string key = "snr_db";
        const auto colon = detail::split(s, ':');
        if (colon.size() == 3)
        {
            const double a = detail::to_double(key, colon[0]);
            const double step = detail::to_double(key, colon[1]);
            const double b = detail::to_double(key, colon[2]);
            if (!(step > 0.0) || b < a)
                throw config_error("snr_db range needs a positive step and start <= stop");
            std::vector<double> out;
            const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
            for (std::size_t i = 0; i <= n; ++i)
                out.push_back(a + static_cast<double>(i) * step);
            return out;
        }
        if (colon.size() > 1)
            throw config_error("snr_db range must look like start:step:stop");
        std::vector<double> out;
        for (const auto &item : detail::split(s, ','))
            out.push_back(detail::to_double(key, item));
        if (out.empty())
            throw config_error("snr_db list is empty");
        return out;
    }

    inline std::vector<std::size_t> parse_count_list(const std::string &key, const std::string &s)
    {
        std::vector<std::size_t> out;
        for (const auto &item : detail::split(s, ','))
            out.push_back(static_cast<std::size_t>(detail::to_u64(key, item)));
        if (out.empty())
            throw config_error(key + " list is empty");
        return out;
    }

    // Apply one key = value setting. Unknown keys are errors.
    inline void apply_setting(SystemConfig &cfg, const std::string &key, const std::string &value)
    {
        using namespace detail;
        auto count = [&](std::size_t &dst) { dst = static_cast<std::size_t>(to_u64(key, value)); };

        if (key == "n_t")
            count(cfg.n_t);
        else if (key == "n_r")
            count(cfg.n_r);
        else if (key == "n_rf")
            count(cfg.n_rf);
        else if (key == "n_s")
            count(cfg.n_s);
        else if (key == "k")
            count(cfg.k);
        else if (key == "m")
            cfg.m = parse_count_list(key, value);
        else if (key == "snr_db")
            cfg.snr_db = parse_snr_list(value);
        else if (key == "trials")
            count(cfg.trials);
        else if (key == "seed")
            cfg.seed = to_u64(key, value);
        else if (key == "codebook")
        {
            cfg.codebooks.clear();
            for (const auto &s : split(value, ','))
                cfg.codebooks.push_back(parse_codebook_kind(s));
        }
        else if (key == "criterion")
        {
            cfg.criteria.clear();
            for (const auto &s : split(value, ','))
                cfg.criteria.push_back(parse_criterion(s));
        }
        else if (key == "noise_free")
            cfg.noise_free_training = to_bool(key, value);
        else if (key == "reference")
            cfg.reference = to_bool(key, value);
        else if (key == "workers")
            count(cfg.workers);
        else if (key == "weak_size")
            count(cfg.weak_size);
        else if (key == "strong_size")
            count(cfg.strong_size);
        else if (key == "clusters")
            count(cfg.channel.clusters);
        else if (key == "rays")
            count(cfg.channel.rays);
        else if (key == "asd_deg")
            cfg.channel.asd_deg = to_double(key, value);
        else if (key == "asa_deg")
            cfg.channel.asa_deg = to_double(key, value);
        else if (key == "ray_offsets")
        {
            cfg.channel.ray_offsets.clear();
            for (const auto &s : split(value, ','))
                cfg.channel.ray_offsets.push_back(to_double(key, s));
        }
        else if (key == "max_delay")
            count(cfg.channel.max_delay);
        else if (key == "los_nlos_ratio")
            cfg.channel.los_nlos_ratio = to_double(key, value);
        else if (key == "avg_power")
            cfg.channel.avg_power = to_double(key, value);
        else if (key == "ray_phase")
            cfg.channel.ray_phase = parse_ray_phase(value);
        else
            throw config_error("unknown configuration key '" + key + "'");
    }

    // Flat "key = value" text, '#' starts a comment
    inline void parse_config(std::istream &in, SystemConfig &cfg, const std::string &source = "<config>")
    {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error(source + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw config_error(source + ":" + std::to_string(lineno) + ": missing key");
            try
            {
                apply_setting(cfg, key, value);
            }
            catch (const config_error &e)
            {
                throw config_error(source + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    inline SystemConfig load_config(const std::string &path, SystemConfig cfg = {})
    {
        std::ifstream in(path);
        if (!in)
            throw config_error(path + ": cannot open configuration file");
        parse_config(in, cfg, path);
        return cfg;
    }
} // namespace hbf

#endif
