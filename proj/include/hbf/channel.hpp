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

#ifndef HBF_CHANNEL_HPP
#define HBF_CHANNEL_HPP

#include "codebook.hpp"
#include "config.hpp"
#include "matkernel.hpp"
#include "rng.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace hbf
{
    // Cluster/ray parameters of one channel draw. Per-ray arrays are flat, index c * rays + r.
    struct ClusterParams
    {
        std::size_t num_clusters = 0;       // C
        std::size_t rays_per_cluster = 0;   // R
        std::vector<cplx> gains;            // alpha[c][r]
        std::vector<std::size_t> delays;    // l[c][r] in samples
        std::vector<double> aod_deg;        // phi_D[c][r]
        std::vector<double> aoa_deg;        // phi_A[c][r]
        std::vector<double> mean_aod_deg;   // phi_D,c
        std::vector<double> mean_aoa_deg;   // phi_A,c
        double asd_deg = 0.0;               // c_D
        double asa_deg = 0.0;               // c_A
        std::vector<double> ray_offsets;    // Delta_r

        std::size_t num_rays() const { return num_clusters * rays_per_cluster; }

        double total_power() const
        {
            double p = 0.0;
            for (const auto &g : gains)
                p += std::norm(g);
            return p;
        }

        double cluster_power(std::size_t c) const
        {
            double p = 0.0;
            for (std::size_t r = 0; r < rays_per_cluster; ++r)
                p += std::norm(gains.at(c * rays_per_cluster + r));
            return p;
        }

        void validate(std::size_t k) const
        {
            const std::size_t n = num_rays();
            if (n < 1)
                throw argument_error("ClusterParams: no rays");
            if (gains.size() != n || delays.size() != n || aod_deg.size() != n || aoa_deg.size() != n)
                throw argument_error("ClusterParams: per-ray arrays must have C*R entries");
            for (auto l : delays)
                if (l >= k)
                    throw argument_error("ClusterParams: delay " + std::to_string(l) + " does not fit into " + std::to_string(k) + " subcarriers");
        }
    };

    struct ChannelRealization
    {
        ClusterParams params;
        double avg_power = 1.0;                   // rho
        std::size_t n_r = 0, n_t = 0;
        std::vector<ComplexMatrix> per_subcarrier; // H[k], n_r x n_t

        std::size_t num_subcarriers() const { return per_subcarrier.size(); }
    };

    // H[k] = sqrt(rho) * sum alpha * exp(-j 2 pi k l / K) * a_A(phi_A) * a_D(phi_D)^H
    inline ChannelRealization build_channel(const ClusterParams &p, std::size_t n_r, std::size_t n_t, std::size_t k, double avg_power = 1.0)
    {
        if (n_r < 1 || n_t < 1 || k < 1)
            throw argument_error("build_channel: dimensions must be positive");
        p.validate(k);

        // rays sharing a delay collapse into one matrix
        std::map<std::size_t, ComplexMatrix> by_delay;
        for (std::size_t i = 0; i < p.num_rays(); ++i)
        {
            auto [it, fresh] = by_delay.try_emplace(p.delays[i], ComplexMatrix::Zero(static_cast<Eigen::Index>(n_r), static_cast<Eigen::Index>(n_t)));
            it->second.noalias() += p.gains[i] * array_response(p.aoa_deg[i], n_r) * array_response(p.aod_deg[i], n_t).adjoint();
        }

        ChannelRealization out;
        out.params = p;
        out.avg_power = avg_power;
        out.n_r = n_r;
        out.n_t = n_t;
        out.per_subcarrier.reserve(k);
        const double amp = std::sqrt(avg_power);
        for (std::size_t kk = 0; kk < k; ++kk)
        {
            ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(n_r), static_cast<Eigen::Index>(n_t));
            for (const auto &[l, m] : by_delay)
            {
                // exact phase from (k * l mod K) / K
                const double frac = static_cast<double>((kk * l) % k) / static_cast<double>(k);
                h.noalias() += std::polar(amp, -2.0 * std::numbers::pi * frac) * m;
            }
            out.per_subcarrier.push_back(std::move(h));
        }
        return out;
    }

    // Draw cluster parameters. Cluster 0 is the LoS cluster.
    inline ClusterParams sample_cluster_params(const ChannelConfig &cc, std::size_t n_rf, Rng &rng)
    {
        cc.validate();
        if (cc.clusters * cc.rays < n_rf)
            throw config_error("sample_channel: C*R = " + std::to_string(cc.clusters * cc.rays) + " is below N_RF = " + std::to_string(n_rf));

        ClusterParams p;
        p.num_clusters = cc.clusters;
        p.rays_per_cluster = cc.rays;
        p.asd_deg = cc.asd_deg;
        p.asa_deg = cc.asa_deg;
        p.ray_offsets.assign(cc.ray_offsets.begin(), cc.ray_offsets.begin() + static_cast<std::ptrdiff_t>(cc.rays));

        // cluster powers: LoS = ratio * NLoS, total 1
        const double nlos = 1.0 / (cc.los_nlos_ratio + static_cast<double>(cc.clusters - 1));
        std::uniform_real_distribution<double> angle(-90.0, 90.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::uniform_int_distribution<std::size_t> delay(0, cc.max_delay);

        for (std::size_t c = 0; c < cc.clusters; ++c)
        {
            const double pc = c == 0 ? cc.los_nlos_ratio * nlos : nlos;
            const double amp = std::sqrt(pc / static_cast<double>(cc.rays));
            const double mean_aod = angle(rng);
            const double mean_aoa = angle(rng);
            const std::size_t l = delay(rng);
            p.mean_aod_deg.push_back(mean_aod);
            p.mean_aoa_deg.push_back(mean_aoa);
            const double shared = phase(rng);
            for (std::size_t r = 0; r < cc.rays; ++r)
            {
                const double th = cc.ray_phase == RayPhase::per_cluster ? shared : phase(rng);
                p.gains.push_back(std::polar(amp, th));
                p.delays.push_back(l);
                p.aod_deg.push_back(mean_aod + cc.asd_deg * p.ray_offsets[r]);
                p.aoa_deg.push_back(mean_aoa + cc.asa_deg * p.ray_offsets[r]);
            }
        }
        return p;
    }

    inline ChannelRealization sample_channel(const SystemConfig &cfg, Rng &rng)
    {
        if (cfg.channel.max_delay >= cfg.k)
            throw config_error("sample_channel: max_delay must be below the number of subcarriers");
        const ClusterParams p = sample_cluster_params(cfg.channel, cfg.n_rf, rng);
        return build_channel(p, cfg.n_r, cfg.n_t, cfg.k, cfg.channel.avg_power);
    }

    inline const ComplexMatrix &channel_matrix(const ChannelRealization &ch, std::size_t k)
    {
        if (k >= ch.per_subcarrier.size())
            throw argument_error("channel_matrix: subcarrier " + std::to_string(k) + " out of range (K = " + std::to_string(ch.per_subcarrier.size()) + ")");
        return ch.per_subcarrier[k];
    }

    // Textual export: "# key = value" metadata lines, then one row per ray
    inline void write_channel_csv(const ChannelRealization &ch, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw io_error(path, "cannot open for writing");
        const auto &p = ch.params;
        char buf[256];
        out << "# n_r = " << ch.n_r << "\n# n_t = " << ch.n_t << "\n# k = " << ch.num_subcarriers() << '\n';
        std::snprintf(buf, sizeof buf, "# avg_power = %.17g\n# asd_deg = %.17g\n# asa_deg = %.17g\n", ch.avg_power, p.asd_deg, p.asa_deg);
        out << buf;
        out << "# clusters = " << p.num_clusters << "\n# rays = " << p.rays_per_cluster << '\n';
        out << "cluster,ray,gain_re,gain_im,delay,aod_deg,aoa_deg,mean_aod_deg,mean_aoa_deg,ray_offset\n";
        for (std::size_t c = 0; c < p.num_clusters; ++c)
            for (std::size_t r = 0; r < p.rays_per_cluster; ++r)
            {
                const std::size_t i = c * p.rays_per_cluster + r;
                std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", c, r,
                              p.gains[i].real(), p.gains[i].imag(), p.delays[i], p.aod_deg[i], p.aoa_deg[i],
                              p.mean_aod_deg.at(c), p.mean_aoa_deg.at(c), r < p.ray_offsets.size() ? p.ray_offsets[r] : 0.0);
                out << buf;
            }
        if (!out)
            throw io_error(path, "write failed");
    }

    inline ChannelRealization read_channel_csv(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw io_error(path, "cannot open for reading");
        std::map<std::string, std::string> meta;
        ClusterParams p;
        std::string line;
        bool header = false;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            if (line[0] == '#')
            {
                const auto eq = line.find('=');
                if (eq != std::string::npos)
                    meta[detail::trim(line.substr(1, eq - 1))] = detail::trim(line.substr(eq + 1));
                continue;
            }
            if (!header)
            {
                header = true;
                continue;
            }
            const auto f = detail::split(line, ',');
            if (f.size() != 10)
                throw io_error(path, "malformed ray row: " + line);
            try
            {
                const std::size_t c = std::stoul(f[0]), r = std::stoul(f[1]);
                p.gains.emplace_back(std::stod(f[2]), std::stod(f[3]));
                p.delays.push_back(std::stoul(f[4]));
                p.aod_deg.push_back(std::stod(f[5]));
                p.aoa_deg.push_back(std::stod(f[6]));
                if (r == 0)
                {
                    p.mean_aod_deg.push_back(std::stod(f[7]));
                    p.mean_aoa_deg.push_back(std::stod(f[8]));
                }
                if (c == 0)
                    p.ray_offsets.push_back(std::stod(f[9]));
            }
            catch (const std::logic_error &)
            {
                throw io_error(path, "malformed ray row: " + line);
            }
        }
        try
        {
            p.num_clusters = std::stoul(meta.at("clusters"));
            p.rays_per_cluster = std::stoul(meta.at("rays"));
            p.asd_deg = std::stod(meta.at("asd_deg"));
            p.asa_deg = std::stod(meta.at("asa_deg"));
            return build_channel(p, std::stoul(meta.at("n_r")), std::stoul(meta.at("n_t")), std::stoul(meta.at("k")), std::stod(meta.at("avg_power")));
        }
        catch (const std::out_of_range &)
        {
            throw io_error(path, "missing metadata line");
        }
        catch (const std::invalid_argument &)
        {
            throw io_error(path, "malformed metadata or ray table");
        }
    }

    // Per-subcarrier dump: k,row,col,re,im
    inline void write_channel_matrices_csv(const ChannelRealization &ch, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw io_error(path, "cannot open for writing");
        out << "k,row,col,re,im\n";
        char buf[128];
        for (std::size_t k = 0; k < ch.num_subcarriers(); ++k)
        {
            const auto &h = ch.per_subcarrier[k];
            for (Eigen::Index i = 0; i < h.rows(); ++i)
                for (Eigen::Index j = 0; j < h.cols(); ++j)
                {
                    std::snprintf(buf, sizeof buf, "%zu,%td,%td,%.17g,%.17g\n", k, i, j, h(i, j).real(), h(i, j).imag());
                    out << buf;
                }
        }
        if (!out)
            throw io_error(path, "write failed");
    }
} // namespace hbf

#endif
