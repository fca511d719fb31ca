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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <filesystem>

using namespace hbf;
using Catch::Approx;

namespace
{
    // H = a_A(theta_p) a_D(psi_q)^H with both angles on the orthogonal grid
    ChannelRealization grid_path(const Codebook &tx, const Codebook &rx, std::size_t p, std::size_t q, std::size_t k)
    {
        ClusterParams c;
        c.num_clusters = c.rays_per_cluster = 1;
        c.gains = {1.0};
        c.delays = {0};
        c.aoa_deg = {rx.steering_angles()[p]};
        c.aod_deg = {tx.steering_angles()[q]};
        c.mean_aoa_deg = c.aoa_deg;
        c.mean_aod_deg = c.aod_deg;
        return build_channel(c, rx.num_antennas(), tx.num_antennas(), k);
    }
} // namespace

TEST_CASE("training - orthogonal beams see a delta tensor")
{
    const Codebook cb = orthogonal_codebook(8);
    const ChannelRealization ch = grid_path(cb, cb, 2, 5, 4);
    const CouplingTensor y = simulate_training(ch, cb, cb, 0.0, true, StreamSeed(1));
    REQUIRE(y.num_rx_beams() == 8);
    REQUIRE(y.num_tx_beams() == 8);
    REQUIRE(y.num_subcarriers() == 4);
    CHECK(y.noise_free);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t w = 0; w < 8; ++w)
            for (std::size_t f = 0; f < 8; ++f)
                CHECK(std::abs(y.at(w, f, k) - cplx(w == 2 && f == 5 ? 1.0 : 0.0)) < 1e-12);

    CHECK(pair_energy(y, 2, 5) == Approx(4.0));
    CHECK(pair_energy(y, 3, 5) < 1e-20);
    CHECK_THROWS_AS(pair_energy(y, 8, 0), argument_error);
    CHECK_THROWS_AS(y.at(0, 0, 4), argument_error);
}

TEST_CASE("training - noise-free couplings are w^H H f")
{
    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(4).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const Codebook tx = weak_coherent_codebook(10, 8), rx = strong_coherent_codebook(8, 8);
    const CouplingTensor y = training_signal(ch, tx, rx);
    for (std::size_t k : {0u, 7u, 15u})
        for (std::size_t w = 0; w < rx.num_beams(); ++w)
            for (std::size_t f = 0; f < tx.num_beams(); ++f)
            {
                const cplx direct = rx.beam(w).dot(ch.per_subcarrier[k] * tx.beam(f)); // dot conjugates the first argument
                CHECK(std::abs(y.at(w, f, k) - direct) < 1e-12);
            }
}

TEST_CASE("training - zero variance equals the noise-free flag")
{
    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(4).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const Codebook cb = orthogonal_codebook(8);
    const CouplingTensor a = simulate_training(ch, cb, cb, 0.0, false, StreamSeed(9));
    const CouplingTensor b = simulate_training(ch, cb, cb, 0.3, true, StreamSeed(9));
    for (std::size_t k = 0; k < cfg.k; ++k)
        CHECK((a.y[k].array() == b.y[k].array()).all());
    CHECK_THROWS_AS(simulate_training(ch, cb, cb, -1.0, false, StreamSeed(9)), argument_error);
    CHECK_THROWS_AS(simulate_training(ch, orthogonal_codebook(4), cb, 0.0, true, StreamSeed(9)), argument_error);
}

TEST_CASE("training - noise variance and circularity")
{
    ClusterParams p;
    p.num_clusters = p.rays_per_cluster = 1;
    p.gains = {0.0};
    p.delays = {0};
    p.aod_deg = p.aoa_deg = p.mean_aod_deg = p.mean_aoa_deg = {0.0};
    const std::size_t K = 1600;
    const ChannelRealization ch = build_channel(p, 8, 8, K);
    const Codebook cb = orthogonal_codebook(8);
    const CouplingTensor y = simulate_training(ch, cb, cb, 0.1, false, StreamSeed(21));
    double s = 0.0, re2 = 0.0;
    std::size_t n = 0;
    for (const auto &m : y.y)
    {
        s += m.squaredNorm();
        re2 += m.real().squaredNorm();
        n += std::size_t(m.size());
    }
    REQUIRE(n == 102400);
    CHECK(s / double(n) == Approx(0.1).epsilon(0.02));
    CHECK(re2 / double(n) == Approx(0.05).epsilon(0.02));
}

TEST_CASE("training - noise substreams do not depend on the tensor length")
{
    const auto a = unit_training_noise(3, 4, 4, StreamSeed(2));
    const auto b = unit_training_noise(3, 4, 8, StreamSeed(2));
    for (std::size_t k = 0; k < 4; ++k)
        CHECK((a[k].array() == b[k].array()).all());
    CHECK(test::max_abs_diff(a[0], a[1]) > 0.0);
}

TEST_CASE("training - scaling the variance scales one noise pattern")
{
    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(4).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const Codebook cb = orthogonal_codebook(8);
    const CouplingTensor clean = training_signal(ch, cb, cb);
    const CouplingTensor a = simulate_training(ch, cb, cb, 0.5, false, StreamSeed(3));
    const CouplingTensor b = simulate_training(ch, cb, cb, 2.0, false, StreamSeed(3));
    for (std::size_t k = 0; k < cfg.k; ++k)
        CHECK(test::max_abs_diff(2.0 * (a.y[k] - clean.y[k]), b.y[k] - clean.y[k]) < 1e-12);
}

TEST_CASE("training - pure noise energy")
{
    ClusterParams p;
    p.num_clusters = p.rays_per_cluster = 1;
    p.gains = {0.0};
    p.delays = {0};
    p.aod_deg = p.aoa_deg = p.mean_aod_deg = p.mean_aoa_deg = {0.0};
    const ChannelRealization ch = build_channel(p, 4, 4, 512);
    const Codebook cb = orthogonal_codebook(4);
    const CouplingTensor zero = training_signal(ch, cb, cb);
    CHECK(pair_energy(zero, 1, 1) == 0.0);
    const CouplingTensor y = simulate_training(ch, cb, cb, 1.0, false, StreamSeed(77));
    for (std::size_t w = 0; w < 4; ++w)
        for (std::size_t f = 0; f < 4; ++f)
            CHECK(pair_energy(y, w, f) == Approx(512.0).epsilon(0.1));
}

TEST_CASE("training - expected pair energy is signal energy plus K sigma^2")
{
    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(6).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const Codebook cb = orthogonal_codebook(8);
    const CouplingTensor clean = training_signal(ch, cb, cb);
    const double sigma2 = 0.2;
    const int runs = 400;
    // estimator of E[energy] for pair (1, 2) across independent noise seeds
    std::vector<double> e;
    for (int r = 0; r < runs; ++r)
        e.push_back(pair_energy(simulate_training(ch, cb, cb, sigma2, false, StreamSeed(1000 + r)), 1, 2));
    double mean = 0.0, var = 0.0;
    for (double v : e)
        mean += v / runs;
    for (double v : e)
        var += (v - mean) * (v - mean) / (runs - 1);
    const double expect = pair_energy(clean, 1, 2) + double(cfg.k) * sigma2;
    CHECK(std::abs(mean - expect) < 3.0 * std::sqrt(var / runs));
}

TEST_CASE("training - energy map and csv export")
{
    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(6).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const Codebook cb = orthogonal_codebook(8);
    const CouplingTensor y = simulate_training(ch, cb, cb, 0.1, false, StreamSeed(5));
    const Eigen::MatrixXd e = energy_map(y);
    CHECK(e(3, 4) == Approx(pair_energy(y, 3, 4)));

    const auto path = (std::filesystem::temp_directory_path() / "hbf_coupling_test.csv").string();
    write_coupling_csv(y, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n_w,n_f,k,re,im");
    std::size_t lines = 0;
    while (std::getline(in, line))
        ++lines;
    CHECK(lines == 8 * 8 * cfg.k);
    std::filesystem::remove(path);
}
