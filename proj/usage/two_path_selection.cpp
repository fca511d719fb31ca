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

// Two paths on an 8-beam grid: the coupling energy map, the preselected pairs and
// the combination each key parameter settles on.

#include "hbf.hpp"

#include <cstdio>

int main()
{
    const std::size_t n = 8, k = 16;
    const hbf::Codebook cb = hbf::orthogonal_codebook(n);

    hbf::ClusterParams p;
    p.num_clusters = 1;
    p.rays_per_cluster = 2;
    p.gains = {1.0, hbf::cplx(0.0, 0.6)};
    p.delays = {0, 5};
    p.aoa_deg = {cb.steering_angles()[1], cb.steering_angles()[4]};
    p.aod_deg = {cb.steering_angles()[6], cb.steering_angles()[2]};
    p.mean_aoa_deg = {p.aoa_deg[0]};
    p.mean_aod_deg = {p.aod_deg[0]};
    p.ray_offsets = {0.0, 0.0};
    const hbf::ChannelRealization ch = hbf::build_channel(p, n, n, k);

    const double sigma2 = 0.01;
    const hbf::CouplingTensor y = hbf::simulate_training(ch, cb, cb, sigma2, false, hbf::StreamSeed(7));
    const Eigen::MatrixXd e = hbf::energy_map(y);

    std::printf("coupling energy (rows: rx beam, cols: tx beam)\n     ");
    for (std::size_t f = 0; f < n; ++f)
        std::printf("%7zu", f);
    std::printf("\n");
    for (Eigen::Index w = 0; w < e.rows(); ++w)
    {
        std::printf("%4td ", w);
        for (Eigen::Index f = 0; f < e.cols(); ++f)
            std::printf("%7.2f", e(w, f));
        std::printf("\n");
    }

    const hbf::CandidateSets sets = hbf::initial_beam_selection(y, 3, 2);
    std::printf("\npreselected (tx, rx) pairs:");
    for (const auto &pr : sets.selected_pairs)
        std::printf(" (%zu, %zu)", pr.first, pr.second);
    std::printf("\n");

    const double gamma = 1.0 / (2.0 * sigma2);
    for (hbf::Criterion c : {hbf::Criterion::eig, hbf::Criterion::fro, hbf::Criterion::det})
    {
        const hbf::SelectionResult s = hbf::select_beams(y, sets, c, gamma, cb, cb, 2);
        const auto &tx = sets.tx_combos[s.tx_combo];
        const auto &rx = sets.rx_combos[s.rx_combo];
        std::printf("%-4s tx {%zu, %zu} rx {%zu, %zu}  value %.4g\n", hbf::to_string(c).c_str(), tx[0], tx[1], rx[0], rx[1], s.value);
    }
    return 0;
}
