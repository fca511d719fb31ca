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

// One channel draw on the default 32x32 link: beam training at 10 dB, hybrid
// beamforming from the couplings, and the two rates it is compared against.

#include "hbf.hpp"

#include <cstdio>

int main()
{
    hbf::SystemConfig cfg;
    const double snr_db = 10.0;
    const double sigma2 = hbf::noise_variance(snr_db, cfg.n_s);
    const double gamma = hbf::snr_linear(snr_db);

    const hbf::StreamSeed root = hbf::trial_root(cfg.seed, 0);
    hbf::Rng rng = root.child("channel").engine();
    const hbf::ChannelRealization ch = hbf::sample_channel(cfg, rng);

    const hbf::Codebook tx = hbf::orthogonal_codebook(cfg.n_t);
    const hbf::Codebook rx = hbf::orthogonal_codebook(cfg.n_r);
    const hbf::CouplingTensor y = hbf::simulate_training(ch, tx, rx, sigma2, false, root.child("training", 0));

    const hbf::HybridResult h = hbf::hybrid_beamforming(y, tx, rx, 3, cfg.n_rf, cfg.n_s, hbf::Criterion::eig, gamma);
    const double pro = hbf::achievable_rate(ch, h.beamformers, sigma2).mean_bits_per_s_hz;
    const double ref = hbf::achievable_rate(ch, hbf::reference_beamformers(ch, tx, rx, cfg.n_rf, cfg.n_s), sigma2).mean_bits_per_s_hz;
    const double dbf = hbf::fully_digital_rate(ch, gamma, cfg.n_s).mean_bits_per_s_hz;

    std::printf("selected tx beams:");
    for (auto b : h.beamformers.tx_beams)
        std::printf(" %zu (%.2f deg)", b, tx.steering_angles()[b]);
    std::printf("\nselected rx beams:");
    for (auto b : h.beamformers.rx_beams)
        std::printf(" %zu (%.2f deg)", b, rx.steering_angles()[b]);
    std::printf("\n\n%-28s %8s %10s\n", "method", "bits/s/Hz", "of digital");
    std::printf("%-28s %8.3f %10.3f\n", "implicit CSI (eig, M = 3)", pro, pro / dbf);
    std::printf("%-28s %8.3f %10.3f\n", "OMP on explicit CSI", ref, ref / dbf);
    std::printf("%-28s %8.3f %10.3f\n", "fully digital", dbf, 1.0);
    return 0;
}
