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

#ifndef HBF_TRAINING_HPP
#define HBF_TRAINING_HPP

#include "channel.hpp"
#include "codebook.hpp"
#include "rng.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace hbf
{
    // Coupling coefficients y[n_w][n_f][k], stored as one N_W x N_F matrix per subcarrier
    struct CouplingTensor
    {
        std::vector<ComplexMatrix> y;
        double noise_variance = 0.0;
        bool noise_free = true;

        std::size_t num_rx_beams() const { return y.empty() ? 0 : static_cast<std::size_t>(y.front().rows()); }
        std::size_t num_tx_beams() const { return y.empty() ? 0 : static_cast<std::size_t>(y.front().cols()); }
        std::size_t num_subcarriers() const { return y.size(); }

        cplx at(std::size_t n_w, std::size_t n_f, std::size_t k) const
        {
            if (k >= y.size() || n_w >= num_rx_beams() || n_f >= num_tx_beams())
                throw argument_error("CouplingTensor::at: index out of range");
            return y[k](static_cast<Eigen::Index>(n_w), static_cast<Eigen::Index>(n_f));
        }
    };

    // Noise-free couplings W^H H[k] F, two matrix products per subcarrier
    inline CouplingTensor training_signal(const ChannelRealization &ch, const Codebook &tx_cb, const Codebook &rx_cb)
    {
        if (tx_cb.num_antennas() != ch.n_t || rx_cb.num_antennas() != ch.n_r)
            throw argument_error("training: codebook antenna counts (" + std::to_string(tx_cb.num_antennas()) + ", " +
                                 std::to_string(rx_cb.num_antennas()) + ") do not match the channel (" +
                                 std::to_string(ch.n_t) + ", " + std::to_string(ch.n_r) + ")");
        CouplingTensor out;
        out.y.reserve(ch.num_subcarriers());
        const ComplexMatrix wh = rx_cb.beams().adjoint();
        for (const auto &h : ch.per_subcarrier)
        {
            const ComplexMatrix hf = h * tx_cb.beams();
            out.y.emplace_back(wh * hf);
        }
        return out;
    }

    // Unit-variance CSCG noise for every (n_w, n_f, k). Subcarrier k uses substream
    // seed.child(k), so any evaluation order gives identical draws.
    inline std::vector<ComplexMatrix> unit_training_noise(std::size_t n_w, std::size_t n_f, std::size_t k, StreamSeed seed)
    {
        std::vector<ComplexMatrix> out;
        out.reserve(k);
        for (std::size_t kk = 0; kk < k; ++kk)
        {
            Rng eng = seed.child(kk).engine();
            CscgSampler z(1.0);
            ComplexMatrix m(static_cast<Eigen::Index>(n_w), static_cast<Eigen::Index>(n_f));
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    m(i, j) = z(eng);
            out.push_back(std::move(m));
        }
        return out;
    }

    // signal + sqrt(sigma2) * unit_noise
    inline CouplingTensor add_training_noise(const CouplingTensor &signal, const std::vector<ComplexMatrix> &unit_noise, double sigma2)
    {
        if (!(sigma2 >= 0.0))
            throw argument_error("add_training_noise: sigma2 must be non-negative");
        if (unit_noise.size() != signal.y.size())
            throw argument_error("add_training_noise: noise tensor has the wrong number of subcarriers");
        CouplingTensor out;
        out.noise_variance = sigma2;
        out.noise_free = sigma2 == 0.0;
        out.y.reserve(signal.y.size());
        const double s = std::sqrt(sigma2);
        for (std::size_t k = 0; k < signal.y.size(); ++k)
        {
            if (unit_noise[k].rows() != signal.y[k].rows() || unit_noise[k].cols() != signal.y[k].cols())
                throw argument_error("add_training_noise: noise tensor shape mismatch");
            out.y.emplace_back(signal.y[k] + s * unit_noise[k]);
        }
        return out;
    }

    // y = w^H H[k] f + z, z ~ CSCG(0, sigma2). Scaling sigma2 for a fixed seed scales the same noise pattern.
    inline CouplingTensor simulate_training(const ChannelRealization &ch, const Codebook &tx_cb, const Codebook &rx_cb,
                                            double sigma2, bool noise_free, StreamSeed seed)
    {
        if (!(sigma2 >= 0.0))
            throw argument_error("simulate_training: sigma2 must be non-negative");
        CouplingTensor sig = training_signal(ch, tx_cb, rx_cb);
        if (noise_free || sigma2 == 0.0)
        {
            sig.noise_variance = noise_free ? 0.0 : sigma2;
            sig.noise_free = true;
            return sig;
        }
        const auto noise = unit_training_noise(rx_cb.num_beams(), tx_cb.num_beams(), ch.num_subcarriers(), seed);
        return add_training_noise(sig, noise, sigma2);
    }

    // sum_k |y[n_w][n_f][k]|^2
    inline double pair_energy(const CouplingTensor &t, std::size_t n_w, std::size_t n_f)
    {
        if (n_w >= t.num_rx_beams() || n_f >= t.num_tx_beams())
            throw argument_error("pair_energy: beam pair (" + std::to_string(n_w) + ", " + std::to_string(n_f) + ") out of range");
        double e = 0.0;
        for (const auto &m : t.y)
            e += std::norm(m(static_cast<Eigen::Index>(n_w), static_cast<Eigen::Index>(n_f)));
        return e;
    }

    // All pair energies, N_W x N_F
    inline Eigen::MatrixXd energy_map(const CouplingTensor &t)
    {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.num_rx_beams()), static_cast<Eigen::Index>(t.num_tx_beams()));
        for (const auto &m : t.y)
            e += m.cwiseAbs2();
        return e;
    }

    // Rows n_w,n_f,k,re,im
    inline void write_coupling_csv(const CouplingTensor &t, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw io_error(path, "cannot open for writing");
        out << "n_w,n_f,k,re,im\n";
        char buf[128];
        for (std::size_t w = 0; w < t.num_rx_beams(); ++w)
            for (std::size_t f = 0; f < t.num_tx_beams(); ++f)
                for (std::size_t k = 0; k < t.num_subcarriers(); ++k)
                {
                    const cplx v = t.y[k](static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(f));
                    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g\n", w, f, k, v.real(), v.imag());
                    out << buf;
                }
        if (!out)
            throw io_error(path, "write failed");
    }
} // namespace hbf

#endif
