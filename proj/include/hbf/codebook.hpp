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

#ifndef HBF_CODEBOOK_HPP
#define HBF_CODEBOOK_HPP

#include "config.hpp"
#include "matkernel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace hbf
{
    inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    // Half-wavelength ULA response without the angle range check, used for ray
    // angles that leave [-90, 90] after adding the spread
    inline ComplexVector array_response(double angle_deg, std::size_t num_antennas)
    {
        if (num_antennas < 1)
            throw argument_error("array_response: num_antennas must be at least 1");
        const double s = std::sin(deg2rad(angle_deg));
        const double amp = 1.0 / std::sqrt(static_cast<double>(num_antennas));
        ComplexVector v(static_cast<Eigen::Index>(num_antennas));
        // phase reduced modulo 2*pi before evaluation
        for (std::size_t n = 0; n < num_antennas; ++n)
            v(static_cast<Eigen::Index>(n)) = std::polar(amp, std::numbers::pi * std::remainder(s * static_cast<double>(n), 2.0));
        return v;
    }

    // Entry n = exp(j*pi*sin(angle)*n) / sqrt(N)
    inline ComplexVector steering_vector(double angle_deg, std::size_t num_antennas)
    {
        if (!(angle_deg >= -90.0 && angle_deg <= 90.0))
            throw argument_error("steering_vector: angle " + std::to_string(angle_deg) + " outside [-90, 90] degrees");
        return array_response(angle_deg, num_antennas);
    }

    class Codebook
    {
    public:
        Codebook() = default;

        Codebook(std::vector<double> angles_deg, std::size_t num_antennas)
            : num_antennas_(num_antennas), angles_(std::move(angles_deg))
        {
            if (angles_.empty())
                throw argument_error("Codebook: no beams");
            beams_.resize(static_cast<Eigen::Index>(num_antennas), static_cast<Eigen::Index>(angles_.size()));
            for (std::size_t i = 0; i < angles_.size(); ++i)
                beams_.col(static_cast<Eigen::Index>(i)) = steering_vector(angles_[i], num_antennas);
            gram_ = beams_.adjoint() * beams_;
            coherence_ = 0.0;
            for (Eigen::Index j = 0; j < gram_.cols(); ++j)
                for (Eigen::Index i = 0; i < j; ++i)
                    coherence_ = std::max(coherence_, std::abs(gram_(i, j)));
        }

        std::size_t num_antennas() const { return num_antennas_; }
        std::size_t num_beams() const { return angles_.size(); }
        const ComplexMatrix &beams() const { return beams_; }
        auto beam(std::size_t i) const { return beams_.col(static_cast<Eigen::Index>(i)); }
        const std::vector<double> &steering_angles() const { return angles_; }
        double coherence() const { return coherence_; }

        // Full Gram matrix B^H B, cached
        const ComplexMatrix &gram() const { return gram_; }

        // Columns for a list of beam indices
        ComplexMatrix columns(const std::vector<std::size_t> &idx) const
        {
            ComplexMatrix out(beams_.rows(), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t j = 0; j < idx.size(); ++j)
            {
                if (idx[j] >= num_beams())
                    throw argument_error("Codebook::columns: beam index " + std::to_string(idx[j]) + " out of range");
                out.col(static_cast<Eigen::Index>(j)) = beams_.col(static_cast<Eigen::Index>(idx[j]));
            }
            return out;
        }

        // Gram submatrix for a list of beam indices
        ComplexMatrix gram(const std::vector<std::size_t> &idx) const
        {
            ComplexMatrix out(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t j = 0; j < idx.size(); ++j)
                for (std::size_t i = 0; i < idx.size(); ++i)
                {
                    if (idx[i] >= num_beams() || idx[j] >= num_beams())
                        throw argument_error("Codebook::gram: beam index out of range");
                    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        gram_(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(idx[j]));
                }
            return out;
        }

        // One row per beam: index, angle_deg, re0, im0, re1, im1, ...
        void write_csv(const std::string &path) const
        {
            std::ofstream out(path);
            if (!out)
                throw io_error(path, "cannot open for writing");
            out << "index,angle_deg";
            for (std::size_t n = 0; n < num_antennas_; ++n)
                out << ",re" << n << ",im" << n;
            out << '\n';
            char buf[64];
            for (std::size_t i = 0; i < num_beams(); ++i)
            {
                std::snprintf(buf, sizeof buf, "%zu,%.17g", i, angles_[i]);
                out << buf;
                for (std::size_t n = 0; n < num_antennas_; ++n)
                {
                    const cplx v = beams_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i));
                    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", v.real(), v.imag());
                    out << buf;
                }
                out << '\n';
            }
            if (!out)
                throw io_error(path, "write failed");
        }

    private:
        std::size_t num_antennas_ = 0;
        std::vector<double> angles_;
        ComplexMatrix beams_;
        ComplexMatrix gram_;
        double coherence_ = 0.0;
    };

    // Angles asin((n_f - n/2) / (n/2)), n_f = 1..n, the sin-domain uniform grid
    inline std::vector<double> sine_grid_angles(std::size_t n)
    {
        std::vector<double> out;
        const double half = 0.5 * static_cast<double>(n);
        for (std::size_t nf = 1; nf <= n; ++nf)
        {
            const double x = std::clamp((static_cast<double>(nf) - half) / half, -1.0, 1.0);
            out.push_back(rad2deg(std::asin(x)));
        }
        return out;
    }

    // n beams on n antennas, mutually orthogonal
    inline Codebook orthogonal_codebook(std::size_t n)
    {
        if (n < 2 || n % 2)
            throw argument_error("orthogonal_codebook: n must be even and at least 2, got " + std::to_string(n));
        return Codebook(sine_grid_angles(n), n);
    }

    // Oversampled sine grid of n beams on num_antennas (n = 36 on 32 antennas gives coherence 0.12)
    inline Codebook weak_coherent_codebook(std::size_t n, std::size_t num_antennas)
    {
        if (n < 2 || n % 2)
            throw argument_error("weak_coherent_codebook: n must be even and at least 2");
        if (n <= num_antennas)
            throw argument_error("weak_coherent_codebook: n must exceed the antenna count");
        return Codebook(sine_grid_angles(n), num_antennas);
    }

    // Uniform angle grid -90 + 180 n_f / n, n_f = 1..n (coherence 0.99 for 32 beams on 32 antennas)
    inline Codebook strong_coherent_codebook(std::size_t n, std::size_t num_antennas)
    {
        if (n < 2)
            throw argument_error("strong_coherent_codebook: n must be at least 2");
        std::vector<double> angles;
        for (std::size_t nf = 1; nf <= n; ++nf)
            angles.push_back(-90.0 + 180.0 * static_cast<double>(nf) / static_cast<double>(n));
        return Codebook(std::move(angles), num_antennas);
    }

    inline Codebook make_codebook(CodebookKind kind, std::size_t beams, std::size_t num_antennas)
    {
        switch (kind)
        {
        case CodebookKind::orthogonal:
            if (beams != num_antennas)
                throw argument_error("orthogonal codebook needs as many beams as antennas");
            return orthogonal_codebook(num_antennas);
        case CodebookKind::weak:
            return weak_coherent_codebook(beams, num_antennas);
        case CodebookKind::strong:
            return strong_coherent_codebook(beams, num_antennas);
        }
        throw argument_error("unknown codebook kind");
    }
} // namespace hbf

#endif
