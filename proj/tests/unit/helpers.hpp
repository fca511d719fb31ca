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

#ifndef HBF_TEST_HELPERS_HPP
#define HBF_TEST_HELPERS_HPP

#include "hbf.hpp"

#include <random>

namespace test
{
    inline hbf::ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
    {
        std::mt19937_64 eng(seed);
        std::normal_distribution<double> n(0.0, 1.0);
        hbf::ComplexMatrix a(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
            {
                const double re = n(eng);
                const double im = n(eng);
                a(i, j) = {re, im};
            }
        return a;
    }

    inline hbf::ComplexMatrix random_hpd(Eigen::Index n, std::uint64_t seed)
    {
        const hbf::ComplexMatrix a = random_matrix(n, n, seed);
        return a * a.adjoint() + 0.1 * hbf::ComplexMatrix::Identity(n, n);
    }

    inline double max_abs_diff(const hbf::ComplexMatrix &a, const hbf::ComplexMatrix &b)
    {
        return (a - b).cwiseAbs().maxCoeff();
    }

    inline hbf::ComplexMatrix eye(Eigen::Index n) { return hbf::ComplexMatrix::Identity(n, n); }

    inline hbf::ComplexMatrix diag(std::initializer_list<double> d)
    {
        hbf::ComplexMatrix m = hbf::ComplexMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
        Eigen::Index i = 0;
        for (double v : d)
        {
            m(i, i) = v;
            ++i;
        }
        return m;
    }

    // Small single-link config for fast end-to-end tests
    inline hbf::SystemConfig small_config()
    {
        hbf::SystemConfig c;
        c.n_t = c.n_r = 8;
        c.k = 16;
        c.channel.max_delay = 7;
        c.trials = 2;
        c.snr_db = {-10, 0, 10};
        c.m = {2, 3};
        return c;
    }
} // namespace test

#endif
