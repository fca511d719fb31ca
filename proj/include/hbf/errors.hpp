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

#ifndef HBF_ERRORS_HPP
#define HBF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hbf
{
    // Wrong shapes, out-of-range indices, violated preconditions
    class argument_error : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Inconsistent simulation configuration (CLI exit code 2)
    class config_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Base class of all numerical failures (CLI exit code 3 when the budget is exceeded)
    class numerical_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class svd_error : public numerical_error
    {
    public:
        svd_error(std::size_t rows, std::size_t cols, const std::string &why)
            : numerical_error("SVD failed for " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix: " + why),
              rows_(rows), cols_(cols) {}
        std::size_t rows() const noexcept { return rows_; }
        std::size_t cols() const noexcept { return cols_; }

    private:
        std::size_t rows_, cols_;
    };

    // Gram matrix of a beam combination too close to singular for (G)^{-1/2}.
    // `candidate` is the combination index on the offending side, or npos when unknown.
    class ill_conditioned_gram : public numerical_error
    {
    public:
        static constexpr std::size_t npos = static_cast<std::size_t>(-1);

        ill_conditioned_gram(double min_eig, double max_eig, std::size_t candidate = npos, std::string side = {})
            : numerical_error(describe(min_eig, max_eig, candidate, side)),
              min_eig_(min_eig), max_eig_(max_eig), candidate_(candidate), side_(std::move(side)) {}

        double min_eigenvalue() const noexcept { return min_eig_; }
        double max_eigenvalue() const noexcept { return max_eig_; }
        std::size_t candidate() const noexcept { return candidate_; }
        const std::string &side() const noexcept { return side_; }

    private:
        static std::string describe(double lo, double hi, std::size_t cand, const std::string &side)
        {
            std::string s = "ill-conditioned Gram matrix (eigenvalues " + std::to_string(lo) + " .. " + std::to_string(hi) + ")";
            if (cand != npos)
                s += " for " + (side.empty() ? std::string("candidate") : side + " candidate") + " " + std::to_string(cand);
            return s;
        }
        double min_eig_, max_eig_;
        std::size_t candidate_;
        std::string side_;
    };

    // Every candidate combination of Algorithm-1 selection was rejected
    class selection_failure : public numerical_error
    {
    public:
        using numerical_error::numerical_error;
    };

    // Singular combined-noise covariance while evaluating mutual information
    class evaluation_error : public numerical_error
    {
    public:
        evaluation_error(std::size_t subcarrier, const std::string &why)
            : numerical_error("rate evaluation failed at subcarrier " + std::to_string(subcarrier) + ": " + why),
              subcarrier_(subcarrier) {}
        std::size_t subcarrier() const noexcept { return subcarrier_; }

    private:
        std::size_t subcarrier_;
    };

    class io_error : public std::runtime_error
    {
    public:
        io_error(const std::string &path, const std::string &what)
            : std::runtime_error(path + ": " + what), path_(path) {}
        const std::string &path() const noexcept { return path_; }

    private:
        std::string path_;
    };
} // namespace hbf

#endif
