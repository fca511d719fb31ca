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

#ifndef HBF_BEAMCORE_HPP
#define HBF_BEAMCORE_HPP

#include "codebook.hpp"
#include "config.hpp"
#include "matkernel.hpp"
#include "training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Hybrid beamforming from coupling coefficients: power-based preselection of M beam
// pairs, selection of N_RF beams per side by a key parameter of the estimated
// effective channel, and SVD digital beamforming on the selected analog beams.

namespace hbf
{
    struct CandidateSets
    {
        std::vector<std::pair<std::size_t, std::size_t>> selected_pairs; // (tx beam, rx beam) in selection order
        std::vector<std::vector<std::size_t>> tx_combos;                  // codebook indices, N_RF each
        std::vector<std::vector<std::size_t>> rx_combos;

        std::size_t num_pairs() const { return tx_combos.size() * rx_combos.size(); }
        std::size_t flat_index(std::size_t i_f, std::size_t i_w) const { return i_f * rx_combos.size() + i_w; }
    };

    struct EffectiveChannelEstimate
    {
        std::vector<ComplexMatrix> per_subcarrier; // N_RF x N_RF each
        std::size_t tx_combo_index = 0;            // i_f
        std::size_t rx_combo_index = 0;            // i_w
        std::size_t flat_index = 0;                // i_f * I_W + i_w
    };

    struct BeamformerSet
    {
        ComplexMatrix tx_analog;                // N_T x N_RF
        ComplexMatrix rx_analog;                // N_R x N_RF
        std::vector<ComplexMatrix> tx_digital;  // N_RF x N_S per subcarrier
        std::vector<ComplexMatrix> rx_digital;  // N_RF x N_S per subcarrier
        std::vector<std::size_t> tx_beams;      // codebook indices of the analog columns
        std::vector<std::size_t> rx_beams;
    };

    // All size-r subsets of {0..n-1} in lexicographic order
    inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t r)
    {
        std::vector<std::vector<std::size_t>> out;
        if (r > n)
            return out;
        std::vector<std::size_t> c(r);
        for (std::size_t i = 0; i < r; ++i)
            c[i] = i;
        while (true)
        {
            out.push_back(c);
            if (r == 0)
                return out;
            std::size_t i = r;
            while (i > 0 && c[i - 1] == n - r + (i - 1))
                --i;
            if (i == 0)
                return out;
            ++c[i - 1];
            for (std::size_t j = i; j < r; ++j)
                c[j] = c[j - 1] + 1;
        }
    }

    // Greedy M-pair preselection on pair energies. After each pick both the chosen
    // transmit beam and the chosen receive beam are excluded. Ties go to the smallest (n_w, n_f).
    inline CandidateSets initial_beam_selection(const CouplingTensor &y, std::size_t m, std::size_t n_rf)
    {
        if (n_rf < 1)
            throw config_error("initial_beam_selection: n_rf must be at least 1");
        if (m < n_rf)
            throw config_error("initial_beam_selection: m = " + std::to_string(m) + " is below n_rf = " + std::to_string(n_rf));
        const std::size_t nw = y.num_rx_beams(), nf = y.num_tx_beams();
        if (m > std::min(nw, nf))
            throw config_error("initial_beam_selection: m = " + std::to_string(m) + " exceeds the available beams (" +
                               std::to_string(std::min(nw, nf)) + ")");

        const Eigen::MatrixXd e = energy_map(y);
        std::vector<bool> rx_used(nw, false), tx_used(nf, false);
        CandidateSets out;
        for (std::size_t step = 0; step < m; ++step)
        {
            double best = -1.0;
            std::size_t bw = nw, bf = nf;
            for (std::size_t w = 0; w < nw; ++w)
            {
                if (rx_used[w])
                    continue;
                for (std::size_t f = 0; f < nf; ++f)
                {
                    if (tx_used[f])
                        continue;
                    const double v = e(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(f));
                    if (v > best)
                    {
                        best = v;
                        bw = w;
                        bf = f;
                    }
                }
            }
            if (bw == nw)
                throw config_error("initial_beam_selection: ran out of beams");
            rx_used[bw] = true;
            tx_used[bf] = true;
            out.selected_pairs.emplace_back(bf, bw);
        }

        for (const auto &c : combinations(m, n_rf))
        {
            std::vector<std::size_t> tx, rx;
            for (auto pos : c)
            {
                tx.push_back(out.selected_pairs[pos].first);
                rx.push_back(out.selected_pairs[pos].second);
            }
            out.tx_combos.push_back(std::move(tx));
            out.rx_combos.push_back(std::move(rx));
        }
        return out;
    }

    namespace detail
    {
        // Y_i[k](a, b) = y[k](rx[a], tx[b])
        inline void gather(const ComplexMatrix &yk, const std::vector<std::size_t> &rx, const std::vector<std::size_t> &tx, ComplexMatrix &out)
        {
            out.resize(static_cast<Eigen::Index>(rx.size()), static_cast<Eigen::Index>(tx.size()));
            for (std::size_t b = 0; b < tx.size(); ++b)
                for (std::size_t a = 0; a < rx.size(); ++a)
                    out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                        yk(static_cast<Eigen::Index>(rx[a]), static_cast<Eigen::Index>(tx[b]));
        }
    } // namespace detail

    // (W^H W)^{-1/2} Y_i[k] (F^H F)^{-1/2} for the combination pair (i_f, i_w)
    inline EffectiveChannelEstimate estimate_effective_channel(const CouplingTensor &y, const CandidateSets &sets,
                                                               std::size_t i_f, std::size_t i_w,
                                                               const Codebook &tx_cb, const Codebook &rx_cb)
    {
        if (i_f >= sets.tx_combos.size() || i_w >= sets.rx_combos.size())
            throw argument_error("estimate_effective_channel: combination index out of range");
        const auto &tx = sets.tx_combos[i_f];
        const auto &rx = sets.rx_combos[i_w];
        const ComplexMatrix bf = inv_sqrt_hermitian(tx_cb.gram(tx), i_f, "tx");
        const ComplexMatrix bw = inv_sqrt_hermitian(rx_cb.gram(rx), i_w, "rx");

        EffectiveChannelEstimate est;
        est.tx_combo_index = i_f;
        est.rx_combo_index = i_w;
        est.flat_index = sets.flat_index(i_f, i_w);
        est.per_subcarrier.reserve(y.num_subcarriers());
        ComplexMatrix yi;
        for (const auto &yk : y.y)
        {
            detail::gather(yk, rx, tx, yi);
            est.per_subcarrier.emplace_back(bw * yi * bf);
        }
        return est;
    }

    // Per-subcarrier key parameter of one effective channel matrix
    inline double criterion_value(const ComplexMatrix &h, Criterion mode, double gamma, std::size_t n_s)
    {
        switch (mode)
        {
        case Criterion::fro:
            return frobenius_sq(h);
        case Criterion::det:
            return det_abs_sq(h);
        case Criterion::eig:
        {
            const RealVector s2 = squared_singular_values(h);
            double v = 0.0;
            for (Eigen::Index i = 0; i < std::min<Eigen::Index>(s2.size(), static_cast<Eigen::Index>(n_s)); ++i)
                v += std::log2(1.0 + gamma * s2(i));
            return v;
        }
        }
        return 0.0;
    }

    // Sum over subcarriers of the key parameter
    inline double selection_criterion(const EffectiveChannelEstimate &est, Criterion mode, double gamma, std::size_t n_s)
    {
        if (mode == Criterion::eig && !(gamma > 0.0))
            throw argument_error("selection_criterion: gamma must be positive for the eig criterion");
        double v = 0.0;
        for (const auto &h : est.per_subcarrier)
            v += criterion_value(h, mode, gamma, n_s);
        return v;
    }

    struct SelectionResult
    {
        std::size_t tx_combo = 0;          // i_f
        std::size_t rx_combo = 0;          // i_w
        std::size_t flat_index = 0;        // i
        double value = 0.0;                // criterion of the winner
        EffectiveChannelEstimate estimate; // of the winner
        std::vector<double> values;        // every flat index, NaN where skipped
        std::vector<std::size_t> skipped;  // flat indices with an ill-conditioned Gram
    };

    // Evaluate every combination pair once and pick the argmax for each gamma.
    // fro and det do not depend on gamma. Ties go to the smallest flat index.
    inline std::vector<SelectionResult> select_beams_multi(const CouplingTensor &y, const CandidateSets &sets, Criterion mode,
                                                           const std::vector<double> &gammas, const Codebook &tx_cb,
                                                           const Codebook &rx_cb, std::size_t n_s)
    {
        if (sets.tx_combos.empty() || sets.rx_combos.empty())
            throw argument_error("select_beams: empty candidate sets");
        if (gammas.empty())
            throw argument_error("select_beams: no gamma given");
        if (mode == Criterion::eig)
            for (double g : gammas)
                if (!(g > 0.0))
                    throw argument_error("select_beams: gamma must be positive for the eig criterion");

        const std::size_t i_f_n = sets.tx_combos.size(), i_w_n = sets.rx_combos.size();
        std::vector<std::optional<ComplexMatrix>> bf(i_f_n), bw(i_w_n);
        for (std::size_t i = 0; i < i_f_n; ++i)
        {
            try
            {
                bf[i] = inv_sqrt_hermitian(tx_cb.gram(sets.tx_combos[i]), i, "tx");
            }
            catch (const ill_conditioned_gram &)
            {
            }
        }
        for (std::size_t i = 0; i < i_w_n; ++i)
        {
            try
            {
                bw[i] = inv_sqrt_hermitian(rx_cb.gram(sets.rx_combos[i]), i, "rx");
            }
            catch (const ill_conditioned_gram &)
            {
            }
        }

        const std::size_t ng = mode == Criterion::eig ? gammas.size() : 1;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        std::vector<std::vector<double>> values(ng, std::vector<double>(sets.num_pairs(), nan));
        std::vector<std::size_t> skipped;
        std::vector<double> acc(ng);
        ComplexMatrix yi, h;
        const Eigen::Index ns = static_cast<Eigen::Index>(n_s);

        for (std::size_t i_f = 0; i_f < i_f_n; ++i_f)
            for (std::size_t i_w = 0; i_w < i_w_n; ++i_w)
            {
                const std::size_t flat = sets.flat_index(i_f, i_w);
                if (!bf[i_f] || !bw[i_w])
                {
                    skipped.push_back(flat);
                    continue;
                }
                std::fill(acc.begin(), acc.end(), 0.0);
                for (const auto &yk : y.y)
                {
                    detail::gather(yk, sets.rx_combos[i_w], sets.tx_combos[i_f], yi);
                    h.noalias() = *bw[i_w] * yi;
                    yi.noalias() = h * *bf[i_f];
                    if (mode == Criterion::eig)
                    {
                        const RealVector s2 = squared_singular_values(yi);
                        const Eigen::Index top = std::min(s2.size(), ns);
                        for (std::size_t g = 0; g < ng; ++g)
                            for (Eigen::Index j = 0; j < top; ++j)
                                acc[g] += std::log2(1.0 + gammas[g] * s2(j));
                    }
                    else
                        acc[0] += criterion_value(yi, mode, 0.0, n_s);
                }
                for (std::size_t g = 0; g < ng; ++g)
                    values[g][flat] = std::isfinite(acc[g]) ? acc[g] : nan;
            }

        if (skipped.size() == sets.num_pairs())
            throw selection_failure("select_beams: all " + std::to_string(sets.num_pairs()) + " combination pairs have ill-conditioned Gram matrices");

        std::vector<SelectionResult> out;
        for (std::size_t g = 0; g < gammas.size(); ++g)
        {
            const auto &vals = values[std::min(g, ng - 1)];
            SelectionResult r;
            bool found = false;
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (!std::isnan(vals[i]) && (!found || vals[i] > r.value))
                {
                    found = true;
                    r.value = vals[i];
                    r.flat_index = i;
                }
            if (!found)
                throw selection_failure("select_beams: no combination pair produced a finite criterion value");
            r.tx_combo = r.flat_index / i_w_n;
            r.rx_combo = r.flat_index % i_w_n;
            r.values = vals;
            r.skipped = skipped;
            // reuse the estimate when consecutive gammas agree on the winner
            if (!out.empty() && out.back().flat_index == r.flat_index)
                r.estimate = out.back().estimate;
            else
                r.estimate = estimate_effective_channel(y, sets, r.tx_combo, r.rx_combo, tx_cb, rx_cb);
            out.push_back(std::move(r));
        }
        return out;
    }

    inline SelectionResult select_beams(const CouplingTensor &y, const CandidateSets &sets, Criterion mode, double gamma,
                                        const Codebook &tx_cb, const Codebook &rx_cb, std::size_t n_s)
    {
        return std::move(select_beams_multi(y, sets, mode, {gamma}, tx_cb, rx_cb, n_s).front());
    }

    // F_B[k] = (F^H F)^{-1/2} V[:, :N_S], W_B[k] = (W^H W)^{-1/2} U[:, :N_S] from the SVD of the estimate
    inline BeamformerSet digital_beamforming(const EffectiveChannelEstimate &est, const Codebook &tx_cb, const Codebook &rx_cb,
                                             const CandidateSets &sets, std::size_t n_s)
    {
        if (est.tx_combo_index >= sets.tx_combos.size() || est.rx_combo_index >= sets.rx_combos.size())
            throw argument_error("digital_beamforming: estimate does not belong to these candidate sets");
        const auto &tx = sets.tx_combos[est.tx_combo_index];
        const auto &rx = sets.rx_combos[est.rx_combo_index];
        if (n_s < 1 || n_s > tx.size())
            throw argument_error("digital_beamforming: need 1 <= n_s <= n_rf");

        BeamformerSet bf;
        bf.tx_beams = tx;
        bf.rx_beams = rx;
        bf.tx_analog = tx_cb.columns(tx);
        bf.rx_analog = rx_cb.columns(rx);
        const ComplexMatrix gf = inv_sqrt_hermitian(tx_cb.gram(tx), est.tx_combo_index, "tx");
        const ComplexMatrix gw = inv_sqrt_hermitian(rx_cb.gram(rx), est.rx_combo_index, "rx");
        const Eigen::Index ns = static_cast<Eigen::Index>(n_s);
        bf.tx_digital.reserve(est.per_subcarrier.size());
        bf.rx_digital.reserve(est.per_subcarrier.size());
        for (const auto &h : est.per_subcarrier)
        {
            const SvdResult s = svd(h);
            bf.tx_digital.emplace_back(gf * s.right.leftCols(ns));
            bf.rx_digital.emplace_back(gw * s.left.leftCols(ns));
        }
        return bf;
    }

    struct HybridResult
    {
        CandidateSets sets;
        SelectionResult selection;
        BeamformerSet beamformers;
    };

    // Preselection, selection and digital beamforming in one call
    inline HybridResult hybrid_beamforming(const CouplingTensor &y, const Codebook &tx_cb, const Codebook &rx_cb,
                                           std::size_t m, std::size_t n_rf, std::size_t n_s, Criterion mode, double gamma)
    {
        HybridResult r;
        r.sets = initial_beam_selection(y, m, n_rf);
        r.selection = select_beams(y, r.sets, mode, gamma, tx_cb, rx_cb, n_s);
        r.beamformers = digital_beamforming(r.selection.estimate, tx_cb, rx_cb, r.sets, n_s);
        return r;
    }

    // Per-combination diagnostics: flat_index,i_f,i_w,tx_beams,rx_beams,value,status
    inline void write_selection_csv(const SelectionResult &sel, const CandidateSets &sets, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw io_error(path, "cannot open for writing");
        auto join = [](const std::vector<std::size_t> &v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += (i ? ";" : "") + std::to_string(v[i]);
            return s;
        };
        out << "flat_index,i_f,i_w,tx_beams,rx_beams,value,status\n";
        char buf[64];
        for (std::size_t i = 0; i < sel.values.size(); ++i)
        {
            const std::size_t i_f = i / sets.rx_combos.size(), i_w = i % sets.rx_combos.size();
            const bool skip = std::isnan(sel.values[i]);
            std::snprintf(buf, sizeof buf, "%.17g", skip ? 0.0 : sel.values[i]);
            out << i << ',' << i_f << ',' << i_w << ',' << join(sets.tx_combos[i_f]) << ',' << join(sets.rx_combos[i_w]) << ','
                << (skip ? "" : buf) << ',' << (skip ? "ill_conditioned" : (i == sel.flat_index ? "selected" : "ok")) << '\n';
        }
        if (!out)
            throw io_error(path, "write failed");
    }
} // namespace hbf

#endif
