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

#ifndef HBF_REFERENCE_HPP
#define HBF_REFERENCE_HPP

#include "beamcore.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "matkernel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

// Explicit-CSI reference: orthogonal matching pursuit over the codebook, shared
// by all subcarriers, approximating the dominant singular vectors of H[k].

namespace hbf
{
    struct OmpResult
    {
        ComplexMatrix analog;                       // N x N_RF, codebook columns
        std::vector<ComplexMatrix> digital;         // N_RF x N_S per subcarrier
        std::vector<std::size_t> selected_indices;  // in selection order
        std::vector<double> residual_history;       // sum_k ||V_R[k]||_F^2 after each projection, before renormalisation
    };

    inline OmpResult omp_hybrid(const std::vector<ComplexMatrix> &target, const Codebook &cb, std::size_t n_rf)
    {
        if (target.empty())
            throw argument_error("omp_hybrid: no subcarriers");
        const Eigen::Index n = target.front().rows();
        const Eigen::Index ns = target.front().cols();
        if (n != static_cast<Eigen::Index>(cb.num_antennas()))
            throw argument_error("omp_hybrid: target rows do not match the codebook antenna count");
        if (n_rf < 1 || n_rf > cb.num_beams())
            throw argument_error("omp_hybrid: need 1 <= n_rf <= codebook size");
        for (const auto &v : target)
            if (v.rows() != n || v.cols() != ns)
                throw argument_error("omp_hybrid: target slices must share one shape");

        const std::size_t nb = cb.num_beams();
        const ComplexMatrix bh = cb.beams().adjoint();
        std::vector<ComplexMatrix> vr = target;
        std::vector<bool> used(nb, false);
        OmpResult out;
        ComplexMatrix fp(n, 0);

        for (std::size_t it = 0; it < n_rf; ++it)
        {
            // step 4: correlation energy of every atom with the residuals
            Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
            for (const auto &r : vr)
                score += (bh * r).rowwise().squaredNorm();
            std::size_t best = nb;
            for (std::size_t j = 0; j < nb; ++j)
                if (!used[j] && (best == nb || score(static_cast<Eigen::Index>(j)) > score(static_cast<Eigen::Index>(best))))
                    best = j;
            used[best] = true;
            out.selected_indices.push_back(best);

            // step 5
            fp.conservativeResize(n, fp.cols() + 1);
            fp.col(fp.cols() - 1) = cb.beams().col(static_cast<Eigen::Index>(best));

            // step 6: residual of the original targets against span(F_P)
            const ComplexMatrix g = fp.adjoint() * fp;
            const Eigen::LDLT<ComplexMatrix> ldlt(g);
            if (ldlt.info() != Eigen::Success)
                throw numerical_error("omp_hybrid: singular atom Gram matrix");
            double total = 0.0;
            for (std::size_t k = 0; k < target.size(); ++k)
            {
                vr[k] = target[k] - fp * ldlt.solve(fp.adjoint() * target[k]);
                total += vr[k].squaredNorm();
            }
            out.residual_history.push_back(total);

            // step 7: per-subcarrier renormalisation, skipped for a vanishing residual
            for (auto &r : vr)
            {
                const double nr = r.norm();
                if (nr >= 1e-12)
                    r /= nr;
            }
        }

        // steps 9 and 10
        out.analog = fp;
        const Eigen::LDLT<ComplexMatrix> ldlt(ComplexMatrix(fp.adjoint() * fp));
        const double scale = std::sqrt(static_cast<double>(ns));
        out.digital.reserve(target.size());
        for (std::size_t k = 0; k < target.size(); ++k)
        {
            ComplexMatrix fb = ldlt.solve(fp.adjoint() * target[k]);
            const double nrm = (fp * fb).norm();
            if (!(nrm > 0.0))
                throw numerical_error("omp_hybrid: target at subcarrier " + std::to_string(k) + " is orthogonal to every selected atom");
            fb *= scale / nrm;
            out.digital.push_back(std::move(fb));
        }
        return out;
    }

    // Leading N_S singular triplets of every H[k]
    inline std::vector<SvdResult> channel_svds(const ChannelRealization &ch, std::size_t n_s)
    {
        std::vector<SvdResult> out;
        out.reserve(ch.num_subcarriers());
        for (const auto &h : ch.per_subcarrier)
            out.push_back(leading_svd(h, static_cast<Eigen::Index>(n_s)));
        return out;
    }

    struct ReferenceResult
    {
        OmpResult precoder; // run on [V[k]]_{:,1:N_S}
        OmpResult combiner; // run on [U[k]]_{:,1:N_S}
        BeamformerSet beamformers;
    };

    // The combiner comes out of the same procedure as the precoder, so it does not whiten the noise
    inline ReferenceResult reference_solution(const std::vector<SvdResult> &svds, const Codebook &tx_cb, const Codebook &rx_cb,
                                              std::size_t n_rf, std::size_t n_s)
    {
        if (svds.empty())
            throw argument_error("reference_beamformers: no subcarriers");
        std::vector<ComplexMatrix> v, u;
        const Eigen::Index ns = static_cast<Eigen::Index>(n_s);
        for (const auto &s : svds)
        {
            if (s.right.cols() < ns || s.left.cols() < ns)
                throw argument_error("reference_beamformers: fewer singular vectors than streams");
            v.emplace_back(s.right.leftCols(ns));
            u.emplace_back(s.left.leftCols(ns));
        }
        ReferenceResult r;
        r.precoder = omp_hybrid(v, tx_cb, n_rf);
        r.combiner = omp_hybrid(u, rx_cb, n_rf);
        r.beamformers.tx_analog = r.precoder.analog;
        r.beamformers.rx_analog = r.combiner.analog;
        r.beamformers.tx_digital = r.precoder.digital;
        r.beamformers.rx_digital = r.combiner.digital;
        r.beamformers.tx_beams = r.precoder.selected_indices;
        r.beamformers.rx_beams = r.combiner.selected_indices;
        return r;
    }

    inline BeamformerSet reference_beamformers(const std::vector<SvdResult> &svds, const Codebook &tx_cb, const Codebook &rx_cb,
                                               std::size_t n_rf, std::size_t n_s)
    {
        return reference_solution(svds, tx_cb, rx_cb, n_rf, n_s).beamformers;
    }

    inline BeamformerSet reference_beamformers(const ChannelRealization &ch, const Codebook &tx_cb, const Codebook &rx_cb,
                                               std::size_t n_rf, std::size_t n_s)
    {
        if (tx_cb.num_antennas() != ch.n_t || rx_cb.num_antennas() != ch.n_r)
            throw argument_error("reference_beamformers: codebook antenna counts do not match the channel");
        return reference_beamformers(channel_svds(ch, n_s), tx_cb, rx_cb, n_rf, n_s);
    }

    // Rows side,iteration,beam,angle_deg,residual
    inline void write_omp_trace_csv(const ReferenceResult &r, const Codebook &tx_cb, const Codebook &rx_cb, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw io_error(path, "cannot open for writing");
        out << "side,iteration,beam,angle_deg,residual\n";
        char buf[160];
        auto dump = [&](const char *side, const OmpResult &o, const Codebook &cb) {
            for (std::size_t i = 0; i < o.selected_indices.size(); ++i)
            {
                const std::size_t b = o.selected_indices[i];
                std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.17g,%.17g\n", side, i, b, cb.steering_angles()[b], o.residual_history[i]);
                out << buf;
            }
        };
        dump("tx", r.precoder, tx_cb);
        dump("rx", r.combiner, rx_cb);
        if (!out)
            throw io_error(path, "write failed");
    }
} // namespace hbf

#endif
