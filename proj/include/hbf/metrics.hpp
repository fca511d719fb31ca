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

#ifndef HBF_METRICS_HPP
#define HBF_METRICS_HPP

#include "beamcore.hpp"
#include "channel.hpp"
#include "matkernel.hpp"
#include "rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hbf
{
    struct RateReport
    {
        std::vector<double> per_subcarrier_bits;
        double mean_bits_per_s_hz = 0.0;
        std::optional<double> normalized_to_dbf;
    };

    inline RateReport make_rate_report(std::vector<double> bits)
    {
        RateReport r;
        double s = 0.0;
        for (double b : bits)
            s += b;
        r.mean_bits_per_s_hz = bits.empty() ? 0.0 : s / static_cast<double>(bits.size());
        r.per_subcarrier_bits = std::move(bits);
        return r;
    }

    namespace detail
    {
        // log2 det of a Hermitian positive definite matrix, nullopt if not PD
        inline std::optional<double> log2det_pd(const ComplexMatrix &a)
        {
            const Eigen::LLT<ComplexMatrix> llt(a);
            if (llt.info() != Eigen::Success)
                return std::nullopt;
            double s = 0.0;
            for (Eigen::Index i = 0; i < a.rows(); ++i)
            {
                const double d = llt.matrixLLT()(i, i).real();
                if (!(d > 0.0))
                    return std::nullopt;
                s += 2.0 * std::log2(d);
            }
            return s;
        }
    } // namespace detail

    // log2 det(R_n + G R_s G^H) - log2 det(R_n), G = W_B^H P F_B, R_n = sigma2 W_B^H (W_P^H W_P) W_B,
    // with P = W_P^H H F_P the channel between the analog beamformers
    inline double mutual_information_projected(const ComplexMatrix &projected, const ComplexMatrix &wb, const ComplexMatrix &fb,
                                               const ComplexMatrix &rx_gram, const ComplexMatrix &r_s, double sigma2, std::size_t k = 0)
    {
        if (!(sigma2 > 0.0))
            throw argument_error("mutual_information: sigma2 must be positive");
        if (projected.rows() != wb.rows() || projected.cols() != fb.rows() || rx_gram.rows() != wb.rows() ||
            r_s.rows() != fb.cols() || r_s.cols() != fb.cols() || wb.cols() != fb.cols())
            throw argument_error("mutual_information: inconsistent dimensions");
        const ComplexMatrix g = wb.adjoint() * projected * fb;
        ComplexMatrix rn = sigma2 * (wb.adjoint() * rx_gram * wb);
        rn = 0.5 * (rn + rn.adjoint());
        ComplexMatrix tot = rn + g * r_s * g.adjoint();
        tot = 0.5 * (tot + tot.adjoint());
        const auto ln = detail::log2det_pd(rn);
        if (!ln)
            throw evaluation_error(k, "combined noise covariance is singular");
        const auto lt = detail::log2det_pd(tot);
        if (!lt)
            throw evaluation_error(k, "signal plus noise covariance is not positive definite");
        return std::max(0.0, *lt - *ln);
    }

    inline double mutual_information(const ComplexMatrix &h_k, const BeamformerSet &bf, std::size_t k, const ComplexMatrix &r_s, double sigma2)
    {
        if (k >= bf.tx_digital.size() || k >= bf.rx_digital.size())
            throw argument_error("mutual_information: subcarrier out of range for the beamformer set");
        if (h_k.rows() != bf.rx_analog.rows() || h_k.cols() != bf.tx_analog.rows())
            throw argument_error("mutual_information: channel does not match the analog beamformers");
        const ComplexMatrix p = bf.rx_analog.adjoint() * h_k * bf.tx_analog;
        const ComplexMatrix gw = bf.rx_analog.adjoint() * bf.rx_analog;
        return mutual_information_projected(p, bf.rx_digital[k], bf.tx_digital[k], gw, r_s, sigma2, k);
    }

    inline ComplexMatrix equal_power(std::size_t n_s)
    {
        return ComplexMatrix::Identity(static_cast<Eigen::Index>(n_s), static_cast<Eigen::Index>(n_s)) / static_cast<double>(n_s);
    }

    // Rate of a beamformer set with R_s = I / N_S, averaged over subcarriers
    inline RateReport achievable_rate(const ChannelRealization &ch, const BeamformerSet &bf, double sigma2)
    {
        if (bf.tx_digital.empty())
            throw argument_error("achievable_rate: empty beamformer set");
        const ComplexMatrix r_s = equal_power(static_cast<std::size_t>(bf.tx_digital.front().cols()));
        std::vector<double> bits;
        bits.reserve(ch.num_subcarriers());
        for (std::size_t k = 0; k < ch.num_subcarriers(); ++k)
            bits.push_back(mutual_information(ch.per_subcarrier[k], bf, k, r_s, sigma2));
        return make_rate_report(std::move(bits));
    }

    // Same, from precomputed W_P^H H[k] F_P
    inline RateReport achievable_rate_projected(const std::vector<ComplexMatrix> &projected, const BeamformerSet &bf, double sigma2)
    {
        if (projected.size() != bf.tx_digital.size() || projected.size() != bf.rx_digital.size())
            throw argument_error("achievable_rate: subcarrier count mismatch");
        if (projected.empty())
            throw argument_error("achievable_rate: no subcarriers");
        const ComplexMatrix r_s = equal_power(static_cast<std::size_t>(bf.tx_digital.front().cols()));
        const ComplexMatrix gw = bf.rx_analog.adjoint() * bf.rx_analog;
        std::vector<double> bits;
        bits.reserve(projected.size());
        for (std::size_t k = 0; k < projected.size(); ++k)
            bits.push_back(mutual_information_projected(projected[k], bf.rx_digital[k], bf.tx_digital[k], gw, r_s, sigma2, k));
        return make_rate_report(std::move(bits));
    }

    // N_S largest eigenvalues of H[k] H[k]^H for every k
    inline std::vector<RealVector> dbf_eigenvalues(const ChannelRealization &ch, std::size_t n_s)
    {
        std::vector<RealVector> out;
        out.reserve(ch.num_subcarriers());
        for (const auto &h : ch.per_subcarrier)
            out.push_back(leading_gram_eigenvalues(h, static_cast<Eigen::Index>(n_s)));
        return out;
    }

    inline RateReport fully_digital_rate(const std::vector<RealVector> &eigenvalues, double gamma)
    {
        if (!(gamma > 0.0))
            throw argument_error("fully_digital_rate: gamma must be positive");
        std::vector<double> bits;
        bits.reserve(eigenvalues.size());
        for (const auto &ev : eigenvalues)
        {
            double b = 0.0;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                b += std::log2(1.0 + gamma * ev(i));
            bits.push_back(b);
        }
        return make_rate_report(std::move(bits));
    }

    // (1/K) sum_k sum_{n_s} log2(1 + gamma lambda_{n_s}[k])
    inline RateReport fully_digital_rate(const ChannelRealization &ch, double gamma, std::size_t n_s)
    {
        return fully_digital_rate(dbf_eigenvalues(ch, n_s), gamma);
    }

    // H_E[k] = (W^H W)^{-1/2} W^H H[k] F (F^H F)^{-1/2}
    inline std::vector<ComplexMatrix> effective_channel(const ChannelRealization &ch, const ComplexMatrix &tx_analog, const ComplexMatrix &rx_analog)
    {
        const ComplexMatrix bf = inv_sqrt_hermitian(ComplexMatrix(tx_analog.adjoint() * tx_analog), ill_conditioned_gram::npos, "tx");
        const ComplexMatrix bw = inv_sqrt_hermitian(ComplexMatrix(rx_analog.adjoint() * rx_analog), ill_conditioned_gram::npos, "rx");
        std::vector<ComplexMatrix> out;
        out.reserve(ch.num_subcarriers());
        for (const auto &h : ch.per_subcarrier)
            out.emplace_back(bw * (rx_analog.adjoint() * h * tx_analog) * bf);
        return out;
    }

    // Per-realisation sums entering the approximation error
    struct ApproximationTerms
    {
        double log_term = 0.0;    // sum_k sum_{n_s} log2(1 + gamma sigma^2_{n_s})
        double linear_term = 0.0; // sum_k gamma ||H_E[k]||_F^2
        double fro_sum = 0.0;     // sum_k ||H_E[k]||_F^2
        std::size_t subcarriers = 0;
    };

    inline ApproximationTerms approximation_terms(const std::vector<ComplexMatrix> &h_e, double gamma, std::size_t n_s)
    {
        ApproximationTerms t;
        t.subcarriers = h_e.size();
        for (const auto &h : h_e)
        {
            const RealVector s2 = squared_singular_values(h);
            for (Eigen::Index i = 0; i < std::min<Eigen::Index>(s2.size(), static_cast<Eigen::Index>(n_s)); ++i)
                t.log_term += std::log2(1.0 + gamma * s2(i));
            const double f = frobenius_sq(h);
            t.fro_sum += f;
            t.linear_term += gamma * f;
        }
        return t;
    }

    struct ApproximationError
    {
        double epsilon = 0.0;     // |E[log term] - E[linear term]| / K
        double closed_form = 0.0; // (gamma / K) (1/ln 2 - 1) E[sum_k ||H_E||^2]
    };

    // Ensemble version: expectations are sample means over the realisations
    inline ApproximationError approximation_error(const std::vector<ApproximationTerms> &terms, double gamma)
    {
        if (terms.empty())
            throw argument_error("approximation_error: no realisations");
        double lg = 0.0, lin = 0.0, fro = 0.0;
        const double k = static_cast<double>(terms.front().subcarriers);
        for (const auto &t : terms)
        {
            lg += t.log_term;
            lin += t.linear_term;
            fro += t.fro_sum;
        }
        const double n = static_cast<double>(terms.size());
        ApproximationError e;
        e.epsilon = std::abs(lg / n - lin / n) / k;
        e.closed_form = gamma / k * (1.0 / std::numbers::ln2 - 1.0) * fro / n;
        return e;
    }

    // Single realisation, analog beams taken from a selection made with noise-free couplings
    inline ApproximationError approximation_error(const ChannelRealization &ch, const BeamformerSet &bf, double gamma, std::size_t n_s)
    {
        return approximation_error(std::vector<ApproximationTerms>{approximation_terms(effective_channel(ch, bf.tx_analog, bf.rx_analog), gamma, n_s)}, gamma);
    }

    // ---- noise statistics of the effective-channel estimate ----

    // Covariance of vec(Z_E): sigma2 kron(conj(G_F)^{-1}, G_W^{-1})
    inline ComplexMatrix ze_covariance(const ComplexMatrix &tx_gram, const ComplexMatrix &rx_gram, double sigma2)
    {
        if (!(sigma2 >= 0.0))
            throw argument_error("ze_covariance: sigma2 must be non-negative");
        const ComplexMatrix bf = inv_sqrt_hermitian(tx_gram, ill_conditioned_gram::npos, "tx");
        const ComplexMatrix bw = inv_sqrt_hermitian(rx_gram, ill_conditioned_gram::npos, "rx");
        const ComplexMatrix gf_inv = bf * bf, gw_inv = bw * bw;
        return sigma2 * kron(gf_inv.conjugate(), gw_inv);
    }

    // Z_E = G_W^{-1/2} Z G_F^{-1/2} with Z i.i.d. CSCG(0, sigma2)
    class ZeSampler
    {
    public:
        ZeSampler(const ComplexMatrix &tx_gram, const ComplexMatrix &rx_gram, double sigma2)
            : bf_(inv_sqrt_hermitian(tx_gram, ill_conditioned_gram::npos, "tx")),
              bw_(inv_sqrt_hermitian(rx_gram, ill_conditioned_gram::npos, "rx")), sigma2_(sigma2)
        {
            if (!(sigma2 >= 0.0))
                throw argument_error("ZeSampler: sigma2 must be non-negative");
        }

        // raw noise Z for one draw
        ComplexMatrix raw(Rng &eng) const
        {
            CscgSampler z(sigma2_);
            ComplexMatrix m(bw_.rows(), bf_.rows());
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    m(i, j) = z(eng);
            return m;
        }

        ComplexMatrix transform(const ComplexMatrix &z) const { return bw_ * z * bf_; }
        ComplexMatrix operator()(Rng &eng) const { return transform(raw(eng)); }

    private:
        ComplexMatrix bf_, bw_;
        double sigma2_;
    };

    // Draw n samples of Z_E, sample i from substream seed.child(i)
    inline std::vector<ComplexMatrix> sample_ze(const ComplexMatrix &tx_gram, const ComplexMatrix &rx_gram, double sigma2,
                                                std::size_t n, StreamSeed seed)
    {
        const ZeSampler s(tx_gram, rx_gram, sigma2);
        std::vector<ComplexMatrix> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            Rng eng = seed.child(i).engine();
            out.push_back(s(eng));
        }
        return out;
    }

    // Sample covariance E[vec vec^H] (zero mean assumed)
    inline ComplexMatrix empirical_covariance(const std::vector<ComplexMatrix> &draws)
    {
        if (draws.empty())
            throw argument_error("empirical_covariance: no draws");
        const Eigen::Index d = draws.front().size();
        ComplexMatrix acc = ComplexMatrix::Zero(d, d);
        for (const auto &z : draws)
        {
            const ComplexVector v = vec(z);
            acc.noalias() += v * v.adjoint();
        }
        return acc / static_cast<double>(draws.size());
    }

    struct NoiseStats
    {
        ComplexMatrix covariance;   // of vec(Z_E)
        double expected_u = 0.0;    // closed form
        double var_u = 0.0;         // tr(Psi R_zV) - E[U]^2, R_zV by Monte Carlo
        double gamma_shape = 0.0;   // N_RF^2
        double gamma_scale = 0.0;   // sigma2
        double empirical_mean_u = 0.0;
        double empirical_var_u = 0.0;
        std::vector<double> u_samples;
    };

    // U = ||Z_E||_F^2. For orthonormal beams U ~ Gamma(N_RF^2, sigma2).
    inline NoiseStats u_statistics(const ComplexMatrix &tx_gram, const ComplexMatrix &rx_gram, double sigma2,
                                   std::size_t num_samples, StreamSeed seed)
    {
        if (num_samples < 2)
            throw argument_error("u_statistics: need at least two samples");
        NoiseStats s;
        s.covariance = ze_covariance(tx_gram, rx_gram, sigma2);
        const ComplexMatrix bf = inv_sqrt_hermitian(tx_gram), bw = inv_sqrt_hermitian(rx_gram);
        const ComplexMatrix gf_inv = bf * bf, gw_inv = bw * bw;
        s.expected_u = sigma2 * gf_inv.trace().real() * gw_inv.trace().real();
        s.gamma_shape = static_cast<double>(tx_gram.rows() * rx_gram.rows());
        s.gamma_scale = sigma2;

        const ComplexMatrix phi = kron(gf_inv.conjugate(), gw_inv);
        const ComplexMatrix psi = kron(phi, phi);
        const ZeSampler sampler(tx_gram, rx_gram, sigma2);
        const Eigen::Index d = phi.rows();
        ComplexMatrix r_zv = ComplexMatrix::Zero(d * d, d * d);
        s.u_samples.reserve(num_samples);
        double sum = 0.0;
        for (std::size_t i = 0; i < num_samples; ++i)
        {
            Rng eng = seed.child(i).engine();
            const ComplexMatrix z = sampler.raw(eng);
            const ComplexVector zv = vec(z);
            ComplexVector zz(d * d);
            for (Eigen::Index a = 0; a < d; ++a)
                zz.segment(a * d, d) = zv(a) * zv;
            r_zv.noalias() += zz * zz.adjoint();
            const double u = sampler.transform(z).squaredNorm();
            s.u_samples.push_back(u);
            sum += u;
        }
        r_zv /= static_cast<double>(num_samples);
        s.var_u = (psi * r_zv).trace().real() - s.expected_u * s.expected_u;
        s.empirical_mean_u = sum / static_cast<double>(num_samples);
        double sq = 0.0;
        for (double u : s.u_samples)
            sq += (u - s.empirical_mean_u) * (u - s.empirical_mean_u);
        s.empirical_var_u = sq / static_cast<double>(num_samples - 1);
        return s;
    }

    // Kolmogorov-Smirnov distance between samples and Gamma(shape, scale)
    inline double ks_statistic_gamma(std::vector<double> samples, double shape, double scale)
    {
        if (samples.empty())
            throw argument_error("ks_statistic_gamma: no samples");
        std::sort(samples.begin(), samples.end());
        const double n = static_cast<double>(samples.size());
        double d = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const double f = samples[i] <= 0.0 ? 0.0 : boost::math::gamma_p(shape, samples[i] / scale);
            d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
        }
        return d;
    }

    // Asymptotic one-sample KS critical value sqrt(-ln(alpha/2)/2)/sqrt(n)
    inline double ks_critical_value(std::size_t n, double alpha = 0.01)
    {
        return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
    }

    struct VStats
    {
        double mean = 0.0;
        double variance = 0.0;
        std::size_t samples = 0;
    };

    // V = 2 Re tr(H'_E^H Z_E) over the given draws
    inline VStats v_statistics(const ComplexMatrix &h_e, const std::vector<ComplexMatrix> &ze_draws)
    {
        if (ze_draws.size() < 2)
            throw argument_error("v_statistics: need at least two draws");
        std::vector<double> v;
        v.reserve(ze_draws.size());
        for (const auto &z : ze_draws)
        {
            if (z.rows() != h_e.rows() || z.cols() != h_e.cols())
                throw argument_error("v_statistics: draw shape does not match the effective channel");
            v.push_back(2.0 * (h_e.adjoint() * z).trace().real());
        }
        VStats s;
        s.samples = v.size();
        for (double x : v)
            s.mean += x;
        s.mean /= static_cast<double>(v.size());
        for (double x : v)
            s.variance += (x - s.mean) * (x - s.mean);
        s.variance /= static_cast<double>(v.size() - 1);
        return s;
    }

    struct PowerAudit
    {
        std::vector<double> tx_residual; // |tr(F_P F_B R_s F_B^H F_P^H) - tr(R_s)|
        std::vector<double> rx_residual; // max |W_B^H W_P^H W_P W_B - I|
        double worst_tx = 0.0;
        double worst_rx = 0.0;
        std::size_t worst_tx_subcarrier = 0;
        std::size_t worst_rx_subcarrier = 0;

        bool passes(double tol = 1e-8) const { return worst_tx < tol && worst_rx < tol; }
    };

    inline PowerAudit audit_power_constraints(const BeamformerSet &bf, const ComplexMatrix &r_s)
    {
        PowerAudit a;
        const double trs = r_s.trace().real();
        const ComplexMatrix gw = bf.rx_analog.adjoint() * bf.rx_analog;
        for (std::size_t k = 0; k < bf.tx_digital.size(); ++k)
        {
            const ComplexMatrix x = bf.tx_analog * bf.tx_digital[k];
            const double t = std::abs((x * r_s * x.adjoint()).trace().real() - trs);
            a.tx_residual.push_back(t);
            if (t > a.worst_tx)
            {
                a.worst_tx = t;
                a.worst_tx_subcarrier = k;
            }
        }
        for (std::size_t k = 0; k < bf.rx_digital.size(); ++k)
        {
            const ComplexMatrix &wb = bf.rx_digital[k];
            const ComplexMatrix e = wb.adjoint() * gw * wb - ComplexMatrix::Identity(wb.cols(), wb.cols());
            const double r = e.cwiseAbs().maxCoeff();
            a.rx_residual.push_back(r);
            if (r > a.worst_rx)
            {
                a.worst_rx = r;
                a.worst_rx_subcarrier = k;
            }
        }
        return a;
    }

    struct StatRow
    {
        std::string statistic;
        double closed_form = 0.0;
        double empirical = 0.0;
    };

    // Rows statistic,closed_form,empirical,rel_error
    inline void write_stats_csv(const std::vector<StatRow> &rows, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw io_error(path, "cannot open for writing");
        out << "statistic,closed_form,empirical,rel_error\n";
        char buf[192];
        for (const auto &r : rows)
        {
            const double rel = r.closed_form != 0.0 ? std::abs(r.empirical - r.closed_form) / std::abs(r.closed_form)
                                                    : std::abs(r.empirical);
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", r.closed_form, r.empirical, rel);
            out << r.statistic << buf;
        }
        if (!out)
            throw io_error(path, "write failed");
    }
} // namespace hbf

#endif
