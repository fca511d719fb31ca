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

#ifndef HBF_HARNESS_HPP
#define HBF_HARNESS_HPP

#include "beamcore.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "config.hpp"
#include "metrics.hpp"
#include "reference.hpp"
#include "training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace hbf
{
    // sigma_n^2 = 1 / (N_S * SNR) with rho = 1; gamma = 1 / (N_S sigma_n^2) = SNR
    inline double snr_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }
    inline double noise_variance(double snr_db, std::size_t n_s) { return 1.0 / (static_cast<double>(n_s) * snr_linear(snr_db)); }

    // Root of every random stream in one trial. Mixing the trial index through the
    // stream hash keeps the trial sets of different base seeds disjoint.
    inline StreamSeed trial_root(std::uint64_t seed, std::size_t trial_index)
    {
        return StreamSeed(seed).child("trial", static_cast<std::uint64_t>(trial_index));
    }

    // Codebook pairs for every configured kind, built once per sweep
    struct SweepContext
    {
        SystemConfig cfg;
        std::vector<Codebook> tx_cb, rx_cb; // parallel to cfg.codebooks

        explicit SweepContext(SystemConfig c) : cfg(std::move(c))
        {
            cfg.validate();
            for (auto kind : cfg.codebooks)
            {
                tx_cb.push_back(make_codebook(kind, cfg.codebook_size(kind, cfg.n_t), cfg.n_t));
                rx_cb.push_back(make_codebook(kind, cfg.codebook_size(kind, cfg.n_r), cfg.n_r));
            }
        }

        std::size_t num_cells() const { return cfg.codebooks.size() * cfg.criteria.size() * cfg.m.size() * cfg.snr_db.size(); }

        std::size_t cell(std::size_t cb, std::size_t crit, std::size_t m, std::size_t snr) const
        {
            return ((cb * cfg.criteria.size() + crit) * cfg.m.size() + m) * cfg.snr_db.size() + snr;
        }

        std::size_t ref_cell(std::size_t cb, std::size_t snr) const { return cb * cfg.snr_db.size() + snr; }
    };

    struct TrialResult
    {
        std::size_t trial_index = 0;
        std::vector<double> dbf;                  // per SNR
        std::vector<double> pro;                  // per cell, NaN on failure
        std::vector<double> ref;                  // per (codebook, SNR) when the reference is enabled
        std::vector<ApproximationTerms> approx;   // per cell, filled for noise-free eig cells
        std::vector<std::size_t> selected_flat;   // per cell, winning flat index
        double worst_tx_residual = 0.0;           // power-constraint audit of every proposed-method output
        double worst_rx_residual = 0.0;
        std::size_t failures = 0;
        std::vector<std::string> errors;
    };

    namespace detail
    {
        inline std::vector<ComplexMatrix> gather_all(const CouplingTensor &t, const std::vector<std::size_t> &rx, const std::vector<std::size_t> &tx)
        {
            std::vector<ComplexMatrix> out(t.num_subcarriers());
            for (std::size_t k = 0; k < t.num_subcarriers(); ++k)
                gather(t.y[k], rx, tx, out[k]);
            return out;
        }
    } // namespace detail

    // One channel draw with every configured method, codebook, criterion, M and SNR.
    // The noise pattern of the training phase is shared by all SNR points.
    inline TrialResult run_trial(const SweepContext &ctx, std::size_t trial_index)
    {
        const SystemConfig &cfg = ctx.cfg;
        const std::size_t n_snr = cfg.snr_db.size();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const StreamSeed root = trial_root(cfg.seed, trial_index);

        TrialResult tr;
        tr.trial_index = trial_index;
        tr.pro.assign(ctx.num_cells(), nan);
        tr.approx.assign(ctx.num_cells(), ApproximationTerms{});
        tr.selected_flat.assign(ctx.num_cells(), 0);
        if (cfg.reference)
            tr.ref.assign(cfg.codebooks.size() * n_snr, nan);

        Rng chan_rng = root.child("channel").engine();
        const ChannelRealization ch = sample_channel(cfg, chan_rng);

        std::vector<double> sigma2(n_snr), gamma(n_snr);
        for (std::size_t s = 0; s < n_snr; ++s)
        {
            sigma2[s] = noise_variance(cfg.snr_db[s], cfg.n_s);
            gamma[s] = snr_linear(cfg.snr_db[s]);
        }

        const auto eigs = dbf_eigenvalues(ch, cfg.n_s);
        for (std::size_t s = 0; s < n_snr; ++s)
            tr.dbf.push_back(fully_digital_rate(eigs, gamma[s]).mean_bits_per_s_hz);

        std::vector<SvdResult> svds;
        if (cfg.reference)
            svds = channel_svds(ch, cfg.n_s);

        auto fail = [&](const std::string &what) {
            ++tr.failures;
            tr.errors.push_back(what);
        };

        for (std::size_t ci = 0; ci < cfg.codebooks.size(); ++ci)
        {
            const Codebook &tx_cb = ctx.tx_cb[ci];
            const Codebook &rx_cb = ctx.rx_cb[ci];
            const CouplingTensor signal = training_signal(ch, tx_cb, rx_cb);
            // W_P^H H[k] F_P for any codebook beams is a gather from the noise-free couplings
            std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, std::vector<ComplexMatrix>> projected;
            auto projection = [&](const BeamformerSet &bf) -> const std::vector<ComplexMatrix> & {
                auto key = std::make_pair(bf.rx_beams, bf.tx_beams);
                auto it = projected.find(key);
                if (it == projected.end())
                    it = projected.emplace(key, detail::gather_all(signal, bf.rx_beams, bf.tx_beams)).first;
                return it->second;
            };

            if (cfg.reference)
            {
                try
                {
                    const BeamformerSet ref = reference_beamformers(svds, tx_cb, rx_cb, cfg.n_rf, cfg.n_s);
                    const auto &p = projection(ref);
                    for (std::size_t s = 0; s < n_snr; ++s)
                        tr.ref[ctx.ref_cell(ci, s)] = achievable_rate_projected(p, ref, sigma2[s]).mean_bits_per_s_hz;
                }
                catch (const numerical_error &e)
                {
                    fail(std::string("reference: ") + e.what());
                }
            }

            std::vector<ComplexMatrix> unit_noise;
            if (!cfg.noise_free_training)
                unit_noise = unit_training_noise(rx_cb.num_beams(), tx_cb.num_beams(), cfg.k, root.child("training", ci));

            auto evaluate = [&](std::size_t cell, std::size_t s, const CouplingTensor &, const CandidateSets &sets, const SelectionResult &sel,
                                std::map<std::size_t, BeamformerSet> &bf_cache, Criterion crit) {
                auto it = bf_cache.find(sel.flat_index);
                if (it == bf_cache.end())
                {
                    BeamformerSet bf = digital_beamforming(sel.estimate, tx_cb, rx_cb, sets, cfg.n_s);
                    const PowerAudit audit = audit_power_constraints(bf, equal_power(cfg.n_s));
                    tr.worst_tx_residual = std::max(tr.worst_tx_residual, audit.worst_tx);
                    tr.worst_rx_residual = std::max(tr.worst_rx_residual, audit.worst_rx);
                    it = bf_cache.emplace(sel.flat_index, std::move(bf)).first;
                }
                const BeamformerSet &bf = it->second;
                const auto &p = projection(bf);
                tr.pro[cell] = achievable_rate_projected(p, bf, sigma2[s]).mean_bits_per_s_hz;
                tr.selected_flat[cell] = sel.flat_index;
                if (cfg.noise_free_training && crit == Criterion::eig)
                {
                    const ComplexMatrix bfw = inv_sqrt_hermitian(tx_cb.gram(bf.tx_beams));
                    const ComplexMatrix bww = inv_sqrt_hermitian(rx_cb.gram(bf.rx_beams));
                    std::vector<ComplexMatrix> he;
                    he.reserve(p.size());
                    for (const auto &x : p)
                        he.emplace_back(bww * x * bfw);
                    tr.approx[cell] = approximation_terms(he, gamma[s], cfg.n_s);
                }
            };

            if (cfg.noise_free_training)
            {
                // one tensor for all SNR points; only eig depends on gamma
                for (std::size_t mi = 0; mi < cfg.m.size(); ++mi)
                {
                    const CandidateSets sets = initial_beam_selection(signal, cfg.m[mi], cfg.n_rf);
                    for (std::size_t ki = 0; ki < cfg.criteria.size(); ++ki)
                    {
                        const Criterion crit = cfg.criteria[ki];
                        std::map<std::size_t, BeamformerSet> bf_cache;
                        try
                        {
                            const auto sels = select_beams_multi(signal, sets, crit, gamma, tx_cb, rx_cb, cfg.n_s);
                            for (std::size_t s = 0; s < n_snr; ++s)
                            {
                                const std::size_t cell = ctx.cell(ci, ki, mi, s);
                                try
                                {
                                    evaluate(cell, s, signal, sets, sels[s], bf_cache, crit);
                                }
                                catch (const numerical_error &e)
                                {
                                    fail(e.what());
                                }
                            }
                        }
                        catch (const numerical_error &e)
                        {
                            for (std::size_t s = 0; s < n_snr; ++s)
                                fail(e.what());
                        }
                    }
                }
            }
            else
            {
                for (std::size_t s = 0; s < n_snr; ++s)
                {
                    const CouplingTensor y = add_training_noise(signal, unit_noise, sigma2[s]);
                    for (std::size_t mi = 0; mi < cfg.m.size(); ++mi)
                    {
                        const CandidateSets sets = initial_beam_selection(y, cfg.m[mi], cfg.n_rf);
                        for (std::size_t ki = 0; ki < cfg.criteria.size(); ++ki)
                        {
                            const std::size_t cell = ctx.cell(ci, ki, mi, s);
                            std::map<std::size_t, BeamformerSet> bf_cache;
                            try
                            {
                                const SelectionResult sel = select_beams(y, sets, cfg.criteria[ki], gamma[s], tx_cb, rx_cb, cfg.n_s);
                                evaluate(cell, s, y, sets, sel, bf_cache, cfg.criteria[ki]);
                            }
                            catch (const numerical_error &e)
                            {
                                fail(e.what());
                            }
                        }
                    }
                }
            }
        }
        return tr;
    }

    inline TrialResult run_trial(const SystemConfig &cfg, std::size_t trial_index)
    {
        return run_trial(SweepContext(cfg), trial_index);
    }

    struct SweepRow
    {
        double snr_db = 0.0;
        std::string codebook;
        std::string criterion; // eig, fro, det, or omp for the reference
        std::size_t m = 0;     // 0 for the reference
        std::size_t trials = 0; // trials that produced a rate
        double mean_rate = 0.0;
        double dbf_mean_rate = 0.0;
        double normalized_rate = 0.0;   // ratio of the ensemble means
        double ci95_halfwidth = 0.0;    // of mean_rate
        double mean_of_ratios = 0.0;    // alternative normalisation, not in the CSV
        std::size_t failures = 0;
    };

    struct SweepResult
    {
        std::vector<SweepRow> rows;
        std::vector<TrialResult> trials; // ascending trial index
        std::size_t total_failures = 0;
        std::size_t max_cell_failures = 0;
        double worst_tx_residual = 0.0;
        double worst_rx_residual = 0.0;

        // true when some cell lost more than 1% of its trials
        bool failure_budget_exceeded(std::size_t n_trials) const
        {
            return static_cast<double>(max_cell_failures) > 0.01 * static_cast<double>(n_trials);
        }
    };

    namespace detail
    {
        inline SweepRow aggregate(const std::vector<TrialResult> &trials, double snr_db, std::size_t snr_index,
                                  const std::string &cb, const std::string &crit, std::size_t m,
                                  const std::vector<double> TrialResult::*field, std::size_t idx)
        {
            SweepRow r;
            r.snr_db = snr_db;
            r.codebook = cb;
            r.criterion = crit;
            r.m = m;
            double sum = 0.0, sum_dbf = 0.0, sum_ratio = 0.0;
            std::vector<double> vals;
            for (const auto &t : trials)
            {
                const double v = (t.*field)[idx];
                if (std::isnan(v))
                {
                    ++r.failures;
                    continue;
                }
                vals.push_back(v);
                sum += v;
                sum_dbf += t.dbf[snr_index];
                sum_ratio += t.dbf[snr_index] > 0.0 ? v / t.dbf[snr_index] : 0.0;
            }
            r.trials = vals.size();
            if (r.trials == 0)
            {
                r.mean_rate = r.dbf_mean_rate = r.normalized_rate = r.ci95_halfwidth = r.mean_of_ratios =
                    std::numeric_limits<double>::quiet_NaN();
                return r;
            }
            const double n = static_cast<double>(r.trials);
            r.mean_rate = sum / n;
            r.dbf_mean_rate = sum_dbf / n;
            r.normalized_rate = r.dbf_mean_rate > 0.0 ? r.mean_rate / r.dbf_mean_rate : 0.0;
            r.mean_of_ratios = sum_ratio / n;
            if (r.trials > 1)
            {
                double sq = 0.0;
                for (double v : vals)
                    sq += (v - r.mean_rate) * (v - r.mean_rate);
                r.ci95_halfwidth = 1.96 * std::sqrt(sq / (n - 1.0) / n);
            }
            return r;
        }
    } // namespace detail

    // Trials run on `cfg.workers` threads; every trial fills its own slot and the
    // aggregation walks the slots in ascending order, so the worker count never changes the output.
    inline SweepResult run_sweep(const SystemConfig &cfg)
    {
        const SweepContext ctx(cfg);
        const std::size_t n = cfg.trials;
        std::vector<TrialResult> trials(n);
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;

        auto worker = [&] {
            while (true)
            {
                const std::size_t t = next.fetch_add(1);
                if (t >= n)
                    return;
                try
                {
                    trials[t] = run_trial(ctx, t);
                }
                catch (const numerical_error &e)
                {
                    // a failure outside any single cell loses the whole trial
                    TrialResult tr;
                    tr.trial_index = t;
                    tr.dbf.assign(cfg.snr_db.size(), std::numeric_limits<double>::quiet_NaN());
                    tr.pro.assign(ctx.num_cells(), std::numeric_limits<double>::quiet_NaN());
                    tr.approx.assign(ctx.num_cells(), ApproximationTerms{});
                    tr.selected_flat.assign(ctx.num_cells(), 0);
                    if (cfg.reference)
                        tr.ref.assign(cfg.codebooks.size() * cfg.snr_db.size(), std::numeric_limits<double>::quiet_NaN());
                    tr.failures = ctx.num_cells();
                    tr.errors.emplace_back(e.what());
                    trials[t] = std::move(tr);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        };

        const std::size_t nw = std::max<std::size_t>(1, std::min(cfg.workers, n));
        if (nw == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (std::size_t i = 0; i < nw; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (error)
            std::rethrow_exception(error);

        SweepResult res;
        for (const auto &t : trials)
        {
            res.total_failures += t.failures;
            res.worst_tx_residual = std::max(res.worst_tx_residual, t.worst_tx_residual);
            res.worst_rx_residual = std::max(res.worst_rx_residual, t.worst_rx_residual);
        }

        // rows: codebook, then criterion (eig, fro, det, omp), then m, then SNR, all ascending
        std::vector<std::size_t> cb_order(cfg.codebooks.size()), crit_order(cfg.criteria.size()), m_order(cfg.m.size()), snr_order(cfg.snr_db.size());
        for (std::size_t i = 0; i < cb_order.size(); ++i)
            cb_order[i] = i;
        for (std::size_t i = 0; i < crit_order.size(); ++i)
            crit_order[i] = i;
        for (std::size_t i = 0; i < m_order.size(); ++i)
            m_order[i] = i;
        for (std::size_t i = 0; i < snr_order.size(); ++i)
            snr_order[i] = i;
        std::stable_sort(cb_order.begin(), cb_order.end(), [&](auto a, auto b) { return cfg.codebooks[a] < cfg.codebooks[b]; });
        std::stable_sort(crit_order.begin(), crit_order.end(), [&](auto a, auto b) { return cfg.criteria[a] < cfg.criteria[b]; });
        std::stable_sort(m_order.begin(), m_order.end(), [&](auto a, auto b) { return cfg.m[a] < cfg.m[b]; });
        std::stable_sort(snr_order.begin(), snr_order.end(), [&](auto a, auto b) { return cfg.snr_db[a] < cfg.snr_db[b]; });

        for (auto ci : cb_order)
        {
            const std::string cb = to_string(cfg.codebooks[ci]);
            for (auto ki : crit_order)
                for (auto mi : m_order)
                    for (auto s : snr_order)
                    {
                        SweepRow r = detail::aggregate(trials, cfg.snr_db[s], s, cb, to_string(cfg.criteria[ki]), cfg.m[mi],
                                                       &TrialResult::pro, ctx.cell(ci, ki, mi, s));
                        res.max_cell_failures = std::max(res.max_cell_failures, r.failures);
                        res.rows.push_back(std::move(r));
                    }
            if (cfg.reference)
                for (auto s : snr_order)
                {
                    SweepRow r = detail::aggregate(trials, cfg.snr_db[s], s, cb, "omp", 0, &TrialResult::ref, ctx.ref_cell(ci, s));
                    res.max_cell_failures = std::max(res.max_cell_failures, r.failures);
                    res.rows.push_back(std::move(r));
                }
        }
        res.trials = std::move(trials);
        return res;
    }

    inline const char *sweep_csv_header()
    {
        return "snr_db,codebook,criterion,m,trials,mean_rate,dbf_mean_rate,normalized_rate,ci95_halfwidth";
    }

    inline std::string format_row(const SweepRow &r)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.10g,%s,%s,%zu,%zu,%.10g,%.10g,%.10g,%.10g", r.snr_db, r.codebook.c_str(), r.criterion.c_str(),
                      r.m, r.trials, r.mean_rate, r.dbf_mean_rate, r.normalized_rate, r.ci95_halfwidth);
        return buf;
    }

    // Written to a sibling temporary file and renamed into place, so an interrupted
    // run never leaves a partial CSV behind
    inline void emit_csv(const SweepResult &res, const std::string &path)
    {
        namespace fs = std::filesystem;
        const fs::path target(path);
        fs::path tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw io_error(tmp.string(), "cannot open for writing");
            out << sweep_csv_header() << '\n';
            for (const auto &r : res.rows)
                out << format_row(r) << '\n';
            out.flush();
            if (!out)
            {
                out.close();
                std::error_code ec;
                fs::remove(tmp, ec);
                throw io_error(tmp.string(), "write failed");
            }
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec)
        {
            std::error_code ec2;
            fs::remove(tmp, ec2);
            throw io_error(path, "cannot rename temporary file: " + ec.message());
        }
    }
} // namespace hbf

#endif
