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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hbf;
using Catch::Approx;

namespace
{
    std::string to_csv(const SweepResult &r)
    {
        std::ostringstream s;
        s << sweep_csv_header() << '\n';
        for (const auto &row : r.rows)
            s << format_row(row) << '\n';
        return s.str();
    }

    SystemConfig harness_config()
    {
        SystemConfig c = test::small_config();
        c.trials = 4;
        c.codebooks = {CodebookKind::orthogonal, CodebookKind::weak};
        c.criteria = {Criterion::eig, Criterion::det};
        c.reference = true;
        return c;
    }
} // namespace

TEST_CASE("harness - noise variance from the SNR")
{
    CHECK(snr_linear(10.0) == Approx(10.0));
    CHECK(noise_variance(0.0, 2) == Approx(0.5));
    CHECK(noise_variance(10.0, 2) == Approx(0.05));
    CHECK(noise_variance(-20.0, 1) == Approx(100.0));
}

TEST_CASE("harness - noisy trial matches a hand-built pipeline")
{
    SystemConfig cfg = harness_config();
    const SweepContext ctx(cfg);
    for (std::size_t t : {0u, 3u})
    {
        const TrialResult tr = run_trial(ctx, t);
        const StreamSeed root = trial_root(cfg.seed, t);
        Rng rng = root.child("channel").engine();
        const ChannelRealization ch = sample_channel(cfg, rng);
        for (std::size_t ci = 0; ci < cfg.codebooks.size(); ++ci)
        {
            const Codebook &tx = ctx.tx_cb[ci], &rx = ctx.rx_cb[ci];
            for (std::size_t s = 0; s < cfg.snr_db.size(); ++s)
            {
                const double sigma2 = noise_variance(cfg.snr_db[s], cfg.n_s);
                const double gamma = snr_linear(cfg.snr_db[s]);
                const CouplingTensor y = simulate_training(ch, tx, rx, sigma2, false, root.child("training", ci));
                for (std::size_t ki = 0; ki < cfg.criteria.size(); ++ki)
                    for (std::size_t mi = 0; mi < cfg.m.size(); ++mi)
                    {
                        const HybridResult h = hybrid_beamforming(y, tx, rx, cfg.m[mi], cfg.n_rf, cfg.n_s, cfg.criteria[ki], gamma);
                        const double rate = achievable_rate(ch, h.beamformers, sigma2).mean_bits_per_s_hz;
                        const std::size_t cell = ctx.cell(ci, ki, mi, s);
                        CHECK(tr.pro[cell] == Approx(rate).epsilon(1e-10));
                        CHECK(tr.selected_flat[cell] == h.selection.flat_index);
                        CHECK(tr.pro[cell] <= tr.dbf[s] + 1e-9);
                    }
                const BeamformerSet ref = reference_beamformers(ch, tx, rx, cfg.n_rf, cfg.n_s);
                CHECK(tr.ref[ctx.ref_cell(ci, s)] == Approx(achievable_rate(ch, ref, sigma2).mean_bits_per_s_hz).epsilon(1e-10));
                CHECK(tr.dbf[s] == Approx(fully_digital_rate(ch, gamma, cfg.n_s).mean_bits_per_s_hz).epsilon(1e-12));
            }
        }
        CHECK(tr.failures == 0);
        CHECK(tr.worst_tx_residual < 1e-10);
        CHECK(tr.worst_rx_residual < 1e-10);
    }
}

TEST_CASE("harness - noise-free trial and approximation terms")
{
    SystemConfig cfg = harness_config();
    cfg.noise_free_training = true;
    cfg.m = {2, 3, 4};
    const SweepContext ctx(cfg);
    const TrialResult tr = run_trial(ctx, 1);
    Rng rng = trial_root(cfg.seed, 1).child("channel").engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s)
    {
        const double gamma = snr_linear(cfg.snr_db[s]);
        const double sigma2 = noise_variance(cfg.snr_db[s], cfg.n_s);
        for (std::size_t mi = 0; mi < cfg.m.size(); ++mi)
        {
            const std::size_t cell = ctx.cell(1, 0, mi, s);
            const HybridResult h = hybrid_beamforming(training_signal(ch, ctx.tx_cb[1], ctx.rx_cb[1]), ctx.tx_cb[1], ctx.rx_cb[1], cfg.m[mi], 2, 2,
                                                      Criterion::eig, gamma);
            CHECK(tr.pro[cell] == Approx(achievable_rate(ch, h.beamformers, sigma2).mean_bits_per_s_hz).epsilon(1e-10));
            const ApproximationTerms a = approximation_terms(effective_channel(ch, h.beamformers.tx_analog, h.beamformers.rx_analog), gamma, 2);
            CHECK(tr.approx[cell].log_term == Approx(a.log_term).epsilon(1e-10));
            CHECK(tr.approx[cell].fro_sum == Approx(a.fro_sum).epsilon(1e-10));
            CHECK(tr.approx[cell].subcarriers == cfg.k);
            // det cells carry no approximation terms
            CHECK(tr.approx[ctx.cell(1, 1, mi, s)].subcarriers == 0);
            // the candidate sets are nested in M, so the noise-free eig rate never drops
            if (mi > 0)
                CHECK(tr.pro[cell] >= tr.pro[ctx.cell(1, 0, mi - 1, s)] - 1e-12);
        }
    }
}

TEST_CASE("harness - sweeps are reproducible and independent of the worker count")
{
    SystemConfig cfg = harness_config();
    const std::string a = to_csv(run_sweep(cfg));
    const std::string b = to_csv(run_sweep(cfg));
    CHECK(a == b);
    cfg.workers = 3;
    CHECK(to_csv(run_sweep(cfg)) == a);
    cfg.seed = 2;
    CHECK(to_csv(run_sweep(cfg)) != a);
}

TEST_CASE("harness - row order and aggregation")
{
    SystemConfig cfg = harness_config();
    cfg.codebooks = {CodebookKind::strong, CodebookKind::orthogonal};
    cfg.criteria = {Criterion::det, Criterion::eig};
    cfg.m = {3, 2};
    cfg.snr_db = {10, -10};
    const SweepResult r = run_sweep(cfg);
    // 2 codebooks x (2 criteria x 2 m + reference) x 2 SNR
    REQUIRE(r.rows.size() == 20);
    CHECK(r.rows[0].codebook == "orthogonal");
    CHECK(r.rows[0].criterion == "eig");
    CHECK(r.rows[0].m == 2);
    CHECK(r.rows[0].snr_db == -10.0);
    CHECK(r.rows[1].snr_db == 10.0);
    CHECK(r.rows[2].m == 3);
    CHECK(r.rows[4].criterion == "det");
    CHECK(r.rows[8].criterion == "omp");
    CHECK(r.rows[8].m == 0);
    CHECK(r.rows[10].codebook == "strong");
    CHECK(r.rows[19].criterion == "omp");
    CHECK(r.total_failures == 0);
    CHECK(!r.failure_budget_exceeded(cfg.trials));

    // rows[0] is orthogonal (context index 1), eig (index 1), m = 2 (index 1), -10 dB (index 1)
    const SweepContext ctx(cfg);
    const std::size_t cell = ctx.cell(1, 1, 1, 1);
    double sum = 0.0, sum_dbf = 0.0, sq = 0.0;
    for (const auto &t : r.trials)
    {
        sum += t.pro[cell];
        sum_dbf += t.dbf[1];
    }
    const double mean = sum / 4.0;
    for (const auto &t : r.trials)
        sq += (t.pro[cell] - mean) * (t.pro[cell] - mean);
    CHECK(r.rows[0].trials == 4);
    CHECK(r.rows[0].mean_rate == Approx(mean).epsilon(1e-12));
    CHECK(r.rows[0].dbf_mean_rate == Approx(sum_dbf / 4.0).epsilon(1e-12));
    CHECK(r.rows[0].normalized_rate == Approx(mean / (sum_dbf / 4.0)).epsilon(1e-12));
    CHECK(r.rows[0].ci95_halfwidth == Approx(1.96 * std::sqrt(sq / 3.0 / 4.0)).epsilon(1e-10));
    for (const auto &row : r.rows)
    {
        CHECK(row.normalized_rate > 0.0);
        if (row.criterion != "omp")
            CHECK(row.normalized_rate <= 1.0 + 1e-9);
    }
}

TEST_CASE("harness - failure budget")
{
    SweepResult r;
    r.max_cell_failures = 1;
    CHECK(!r.failure_budget_exceeded(100));
    CHECK(r.failure_budget_exceeded(99));
    r.max_cell_failures = 0;
    CHECK(!r.failure_budget_exceeded(1));
}

TEST_CASE("harness - csv emission")
{
    SystemConfig cfg = test::small_config();
    const SweepResult r = run_sweep(cfg);
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hbf_emit_test";
    fs::create_directories(dir);
    const fs::path out = dir / "sweep.csv";
    emit_csv(r, out.string());
    CHECK(!fs::exists(dir / "sweep.csv.tmp"));
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "snr_db,codebook,criterion,m,trials,mean_rate,dbf_mean_rate,normalized_rate,ci95_halfwidth");
    std::size_t rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == r.rows.size());
    CHECK(rows == 6);
    fs::remove_all(dir);

    CHECK_THROWS_AS(emit_csv(r, "/nonexistent/dir/sweep.csv"), io_error);
    CHECK(!fs::exists("/nonexistent/dir/sweep.csv"));
}

TEST_CASE("harness - configuration errors surface before any trial")
{
    SystemConfig cfg = test::small_config();
    cfg.m = {9};
    CHECK_THROWS_AS(run_sweep(cfg), config_error);
    cfg = test::small_config();
    cfg.n_t = 7;
    CHECK_THROWS_AS(SweepContext(cfg), config_error);
}
