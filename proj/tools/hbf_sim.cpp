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

// Monte Carlo SNR sweep. Exit codes: 0 success, 1 unexpected error, 2 configuration
// error, 3 more than 1% of the trials of some cell failed numerically, 4 I/O error.

#include "hbf.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace
{
    int run(int argc, char **argv)
    {
        CLI::App app{"hbf_sim: hybrid beamforming Monte Carlo sweep"};

        std::string config_path, snr, codebook, criterion, m, out_path = "sweep.csv", dump_dir;
        std::size_t trials = 0, workers = 0;
        std::uint64_t seed = 0;
        bool noise_free = false, reference = false, quiet = false;

        app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
        app.add_option("--snr-db", snr, "SNR list in dB, 'a,b,c' or 'start:step:stop'");
        auto *o_trials = app.add_option("--trials", trials, "Monte Carlo trials per point");
        auto *o_seed = app.add_option("--seed", seed, "base seed");
        app.add_option("--codebook", codebook, "orthogonal, weak or strong (comma separated list allowed)");
        app.add_option("--criterion", criterion, "eig, fro or det (comma separated list allowed)");
        app.add_option("--m", m, "candidate beam pairs M (comma separated list allowed)");
        app.add_flag("--noise-free", noise_free, "noise-free training couplings");
        app.add_flag("--reference", reference, "also evaluate the explicit-CSI OMP reference");
        app.add_option("--out", out_path, "output CSV path");
        auto *o_workers = app.add_option("--workers", workers, "worker threads");
        app.add_option("--dump-dir", dump_dir, "also write codebooks, the trial-0 channel and its couplings to this directory");
        app.add_flag("--quiet", quiet, "no summary on stderr");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &e)
        {
            return app.exit(e);
        }
        catch (const CLI::CallForAllHelp &e)
        {
            return app.exit(e);
        }
        catch (const CLI::ParseError &e)
        {
            app.exit(e);
            return 2;
        }

        hbf::SystemConfig cfg;
        try
        {
            if (!config_path.empty())
                cfg = hbf::load_config(config_path, cfg);
            // flags override the file
            if (!snr.empty())
                hbf::apply_setting(cfg, "snr_db", snr);
            if (!codebook.empty())
                hbf::apply_setting(cfg, "codebook", codebook);
            if (!criterion.empty())
                hbf::apply_setting(cfg, "criterion", criterion);
            if (!m.empty())
                hbf::apply_setting(cfg, "m", m);
            if (*o_trials)
                cfg.trials = trials;
            if (*o_seed)
                cfg.seed = seed;
            if (*o_workers)
                cfg.workers = workers;
            if (noise_free)
                cfg.noise_free_training = true;
            if (reference)
                cfg.reference = true;
            cfg.validate();
        }
        catch (const hbf::config_error &e)
        {
            std::cerr << "configuration error: " << e.what() << '\n';
            return 2;
        }

        if (!dump_dir.empty())
        {
            namespace fs = std::filesystem;
            std::error_code ec;
            fs::create_directories(dump_dir, ec);
            if (ec)
                throw hbf::io_error(dump_dir, ec.message());
            const hbf::SweepContext ctx(cfg);
            for (std::size_t i = 0; i < cfg.codebooks.size(); ++i)
            {
                const std::string name = hbf::to_string(cfg.codebooks[i]);
                ctx.tx_cb[i].write_csv((fs::path(dump_dir) / ("codebook_" + name + "_tx.csv")).string());
                ctx.rx_cb[i].write_csv((fs::path(dump_dir) / ("codebook_" + name + "_rx.csv")).string());
            }
            hbf::Rng rng = hbf::trial_root(cfg.seed, 0).child("channel").engine();
            const auto ch = hbf::sample_channel(cfg, rng);
            hbf::write_channel_csv(ch, (fs::path(dump_dir) / "channel_trial0.csv").string());
            const auto y = hbf::training_signal(ch, ctx.tx_cb.front(), ctx.rx_cb.front());
            hbf::write_coupling_csv(y, (fs::path(dump_dir) / "couplings_trial0_noise_free.csv").string());
        }

        const hbf::SweepResult res = hbf::run_sweep(cfg);
        hbf::emit_csv(res, out_path);

        if (!quiet)
        {
            std::fprintf(stderr, "%zu trials, %zu rows written to %s, %zu cell failures (worst cell %zu)\n", cfg.trials, res.rows.size(),
                         out_path.c_str(), res.total_failures, res.max_cell_failures);
            std::fprintf(stderr, "power constraint residuals: tx %.3g, rx %.3g\n", res.worst_tx_residual, res.worst_rx_residual);
        }
        if (res.failure_budget_exceeded(cfg.trials))
        {
            std::fprintf(stderr, "numerical failure budget exceeded: %zu of %zu trials failed in one cell\n", res.max_cell_failures, cfg.trials);
            for (const auto &t : res.trials)
                for (const auto &e : t.errors)
                {
                    std::fprintf(stderr, "  trial %zu: %s\n", t.trial_index, e.c_str());
                    break;
                }
            return 3;
        }
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const hbf::config_error &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const hbf::io_error &e)
    {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
