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

#include <Eigen/QR>
#include <filesystem>
#include <fstream>
#include <set>

using namespace hbf;
using Catch::Approx;

namespace
{
    struct PlainOmp
    {
        std::vector<std::size_t> picks;
        ComplexMatrix fp;
        std::vector<ComplexMatrix> fb;
    };

    // loop-level rewrite with a pseudo-inverse projector
    PlainOmp plain_omp(const std::vector<ComplexMatrix> &v, const ComplexMatrix &atoms, std::size_t n_rf)
    {
        PlainOmp o;
        std::vector<ComplexMatrix> res = v;
        const Eigen::Index n = atoms.rows();
        for (std::size_t it = 0; it < n_rf; ++it)
        {
            double best = -1.0;
            std::size_t arg = 0;
            for (Eigen::Index j = 0; j < atoms.cols(); ++j)
            {
                if (std::find(o.picks.begin(), o.picks.end(), std::size_t(j)) != o.picks.end())
                    continue;
                double s = 0.0;
                for (const auto &r : res)
                    for (Eigen::Index c = 0; c < r.cols(); ++c)
                    {
                        cplx ip = 0.0;
                        for (Eigen::Index i = 0; i < n; ++i)
                            ip += std::conj(atoms(i, j)) * r(i, c);
                        s += std::norm(ip);
                    }
                if (s > best)
                {
                    best = s;
                    arg = std::size_t(j);
                }
            }
            o.picks.push_back(arg);
            o.fp.conservativeResize(n, Eigen::Index(o.picks.size()));
            o.fp.col(o.fp.cols() - 1) = atoms.col(Eigen::Index(arg));
            const ComplexMatrix pinv = o.fp.completeOrthogonalDecomposition().pseudoInverse();
            for (std::size_t k = 0; k < v.size(); ++k)
            {
                res[k] = v[k] - o.fp * (pinv * v[k]);
                if (res[k].norm() >= 1e-12)
                    res[k] /= res[k].norm();
            }
        }
        const ComplexMatrix pinv = o.fp.completeOrthogonalDecomposition().pseudoInverse();
        for (const auto &t : v)
        {
            ComplexMatrix b = pinv * t;
            b *= std::sqrt(double(t.cols())) / (o.fp * b).norm();
            o.fb.push_back(b);
        }
        return o;
    }

    std::vector<ComplexMatrix> random_targets(std::size_t k, Eigen::Index n, Eigen::Index ns, std::uint64_t seed)
    {
        std::vector<ComplexMatrix> out;
        for (std::size_t i = 0; i < k; ++i)
            out.push_back(Eigen::HouseholderQR<ComplexMatrix>(test::random_matrix(n, n, seed + i)).householderQ() * ComplexMatrix::Identity(n, ns));
        return out;
    }
} // namespace

TEST_CASE("reference - omp matches a plain re-implementation")
{
    const Codebook cbs[] = {orthogonal_codebook(8), weak_coherent_codebook(10, 8), strong_coherent_codebook(8, 8)};
    for (const Codebook &cb : cbs)
        for (std::uint64_t seed : {1u, 50u, 99u})
        {
            const auto v = random_targets(6, 8, 2, seed);
            for (std::size_t n_rf : {2u, 3u, 4u})
            {
                const OmpResult r = omp_hybrid(v, cb, n_rf);
                const PlainOmp o = plain_omp(v, cb.beams(), n_rf);
                CHECK(r.selected_indices == o.picks);
                CHECK(test::max_abs_diff(r.analog, o.fp) < 1e-14);
                for (std::size_t k = 0; k < v.size(); ++k)
                    CHECK(test::max_abs_diff(r.digital[k], o.fb[k]) < 1e-8);
            }
        }
}

TEST_CASE("reference - a grid target is recovered exactly")
{
    const Codebook cb = orthogonal_codebook(8);
    std::vector<ComplexMatrix> v(4, ComplexMatrix(cb.beam(3)));
    const OmpResult r = omp_hybrid(v, cb, 2);
    REQUIRE(r.selected_indices.size() == 2);
    CHECK(r.selected_indices[0] == 3);
    CHECK(r.selected_indices[1] != 3);
    CHECK(r.residual_history[0] < 1e-24);
    CHECK(r.residual_history[1] < 1e-24);
    for (const auto &fb : r.digital)
        CHECK(test::max_abs_diff(r.analog * fb, v[0]) < 1e-12);
}

TEST_CASE("reference - a two-atom subspace is reproduced")
{
    const Codebook cb = orthogonal_codebook(8);
    ComplexMatrix basis(8, 2);
    basis << cb.beam(2), cb.beam(6);
    std::vector<ComplexMatrix> v;
    for (std::uint64_t s = 0; s < 3; ++s)
    {
        const ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(test::random_matrix(2, 2, s)).householderQ();
        v.push_back(basis * q);
    }
    const OmpResult r = omp_hybrid(v, cb, 2);
    const std::set<std::size_t> got(r.selected_indices.begin(), r.selected_indices.end());
    CHECK(got == std::set<std::size_t>{2, 6});
    CHECK(r.residual_history.back() < 1e-24);
    for (std::size_t k = 0; k < v.size(); ++k)
        CHECK(test::max_abs_diff(r.analog * r.digital[k], v[k]) < 1e-12);
}

TEST_CASE("reference - power constraint and distinct atoms on random channels")
{
    const SystemConfig cfg = test::small_config();
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        Rng rng = StreamSeed(seed).engine();
        const ChannelRealization ch = sample_channel(cfg, rng);
        const Codebook cb = strong_coherent_codebook(8, 8);
        const ReferenceResult r = reference_solution(channel_svds(ch, 2), cb, cb, 2, 2);
        for (const OmpResult *o : {&r.precoder, &r.combiner})
        {
            CHECK(o->selected_indices[0] != o->selected_indices[1]);
            for (std::size_t i = 1; i < o->residual_history.size(); ++i)
                CHECK(o->residual_history[i] <= o->residual_history[i - 1] * (1 + 1e-12));
            for (const auto &fb : o->digital)
                CHECK((o->analog * fb).squaredNorm() == Approx(2.0).epsilon(1e-12));
        }
        CHECK(r.beamformers.tx_beams == r.precoder.selected_indices);
        CHECK(r.beamformers.rx_beams == r.combiner.selected_indices);
    }
}

TEST_CASE("reference - channel svds agree with the full decomposition")
{
    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(9).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const auto s = channel_svds(ch, 2);
    REQUIRE(s.size() == cfg.k);
    for (std::size_t k = 0; k < cfg.k; k += 3)
    {
        const SvdResult full = svd(ch.per_subcarrier[k]);
        CHECK(s[k].singular_values(0) == Approx(full.singular_values(0)).epsilon(1e-10));
        CHECK(s[k].singular_values(1) == Approx(full.singular_values(1)).epsilon(1e-10));
        CHECK(std::abs(s[k].left.col(0).dot(full.left.col(0))) == Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("reference - single path is captured by both sides")
{
    const Codebook cb = orthogonal_codebook(8);
    ClusterParams p;
    p.num_clusters = p.rays_per_cluster = 1;
    p.gains = {1.0};
    p.delays = {2};
    p.aoa_deg = p.mean_aoa_deg = {cb.steering_angles()[5]};
    p.aod_deg = p.mean_aod_deg = {cb.steering_angles()[1]};
    p.ray_offsets = {0.0};
    const ChannelRealization ch = build_channel(p, 8, 8, 4);
    const ReferenceResult r = reference_solution(channel_svds(ch, 1), cb, cb, 2, 1);
    CHECK(r.precoder.selected_indices[0] == 1);
    CHECK(r.combiner.selected_indices[0] == 5);
    for (std::size_t k = 0; k < 4; ++k)
    {
        const ComplexMatrix g = (r.beamformers.rx_analog * r.beamformers.rx_digital[k]).adjoint() * ch.per_subcarrier[k] *
                                r.beamformers.tx_analog * r.beamformers.tx_digital[k];
        CHECK(std::abs(g(0, 0)) == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("reference - argument checks and trace export")
{
    const Codebook cb = orthogonal_codebook(4);
    const auto v = random_targets(2, 4, 2, 3);
    CHECK_THROWS_AS(omp_hybrid(v, cb, 5), argument_error);
    CHECK_THROWS_AS(omp_hybrid(v, orthogonal_codebook(8), 2), argument_error);
    CHECK_THROWS_AS(omp_hybrid({}, cb, 2), argument_error);
    std::vector<ComplexMatrix> mixed = {v[0], v[1].leftCols(1)};
    CHECK_THROWS_AS(omp_hybrid(mixed, cb, 2), argument_error);

    const SystemConfig cfg = test::small_config();
    Rng rng = StreamSeed(2).engine();
    const ChannelRealization ch = sample_channel(cfg, rng);
    const Codebook c8 = orthogonal_codebook(8);
    CHECK_THROWS_AS(reference_beamformers(ch, cb, c8, 2, 2), argument_error);
    const ReferenceResult r = reference_solution(channel_svds(ch, 2), c8, c8, 2, 2);
    const auto path = (std::filesystem::temp_directory_path() / "hbf_omp_trace.csv").string();
    write_omp_trace_csv(r, c8, c8, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "side,iteration,beam,angle_deg,residual");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 4);
    std::filesystem::remove(path);
}
