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

#ifndef HBF_MATKERNEL_HPP
#define HBF_MATKERNEL_HPP

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

// Dense complex small-matrix kernel. All functions are pure and thread-safe.

namespace hbf
{
    using cplx = std::complex<double>;
    using ComplexMatrix = Eigen::MatrixXcd;
    using ComplexVector = Eigen::VectorXcd;
    using RealVector = Eigen::VectorXd;

    // Thin SVD: a = left * diag(singular_values) * right^H, singular values descending.
    // Phase convention: the largest-magnitude entry of every left-singular vector is real positive.
    struct SvdResult
    {
        ComplexMatrix left;
        RealVector singular_values;
        ComplexMatrix right;
    };

    inline std::string dims(const ComplexMatrix &a)
    {
        return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
    }

    inline bool all_finite(const ComplexMatrix &a)
    {
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag()))
                    return false;
        return true;
    }

    inline void require_nonempty(const ComplexMatrix &a, const char *what)
    {
        if (a.rows() < 1 || a.cols() < 1)
            throw argument_error(std::string(what) + ": empty matrix");
    }

    inline void require_square(const ComplexMatrix &a, const char *what)
    {
        require_nonempty(a, what);
        if (a.rows() != a.cols())
            throw argument_error(std::string(what) + ": square matrix required, got " + dims(a));
    }

    namespace detail
    {
        // Rotate each column pair (u_j, v_j) by the same unit phase so that the
        // largest-magnitude entry of u_j becomes real positive.
        inline void fix_phase(ComplexMatrix &left, ComplexMatrix &right)
        {
            for (Eigen::Index j = 0; j < left.cols(); ++j)
            {
                Eigen::Index imax = 0;
                double best = -1.0;
                for (Eigen::Index i = 0; i < left.rows(); ++i)
                {
                    const double m = std::norm(left(i, j));
                    if (m > best * (1.0 + 1e-12)) // first index wins near-ties
                    {
                        best = m;
                        imax = i;
                    }
                }
                if (best <= 0.0)
                    continue;
                const cplx p = std::conj(left(imax, j)) / std::abs(left(imax, j));
                left.col(j) *= p;
                if (j < right.cols())
                    right.col(j) *= p;
                left(imax, j) = cplx(left(imax, j).real(), 0.0);
            }
        }
    } // namespace detail

    inline SvdResult svd(const ComplexMatrix &a)
    {
        require_nonempty(a, "svd");
        if (!all_finite(a))
            throw argument_error("svd: non-finite entry in " + dims(a) + " matrix");

        Eigen::BDCSVD<ComplexMatrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (dec.info() != Eigen::Success)
            throw svd_error(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()), "no convergence");

        SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
        detail::fix_phase(out.left, out.right);
        return out;
    }

    // Leading `count` singular triplets through the Hermitian eigendecomposition of
    // a^H a (or a a^H, whichever is smaller). Same phase convention as svd().
    // Accurate for the dominant subspace; not meant for resolving tiny singular values.
    inline SvdResult leading_svd(const ComplexMatrix &a, Eigen::Index count)
    {
        require_nonempty(a, "leading_svd");
        const Eigen::Index r = std::min(a.rows(), a.cols());
        if (count < 1 || count > r)
            throw argument_error("leading_svd: count out of range for " + dims(a));
        if (!all_finite(a))
            throw argument_error("leading_svd: non-finite entry in " + dims(a) + " matrix");

        const bool wide = a.cols() > a.rows();
        const ComplexMatrix g = wide ? ComplexMatrix(a * a.adjoint()) : ComplexMatrix(a.adjoint() * a);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g);
        if (es.info() != Eigen::Success)
            throw svd_error(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()), "eigensolver failed");

        SvdResult out;
        out.singular_values.resize(count);
        ComplexMatrix vecs(g.rows(), count);
        for (Eigen::Index j = 0; j < count; ++j)
        {
            const Eigen::Index src = g.rows() - 1 - j; // ascending order from Eigen
            out.singular_values(j) = std::sqrt(std::max(es.eigenvalues()(src), 0.0));
            vecs.col(j) = es.eigenvectors().col(src);
        }

        ComplexMatrix other = wide ? ComplexMatrix(a.adjoint() * vecs) : ComplexMatrix(a * vecs);
        for (Eigen::Index j = 0; j < count; ++j)
        {
            const double s = out.singular_values(j);
            if (s > 0.0)
                other.col(j) /= s;
        }
        if (wide)
        {
            out.left = std::move(vecs);
            out.right = std::move(other);
        }
        else
        {
            out.left = std::move(other);
            out.right = std::move(vecs);
        }
        detail::fix_phase(out.left, out.right);
        return out;
    }

    // Hermitian check, elementwise, relative to the largest entry magnitude
    inline bool is_hermitian(const ComplexMatrix &a, double tol = 1e-12)
    {
        if (a.rows() != a.cols())
            return false;
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
    }

    // B = a^{-1/2} for Hermitian positive definite a, via eigendecomposition.
    // No eigenvalue clamping: an eigenvalue ratio below 1e-10 is an error.
    inline ComplexMatrix inv_sqrt_hermitian(const ComplexMatrix &a,
                                            std::size_t candidate = ill_conditioned_gram::npos,
                                            const std::string &side = {})
    {
        require_square(a, "inv_sqrt_hermitian");
        if (!all_finite(a))
            throw argument_error("inv_sqrt_hermitian: non-finite entry");
        if (!is_hermitian(a))
            throw argument_error("inv_sqrt_hermitian: matrix is not Hermitian");

        if (a.rows() == 1)
        {
            const double v = a(0, 0).real();
            if (!(v > 0.0))
                throw ill_conditioned_gram(v, v, candidate, side);
            return ComplexMatrix::Constant(1, 1, cplx(1.0 / std::sqrt(v), 0.0));
        }

        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
        if (es.info() != Eigen::Success)
            throw numerical_error("inv_sqrt_hermitian: eigensolver failed for " + dims(a));
        const RealVector &ev = es.eigenvalues();
        const double lo = ev.minCoeff(), hi = ev.maxCoeff();
        if (!(hi > 0.0) || lo <= 1e-10 * hi)
            throw ill_conditioned_gram(lo, hi, candidate, side);

        const RealVector d = ev.cwiseSqrt().cwiseInverse();
        ComplexMatrix b = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
        // exact Hermitian symmetry
        return 0.5 * (b + b.adjoint());
    }

    inline double frobenius_sq(const ComplexMatrix &a)
    {
        return a.squaredNorm();
    }

    inline double det_abs_sq(const ComplexMatrix &a)
    {
        require_square(a, "det_abs_sq");
        if (a.rows() == 1)
            return std::norm(a(0, 0));
        if (a.rows() == 2)
            return std::norm(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
        return std::norm(a.partialPivLu().determinant());
    }

    inline ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b)
    {
        require_nonempty(a, "kron");
        require_nonempty(b, "kron");
        ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

    // Column-major vectorisation
    inline ComplexVector vec(const ComplexMatrix &a)
    {
        return Eigen::Map<const ComplexVector>(a.data(), a.size());
    }

    // Squared singular values of a small matrix, descending.
    // 2x2 uses the closed form of the eigenvalues of a^H a.
    inline RealVector squared_singular_values(const ComplexMatrix &a)
    {
        require_nonempty(a, "squared_singular_values");
        if (a.rows() == 1 || a.cols() == 1)
        {
            RealVector out(1);
            out(0) = a.squaredNorm();
            return out;
        }
        if (a.rows() == 2 && a.cols() == 2)
        {
            const double t = a.squaredNorm();
            const double d = std::norm(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
            const double disc = std::sqrt(std::max(t * t - 4.0 * d, 0.0));
            RealVector out(2);
            out(0) = 0.5 * (t + disc);
            // small root from the product to avoid cancellation
            out(1) = out(0) > 0.0 ? d / out(0) : 0.0;
            return out;
        }
        const ComplexMatrix g = a.cols() <= a.rows() ? ComplexMatrix(a.adjoint() * a) : ComplexMatrix(a * a.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g, Eigen::EigenvaluesOnly);
        RealVector ev = es.eigenvalues().reverse();
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            ev(i) = std::max(ev(i), 0.0);
        return ev;
    }

    // Largest `count` eigenvalues of the Hermitian PSD matrix a a^H, descending
    inline RealVector leading_gram_eigenvalues(const ComplexMatrix &a, Eigen::Index count)
    {
        require_nonempty(a, "leading_gram_eigenvalues");
        const ComplexMatrix g = a.cols() < a.rows() ? ComplexMatrix(a.adjoint() * a) : ComplexMatrix(a * a.adjoint());
        if (count < 1 || count > g.rows())
            throw argument_error("leading_gram_eigenvalues: count out of range");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g, Eigen::EigenvaluesOnly);
        RealVector out(count);
        for (Eigen::Index j = 0; j < count; ++j)
            out(j) = std::max(es.eigenvalues()(g.rows() - 1 - j), 0.0);
        return out;
    }
} // namespace hbf

#endif
