// Copyright 2026 tomodesign contributors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tomo/rng.hpp"

namespace tomo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline bool is_hermitian(const CMatrix &m, double tol = 1e-12) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline CMatrix hermitize(const CMatrix &m) { return 0.5 * (m + m.adjoint()); }

/// Eigenvalues of a Hermitian matrix, ascending.
inline RVector hermitian_eigenvalues(const CMatrix &m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

inline double min_eigenvalue(const CMatrix &m) {
    return hermitian_eigenvalues(m).minCoeff();
}

/// Hilbert-Schmidt inner product Tr(a* b); real for Hermitian arguments.
inline double hs_inner(const CMatrix &a, const CMatrix &b) {
    return (a.adjoint() * b).trace().real();
}

inline CMatrix ginibre(int n, Rng &rng) {
    CMatrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return g;
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phases absorbed into Q (otherwise the distribution is biased
/// by the QR gauge choice).
inline CMatrix haar_unitary(int n, Rng &rng) {
    const CMatrix g = ginibre(n, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        q.col(j) *= (a > 0) ? d / a : Complex(1, 0);
    }
    return q;
}

/// Random density matrix with full rank a.s. (normalized Wishart).
inline CMatrix random_density(int n, Rng &rng) {
    const CMatrix g = ginibre(n, rng);
    CMatrix w = g * g.adjoint();
    return w / w.trace().real();
}

/// Random pure state density matrix.
inline CMatrix random_pure_density(int n, Rng &rng) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    v.normalize();
    return v * v.adjoint();
}

} // namespace tomo
