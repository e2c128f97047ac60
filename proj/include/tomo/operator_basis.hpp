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

/**
 * Orthonormal traceless Hermitian operator bases and Bloch coordinates.
 *
 * Everything downstream works in one fixed frame: a basis {s_j} with
 * Tr s_j = 0 and Tr s_i s_j = delta_ij, and states written as
 *
 *     rho = I/n + sum_j theta_j s_j,     theta_j = Tr(rho s_j).
 *
 * In these units a state satisfies |theta|^2 <= (n-1)/n, with equality
 * exactly for pure states. Conversions to the common rescaled vectors
 * (Pauli-normalized qubit vectors, or the n-scaled vector that appears in
 * rho = (I + g.s)/n) are explicit functions, never implicit.
 */

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "tomo/errors.hpp"
#include "tomo/linalg.hpp"

namespace tomo {

struct OperatorBasis {
    int dim = 0;
    std::vector<CMatrix> elements;
    /// Serialization tag naming the element ordering.
    std::string order_tag;

    int size() const { return static_cast<int>(elements.size()); }
};

/// A state as its coefficient vector in an OperatorBasis, together with the
/// partition into coordinates whose values are known a priori and
/// coordinates still to be estimated.
struct BlochState {
    int dim = 0;
    RVector theta;
    std::vector<bool> known_mask; // empty means "all unknown"

    bool is_known(int j) const {
        return !known_mask.empty() && known_mask[static_cast<std::size_t>(j)];
    }
};

namespace order_tags {
inline constexpr const char *gell_mann = "gellmann/sym-antisym-diag";
inline constexpr const char *pauli_product = "pauli-product/marginals-first";
} // namespace order_tags

/// Throws errc::invalid_basis unless the elements form an orthonormal
/// traceless Hermitian family of the right count.
inline void check_basis(const OperatorBasis &basis, double tol = 1e-12) {
    const int n = basis.dim;
    require(n >= 2, errc::invalid_basis, "basis dimension must be >= 2");
    require(basis.size() == n * n - 1, errc::invalid_basis,
            "basis must have n^2-1 elements");
    for (int i = 0; i < basis.size(); ++i) {
        const CMatrix &a = basis.elements[i];
        require(a.rows() == n && a.cols() == n, errc::invalid_basis,
                "basis element has wrong shape");
        require(is_hermitian(a, tol), errc::invalid_basis,
                "basis element is not Hermitian");
        require(std::abs(a.trace()) <= tol, errc::invalid_basis,
                "basis element is not traceless");
        for (int j = i; j < basis.size(); ++j) {
            const double overlap = hs_inner(a, basis.elements[j]);
            const double target = (i == j) ? 1.0 : 0.0;
            require(std::abs(overlap - target) <= tol, errc::invalid_basis,
                    "basis is not orthonormal");
        }
    }
}

/// Generalized Gell-Mann construction, normalized to Tr s_i s_j = delta_ij.
/// Ordering is fixed: symmetric pairs (row-major), antisymmetric pairs
/// (same pair order), then diagonal elements.
inline OperatorBasis build_basis(int n) {
    require(n >= 2, errc::invalid_dimension,
            "operator basis needs dimension >= 2");
    OperatorBasis basis;
    basis.dim = n;
    basis.order_tag = order_tags::gell_mann;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            CMatrix m = CMatrix::Zero(n, n);
            m(j, k) = inv_sqrt2;
            m(k, j) = inv_sqrt2;
            basis.elements.push_back(m);
        }
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            CMatrix m = CMatrix::Zero(n, n);
            m(j, k) = Complex(0, -inv_sqrt2);
            m(k, j) = Complex(0, inv_sqrt2);
            basis.elements.push_back(m);
        }
    for (int l = 1; l < n; ++l) {
        CMatrix m = CMatrix::Zero(n, n);
        const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int j = 0; j < l; ++j) m(j, j) = norm;
        m(l, l) = -static_cast<double>(l) * norm;
        basis.elements.push_back(m);
    }
    return basis;
}

/// Pauli matrices in their conventional normalization (Tr s_i s_j = 2 d_ij).
inline std::vector<CMatrix> pauli_matrices() {
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    sz << 1, 0, 0, -1;
    return {sx, sy, sz};
}

/// Orthonormal two-qubit product basis: the three first-qubit marginal
/// directions, the three second-qubit marginal directions, then the nine
/// two-body products s_i (x) s_j / 2 in row-major (i,j) order. The marginal
/// block leading makes "both reduced states known" expressible as a mask
/// over the first six coordinates.
inline OperatorBasis two_qubit_pauli_basis() {
    const auto pauli = pauli_matrices();
    const CMatrix id2 = CMatrix::Identity(2, 2);
    OperatorBasis basis;
    basis.dim = 4;
    basis.order_tag = order_tags::pauli_product;
    for (const auto &s : pauli)
        basis.elements.push_back(0.5 * Eigen::kroneckerProduct(s, id2).eval());
    for (const auto &s : pauli)
        basis.elements.push_back(0.5 * Eigen::kroneckerProduct(id2, s).eval());
    for (const auto &a : pauli)
        for (const auto &b : pauli)
            basis.elements.push_back(0.5 * Eigen::kroneckerProduct(a, b).eval());
    return basis;
}

inline BlochState density_to_bloch(const CMatrix &rho,
                                   const OperatorBasis &basis) {
    const int n = basis.dim;
    require(rho.rows() == n && rho.cols() == n, errc::dimension_mismatch,
            "state dimension does not match basis");
    require(std::abs(rho.trace() - Complex(1, 0)) <= 1e-12, errc::invalid_state,
            "density matrix must have unit trace");
    require(is_hermitian(rho, 1e-12), errc::invalid_state,
            "density matrix must be Hermitian");
    BlochState state;
    state.dim = n;
    state.theta.resize(basis.size());
    for (int j = 0; j < basis.size(); ++j)
        state.theta(j) = hs_inner(basis.elements[j], rho);
    return state;
}

inline CMatrix bloch_to_density(const BlochState &state,
                                const OperatorBasis &basis) {
    const int n = basis.dim;
    require(state.dim == n && state.theta.size() == basis.size(),
            errc::dimension_mismatch, "state dimension does not match basis");
    CMatrix rho = CMatrix::Identity(n, n) / static_cast<double>(n);
    for (int j = 0; j < basis.size(); ++j)
        rho += state.theta(j) * basis.elements[j];
    return rho;
}

/// Positivity tolerance used throughout: an eigenvalue >= -1e-10 counts as
/// nonnegative for double-precision eigensolvers on these small matrices.
inline constexpr double positivity_eps = 1e-10;

inline bool is_physical(const BlochState &state, const OperatorBasis &basis) {
    return min_eigenvalue(bloch_to_density(state, basis)) >= -positivity_eps;
}

struct PositivityReport {
    bool is_positive = false;
    double norm_sq = 0;
    double bound = 0;
    bool is_rank_one_multiple = false;
};

/// Checks the necessary positivity bound for I + g.s: if the matrix is
/// positive then |g|^2 <= n^2 - n, and at equality it equals n times a
/// rank-one projection (eigenvalues {0,...,0,n}).
inline PositivityReport positivity_bound_check(const RVector &g,
                                               const OperatorBasis &basis) {
    const int n = basis.dim;
    require(g.size() == basis.size(), errc::dimension_mismatch,
            "coefficient vector has wrong length");
    CMatrix m = CMatrix::Identity(n, n);
    for (int j = 0; j < basis.size(); ++j) m += g(j) * basis.elements[j];
    const RVector evals = hermitian_eigenvalues(m);
    PositivityReport report;
    report.is_positive = evals.minCoeff() >= -positivity_eps;
    report.norm_sq = g.squaredNorm();
    report.bound = static_cast<double>(n) * n - n;
    bool rank_one = std::abs(evals(n - 1) - n) <= 1e-8;
    for (int i = 0; i + 1 < n; ++i) rank_one = rank_one && std::abs(evals(i)) <= 1e-8;
    report.is_rank_one_multiple = rank_one;
    return report;
}

// ---------------------------------------------------------------------------
// Scale conversions. Canonical vectors satisfy |theta|^2 <= (n-1)/n.
// ---------------------------------------------------------------------------

/// Qubit Bloch vector in the Pauli normalization (|theta| <= 1).
inline RVector to_pauli_normalized(const RVector &theta_canonical) {
    return std::sqrt(2.0) * theta_canonical;
}

inline RVector from_pauli_normalized(const RVector &theta_pauli) {
    return theta_pauli / std::sqrt(2.0);
}

/// The n-scaled vector g of rho = (I + g.s)/n, satisfying |g|^2 <= n^2 - n.
inline RVector to_scaled_general(const RVector &theta_canonical, int n) {
    return static_cast<double>(n) * theta_canonical;
}

inline RVector from_scaled_general(const RVector &g, int n) {
    return g / static_cast<double>(n);
}

} // namespace tomo
