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
 * Measurement designs: k-outcome POVMs and families of two-outcome
 * von Neumann measurements, with validation, outcome probabilities, and the
 * structural checks (mutual unbiasedness, quasi-orthogonality, symmetric
 * informationally complete systems and their conditional variant).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/linalg.hpp"
#include "tomo/operator_basis.hpp"

namespace tomo {

enum class DesignKind { povm, von_neumann };

struct Povm {
    int dim = 0;
    std::vector<CMatrix> elements;

    int size() const { return static_cast<int>(elements.size()); }
};

/// A list of positive contractions E^i, each standing for the two-outcome
/// measurement {E^i, I - E^i}, measured on separate copies.
struct VonNeumannFamily {
    int dim = 0;
    std::vector<CMatrix> effects;

    int size() const { return static_cast<int>(effects.size()); }
};

struct Violation {
    std::string invariant;
    double magnitude = 0;
};

/// Diagnostic check of the POVM invariants. Empty report means valid.
inline std::vector<Violation> validate_povm(const Povm &p, double tol = positivity_eps) {
    std::vector<Violation> violations;
    const int n = p.dim;
    if (n < 2) {
        violations.push_back({"dimension >= 2", static_cast<double>(2 - n)});
        return violations;
    }
    CMatrix sum = CMatrix::Zero(n, n);
    for (int i = 0; i < p.size(); ++i) {
        const CMatrix &e = p.elements[i];
        if (e.rows() != n || e.cols() != n) {
            violations.push_back({"element " + std::to_string(i) + " shape", 0});
            continue;
        }
        const double herm = (e - e.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-12)
            violations.push_back({"element " + std::to_string(i) + " hermiticity", herm});
        const double lo = min_eigenvalue(hermitize(e));
        if (lo < -tol)
            violations.push_back({"element " + std::to_string(i) + " positivity", -lo});
        sum += e;
    }
    const double completeness = (sum - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (completeness > tol)
        violations.push_back({"completeness", completeness});
    return violations;
}

/// Diagnostic check that every effect satisfies 0 <= E <= I.
inline std::vector<Violation> validate_family(const VonNeumannFamily &f,
                                              double tol = positivity_eps) {
    std::vector<Violation> violations;
    const int n = f.dim;
    for (int i = 0; i < f.size(); ++i) {
        const CMatrix &e = f.effects[i];
        if (e.rows() != n || e.cols() != n) {
            violations.push_back({"effect " + std::to_string(i) + " shape", 0});
            continue;
        }
        const double herm = (e - e.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-12)
            violations.push_back({"effect " + std::to_string(i) + " hermiticity", herm});
        const RVector evals = hermitian_eigenvalues(hermitize(e));
        if (evals.minCoeff() < -tol)
            violations.push_back({"effect " + std::to_string(i) + " positivity",
                                  -evals.minCoeff()});
        if (evals.maxCoeff() > 1.0 + tol)
            violations.push_back({"effect " + std::to_string(i) + " contraction",
                                  evals.maxCoeff() - 1.0});
    }
    return violations;
}

inline Eigen::VectorXd probabilities(const CMatrix &rho, const Povm &p) {
    require(rho.rows() == p.dim && rho.cols() == p.dim, errc::dimension_mismatch,
            "state dimension does not match POVM");
    RVector probs(p.size());
    for (int i = 0; i < p.size(); ++i)
        probs(i) = (rho * p.elements[i]).trace().real();
    return probs;
}

/// Born probabilities p_i = Tr(rho E_i).
inline RVector probabilities(const BlochState &state, const Povm &p,
                             const OperatorBasis &basis) {
    return probabilities(bloch_to_density(state, basis), p);
}

/// Per-effect outcome probabilities Tr(rho E^i) of a von Neumann family.
inline RVector probabilities(const BlochState &state, const VonNeumannFamily &f,
                             const OperatorBasis &basis) {
    const CMatrix rho = bloch_to_density(state, basis);
    require(rho.rows() == f.dim, errc::dimension_mismatch,
            "state dimension does not match family");
    RVector probs(f.size());
    for (int i = 0; i < f.size(); ++i)
        probs(i) = (rho * f.effects[i]).trace().real();
    return probs;
}

struct MubReport {
    bool is_complementary = false;
    double max_deviation = 0;
};

/// Mutual unbiasedness of two orthonormal bases (given as matrix columns):
/// all overlaps |<e_i, f_j>|^2 must equal 1/n.
inline MubReport check_mub(const CMatrix &basis_a, const CMatrix &basis_b,
                           double tol = 1e-10) {
    const auto n = basis_a.rows();
    require(basis_a.cols() == n && basis_b.rows() == n && basis_b.cols() == n,
            errc::dimension_mismatch, "bases must be square and same size");
    for (const CMatrix *m : {&basis_a, &basis_b}) {
        const double dev =
            (m->adjoint() * (*m) - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
        require(dev <= 1e-10, errc::invalid_basis,
                "input family is not an orthonormal basis");
    }
    MubReport report;
    const double target = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex overlap = basis_a.col(i).dot(basis_b.col(j));
            report.max_deviation =
                std::max(report.max_deviation, std::abs(std::norm(overlap) - target));
        }
    report.is_complementary = report.max_deviation <= tol;
    return report;
}

struct QuasiOrthReport {
    bool holds = false;
    double residual = 0;
};

/// Complementarity of two Hermitian operators: Tr(ab) = Tr(a)Tr(b)/n,
/// i.e. their traceless parts are Hilbert-Schmidt orthogonal.
inline QuasiOrthReport check_quasi_orthogonal(const CMatrix &a, const CMatrix &b,
                                              double tol = 1e-10) {
    require(a.rows() == b.rows() && a.cols() == b.cols() && a.rows() == a.cols(),
            errc::dimension_mismatch, "operators must be square and same size");
    const double n = static_cast<double>(a.rows());
    QuasiOrthReport report;
    report.residual = std::abs((a * b).trace().real() -
                               a.trace().real() * b.trace().real() / n);
    report.holds = report.residual <= tol;
    return report;
}

struct SicReport {
    int k = 0;
    double lambda = 0;
    double mu = 0;
    double max_lambda_residual = 0;
    double max_mu_residual = 0;
    bool all_rank_one = false;
    bool quasi_orthogonal_to_known = false;
    double max_known_residual = 0;
};

/// Tests the symmetric informationally complete structure: rescales each
/// element to a candidate projection P_i = E_i / lambda_max(E_i), fits
/// sum P_i = lambda I and Tr P_i P_j = mu, and checks rank-one-ness. When
/// known_mask marks coordinates, additionally checks that every P_i is
/// quasi-orthogonal to each masked basis direction (the conditional case).
/// The per-element rescale works for any of the scalings E_i = P_i/c the
/// symmetric optima use, without knowing c beforehand.
inline SicReport check_sic(const Povm &p, const std::vector<bool> &known_mask,
                           const OperatorBasis &basis) {
    const int n = p.dim;
    require(p.size() >= 1, errc::invalid_povm, "POVM has no elements");
    SicReport report;
    report.k = p.size();

    std::vector<CMatrix> projections;
    projections.reserve(p.elements.size());
    bool all_rank_one = true;
    for (int i = 0; i < p.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitize(p.elements[i]));
        const RVector evals = solver.eigenvalues();
        const double top = evals(n - 1);
        require(top > 1e-14, errc::degenerate_element,
                "POVM element " + std::to_string(i) + " is (numerically) zero");
        projections.push_back(p.elements[i] / top);
        // Scale-free rank-one test on the rescaled element.
        if (n >= 2 && std::abs(evals(n - 2)) > 1e-8 * top) all_rank_one = false;
    }
    report.all_rank_one = all_rank_one;

    CMatrix sum = CMatrix::Zero(n, n);
    for (const auto &proj : projections) sum += proj;
    report.lambda = sum.trace().real() / static_cast<double>(n);
    report.max_lambda_residual =
        (sum - report.lambda * CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();

    if (p.size() >= 2) {
        std::vector<double> overlaps;
        for (int i = 0; i < p.size(); ++i)
            for (int j = i + 1; j < p.size(); ++j)
                overlaps.push_back((projections[i] * projections[j]).trace().real());
        report.mu = 0;
        for (double o : overlaps) report.mu += o;
        report.mu /= static_cast<double>(overlaps.size());
        for (double o : overlaps)
            report.max_mu_residual =
                std::max(report.max_mu_residual, std::abs(o - report.mu));
    }

    report.quasi_orthogonal_to_known = true;
    if (!known_mask.empty()) {
        require(static_cast<int>(known_mask.size()) == basis.size(),
                errc::dimension_mismatch, "mask length must match basis size");
        for (const auto &proj : projections)
            for (int j = 0; j < basis.size(); ++j) {
                if (!known_mask[static_cast<std::size_t>(j)]) continue;
                const auto qo = check_quasi_orthogonal(proj, basis.elements[j]);
                report.max_known_residual =
                    std::max(report.max_known_residual, qo.residual);
            }
        report.quasi_orthogonal_to_known = report.max_known_residual <= 1e-10;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Bundled constructions.
// ---------------------------------------------------------------------------

/// Qubit POVM with elements w_i (I + u_i . pauli); valid when the weights
/// sum to 1, sum_i w_i u_i = 0 and |u_i| <= 1.
inline Povm qubit_povm_from_directions(const std::vector<Eigen::Vector3d> &directions,
                                       const std::vector<double> &weights) {
    require(directions.size() == weights.size(), errc::dimension_mismatch,
            "directions/weights length mismatch");
    const auto pauli = pauli_matrices();
    Povm p;
    p.dim = 2;
    for (std::size_t i = 0; i < directions.size(); ++i) {
        CMatrix e = CMatrix::Identity(2, 2);
        for (int a = 0; a < 3; ++a) e += directions[i](a) * pauli[a];
        p.elements.push_back(weights[i] * e);
    }
    return p;
}

/// The symmetric qubit 4-outcome POVM E_i = P_i/2 with rank-one projections
/// along tetrahedral Bloch directions.
inline Povm tetrahedron_povm() {
    const double s = 1.0 / std::sqrt(3.0);
    const std::vector<Eigen::Vector3d> dirs = {
        {s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    return qubit_povm_from_directions(dirs, {0.25, 0.25, 0.25, 0.25});
}

/// Tetrahedron variant with the first projection along +z; convenient when a
/// test wants simple closed-form outcome probabilities.
inline Povm tetrahedron_povm_z_aligned() {
    const double r = 2.0 * std::sqrt(2.0) / 3.0;
    const std::vector<Eigen::Vector3d> dirs = {
        {0, 0, 1},
        {r, 0, -1.0 / 3.0},
        {-r / 2.0, std::sqrt(2.0 / 3.0), -1.0 / 3.0},
        {-r / 2.0, -std::sqrt(2.0 / 3.0), -1.0 / 3.0}};
    return qubit_povm_from_directions(dirs, {0.25, 0.25, 0.25, 0.25});
}

/// The symmetric 3-outcome qubit POVM E_i = (2/3) P_i with projections at
/// 120 degrees in the xy-plane; quasi-orthogonal to the z direction.
inline Povm trine_povm() {
    std::vector<Eigen::Vector3d> dirs;
    for (int i = 0; i < 3; ++i) {
        const double phi = 2.0 * M_PI * i / 3.0;
        dirs.emplace_back(std::cos(phi), std::sin(phi), 0.0);
    }
    return qubit_povm_from_directions(dirs, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
}

/// Seven-outcome qutrit POVM built from powers of eps = exp(2 pi i / 7):
/// uniform 1/7 diagonal, so it is exactly quasi-orthogonal to the diagonal
/// subalgebra, and each element is (3/7) times a rank-one projection.
inline Povm qutrit_seven_povm() {
    const Complex eps = std::polar(1.0, 2.0 * M_PI / 7.0);
    auto ep = [&](int power) {
        return std::pow(eps, static_cast<double>(((power % 7) + 7) % 7));
    };
    // Upper-triangle epsilon powers of the three non-real generators.
    const int powers[3][3] = {{6, 2, 3}, {2, 3, 1}, {4, 6, 2}};
    Povm p;
    p.dim = 3;
    p.elements.push_back(CMatrix::Ones(3, 3) / 7.0);
    std::vector<CMatrix> generators;
    for (const auto &row : powers) {
        CMatrix e(3, 3);
        e(0, 0) = e(1, 1) = e(2, 2) = 1.0;
        e(0, 1) = ep(row[0]);
        e(0, 2) = ep(row[1]);
        e(1, 2) = ep(row[2]);
        e(1, 0) = std::conj(e(0, 1));
        e(2, 0) = std::conj(e(0, 2));
        e(2, 1) = std::conj(e(1, 2));
        generators.push_back(e / 7.0);
    }
    for (const auto &g : generators) p.elements.push_back(g);
    for (const auto &g : generators) p.elements.push_back(g.conjugate());
    return p;
}

/// Nine two-qubit effects (I + s_i (x) s_j)/2 in the index order
/// (11,22,33,12,23,31,13,21,32): pairwise quasi-orthogonal positive
/// contractions with spectrum {0,0,1,1}, quasi-orthogonal to both
/// single-qubit marginal subalgebras.
inline VonNeumannFamily two_qubit_optimal_family() {
    const auto pauli = pauli_matrices();
    const int pairs[9][2] = {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3},
                             {3, 1}, {1, 3}, {2, 1}, {3, 2}};
    VonNeumannFamily family;
    family.dim = 4;
    for (const auto &pr : pairs) {
        const CMatrix prod =
            Eigen::kroneckerProduct(pauli[pr[0] - 1], pauli[pr[1] - 1]).eval();
        family.effects.push_back(0.5 * (CMatrix::Identity(4, 4) + prod));
    }
    return family;
}

} // namespace tomo
