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
 * Linear inversion estimation for measurement designs.
 *
 * A design induces an affine map from the unknown Bloch coordinates to
 * outcome probabilities, p = e + T theta, where the offsets e absorb the
 * identity part and the contribution of the known coordinates. The natural
 * unbiased estimator inverts it on observed relative frequencies,
 * theta_hat = T^{-1}(nu - e), and its single-shot covariance is
 * V = T^{-1} W T^{-t} with W the outcome covariance (multinomial for one
 * POVM, independent Bernoulli for a von Neumann family).
 */

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/linalg.hpp"
#include "tomo/measurement.hpp"
#include "tomo/operator_basis.hpp"

namespace tomo {

/// Coordinate partition: flags mark known directions, values hold their
/// declared canonical coordinates (only flagged entries are read).
struct KnownMask {
    std::vector<bool> flags;
    RVector values;

    static KnownMask none(int parameter_count) {
        KnownMask mask;
        mask.flags.assign(static_cast<std::size_t>(parameter_count), false);
        mask.values = RVector::Zero(parameter_count);
        return mask;
    }

    static KnownMask of(int parameter_count,
                        const std::vector<std::pair<int, double>> &known) {
        KnownMask mask = none(parameter_count);
        for (const auto &[index, value] : known) {
            mask.flags[static_cast<std::size_t>(index)] = true;
            mask.values(index) = value;
        }
        return mask;
    }

    int size() const { return static_cast<int>(flags.size()); }

    int unknown_count() const {
        int d = 0;
        for (bool f : flags) d += f ? 0 : 1;
        return d;
    }

    std::vector<int> unknown_indices() const {
        std::vector<int> idx;
        for (int j = 0; j < size(); ++j)
            if (!flags[static_cast<std::size_t>(j)]) idx.push_back(j);
        return idx;
    }
};

enum class OutcomeModel {
    multinomial,          // one POVM, outcomes share each shot
    independent_bernoulli // one effect per batch, outcomes independent
};

struct DesignMatrices {
    int dim = 0;
    int d = 0;            // number of unknown parameters
    RVector offsets;      // effective offsets, known contributions included
    RMatrix T;            // T_ij = Tr(E_i s_j) over unknown directions
    RMatrix T_inv;
    OutcomeModel model = OutcomeModel::multinomial;
    KnownMask known;
    OperatorBasis basis;  // kept so estimates can be reassembled and checked
};

namespace detail {

inline void finalize_design(DesignMatrices &design) {
    Eigen::PartialPivLU<RMatrix> lu(design.T);
    const double det = lu.determinant();
    require(std::abs(det) >= 1e-12, errc::singular_design,
            "design matrix T is singular: POVM is not informationally "
            "complete for the unknown coordinates");
    design.T_inv = lu.inverse();
}

} // namespace detail

/// Affine map of a k-outcome POVM over the unknown coordinates. Exactly the
/// first d outcomes estimate; the last outcome is the discarded completion
/// element, so k must equal d+1. Over-complete POVMs are rejected, not
/// least-squares-inverted.
inline DesignMatrices build_design(const Povm &p, const KnownMask &known,
                                   const OperatorBasis &basis) {
    const int n = basis.dim;
    require(p.dim == n, errc::dimension_mismatch, "POVM/basis dimension mismatch");
    require(known.size() == basis.size(), errc::dimension_mismatch,
            "mask length must be n^2-1");
    const int d = known.unknown_count();
    require(p.size() >= d + 1, errc::under_determined_design,
            "POVM has " + std::to_string(p.size()) + " outcomes, needs " +
                std::to_string(d + 1) + " for " + std::to_string(d) +
                " unknown coordinates");
    require(p.size() == d + 1, errc::over_complete_design,
            "POVM has more outcomes than unknown parameters + 1; estimator "
            "construction for over-complete designs is unsupported");

    DesignMatrices design;
    design.dim = n;
    design.d = d;
    design.model = OutcomeModel::multinomial;
    design.known = known;
    design.basis = basis;
    design.offsets.resize(d);
    design.T.resize(d, d);
    const auto unknown = known.unknown_indices();
    for (int i = 0; i < d; ++i) {
        const CMatrix &e = p.elements[static_cast<std::size_t>(i)];
        double offset = e.trace().real() / static_cast<double>(n);
        for (int j = 0; j < basis.size(); ++j)
            if (known.flags[static_cast<std::size_t>(j)])
                offset += hs_inner(basis.elements[j], e) * known.values(j);
        design.offsets(i) = offset;
        for (int j = 0; j < d; ++j)
            design.T(i, j) = hs_inner(basis.elements[unknown[static_cast<std::size_t>(j)]], e);
    }
    detail::finalize_design(design);
    return design;
}

/// Affine map of a von Neumann family: one effect per unknown coordinate,
/// each measured on its own copies, T_ij = Tr(E^i s_j).
inline DesignMatrices build_design_vn(const VonNeumannFamily &f,
                                      const KnownMask &known,
                                      const OperatorBasis &basis) {
    const int n = basis.dim;
    require(f.dim == n, errc::dimension_mismatch, "family/basis dimension mismatch");
    require(known.size() == basis.size(), errc::dimension_mismatch,
            "mask length must be n^2-1");
    const int d = known.unknown_count();
    require(f.size() == d, errc::under_determined_design,
            "family has " + std::to_string(f.size()) + " effects, needs exactly " +
                std::to_string(d));

    DesignMatrices design;
    design.dim = n;
    design.d = d;
    design.model = OutcomeModel::independent_bernoulli;
    design.known = known;
    design.basis = basis;
    design.offsets.resize(d);
    design.T.resize(d, d);
    const auto unknown = known.unknown_indices();
    for (int i = 0; i < d; ++i) {
        const CMatrix &e = f.effects[static_cast<std::size_t>(i)];
        double offset = e.trace().real() / static_cast<double>(n);
        for (int j = 0; j < basis.size(); ++j)
            if (known.flags[static_cast<std::size_t>(j)])
                offset += hs_inner(basis.elements[j], e) * known.values(j);
        design.offsets(i) = offset;
        for (int j = 0; j < d; ++j)
            design.T(i, j) = hs_inner(basis.elements[unknown[static_cast<std::size_t>(j)]], e);
    }
    detail::finalize_design(design);
    return design;
}

struct EstimateResult {
    BlochState state;        // full coordinate vector, known values filled in
    RVector theta_unknown;   // the estimated block alone
    bool physical = false;   // flag only; unphysical estimates are never projected
    double min_eigenvalue = 0;
};

/// theta_hat = T^{-1}(nu - e). Estimates whose reconstructed matrix has a
/// negative eigenvalue are flagged, not rejected: with many shots their
/// probability vanishes and projecting them back would bias the covariance
/// this toolkit exists to measure.
inline EstimateResult estimate(const DesignMatrices &design,
                               const RVector &frequencies) {
    require(frequencies.size() == design.d, errc::dimension_mismatch,
            "need one relative frequency per estimating outcome");
    for (int i = 0; i < design.d; ++i)
        require(frequencies(i) >= -1e-12 && frequencies(i) <= 1.0 + 1e-12,
                errc::invalid_probability, "relative frequencies must lie in [0,1]");
    EstimateResult result;
    result.theta_unknown = design.T_inv * (frequencies - design.offsets);
    result.state.dim = design.dim;
    result.state.known_mask = design.known.flags;
    result.state.theta = design.known.values;
    const auto unknown = design.known.unknown_indices();
    for (int j = 0; j < design.d; ++j)
        result.state.theta(unknown[static_cast<std::size_t>(j)]) =
            result.theta_unknown(j);
    result.min_eigenvalue =
        min_eigenvalue(bloch_to_density(result.state, design.basis));
    result.physical = result.min_eigenvalue >= -positivity_eps;
    return result;
}

/// Single-measurement variance of the qubit estimator of theta_3 from the
/// projection (I + lambda.pauli)/2, in Pauli-normalized units:
/// (1 - <lambda, theta>^2) / lambda_3^2.
inline double qubit_variance(const Eigen::Vector3d &lambda,
                             const Eigen::Vector3d &theta) {
    require(std::abs(lambda.norm() - 1.0) <= 1e-12, errc::domain_error,
            "lambda must be a unit vector");
    require(lambda(2) != 0.0, errc::non_estimating_direction,
            "lambda_3 = 0 cannot estimate theta_3");
    const double overlap = lambda.dot(theta);
    return (1.0 - overlap * overlap) / (lambda(2) * lambda(2));
}

/// Covariance of the relative frequencies of d cells of one multinomial
/// draw: W_ii = p_i(1-p_i), W_ij = -p_i p_j.
inline RMatrix covariance_w(const RVector &p) {
    double total = 0;
    for (int i = 0; i < p.size(); ++i) {
        require(p(i) >= -1e-12 && p(i) <= 1.0 + 1e-12, errc::invalid_probability,
                "probabilities must lie in [0,1]");
        total += p(i);
    }
    require(total <= 1.0 + 1e-9, errc::invalid_probability,
            "probabilities sum to more than 1");
    RMatrix w = -p * p.transpose();
    for (int i = 0; i < p.size(); ++i) w(i, i) = p(i) * (1.0 - p(i));
    return w;
}

struct ErrorMatrices {
    RMatrix W; // outcome covariance at the state
    RMatrix V; // single-shot estimator covariance T^{-1} W T^{-t}
};

/// Mean quadratic error matrix of the estimator at a given state. V is the
/// single-shot covariance; m repeated shots scale it by 1/m.
inline ErrorMatrices error_matrix(const DesignMatrices &design,
                                  const BlochState &state) {
    require(state.dim == design.dim && state.theta.size() == design.known.size(),
            errc::dimension_mismatch, "state does not match design");
    const auto unknown = design.known.unknown_indices();
    RVector theta_b(design.d);
    for (int j = 0; j < design.d; ++j)
        theta_b(j) = state.theta(unknown[static_cast<std::size_t>(j)]);
    const RVector p = design.offsets + design.T * theta_b;

    ErrorMatrices result;
    if (design.model == OutcomeModel::multinomial) {
        result.W = covariance_w(p);
    } else {
        result.W = RMatrix::Zero(design.d, design.d);
        for (int i = 0; i < design.d; ++i) {
            require(p(i) >= -1e-12 && p(i) <= 1.0 + 1e-12, errc::invalid_probability,
                    "effect probability outside [0,1]");
            result.W(i, i) = p(i) * (1.0 - p(i));
        }
    }
    result.V = design.T_inv * result.W * design.T_inv.transpose();
    result.V = 0.5 * (result.V + result.V.transpose()).eval();
    return result;
}

} // namespace tomo
