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
 * Unitarily invariant priors on states and the averaged determinant
 * objective.
 *
 * Every supported prior has vanishing first moments on the unknown block and
 * isotropic second moments <theta_l theta_m> = alpha delta_lm (canonical
 * units). That single constant is all the averaged error matrix depends on:
 *
 *     <V> = T^{-1} (diag(e) - e e^t) T^{-t} - alpha I       (one POVM)
 *     <V> = T^{-1} diag(e_i(1-e_i) - alpha |t_i|^2) T^{-t}  (vN family)
 *
 * with e the effective offsets and t_i the rows of T. The Monte Carlo path
 * averages per-state error matrices drawn from the same prior and acts as
 * the independent oracle for the closed form.
 */

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/estimation.hpp"
#include "tomo/linalg.hpp"
#include "tomo/operator_basis.hpp"
#include "tomo/parallel.hpp"
#include "tomo/rng.hpp"

namespace tomo {

enum class PriorKind {
    haar_orbit,      // U rho0 U* for Haar U, fixed spectrum
    two_point_qubit, // theta_3 = +-t with probability 1/2 each
    circle_qubit     // fixed theta_3, (theta_1,theta_2) uniform on a circle
};

struct InvariantPrior {
    int dim = 0;
    PriorKind kind = PriorKind::haar_orbit;
    RVector spectrum;   // haar_orbit only
    double theta3 = 0;  // qubit kinds, Pauli-normalized units
    double radius = 0;  // circle_qubit, Pauli-normalized units
    /// Second moment per unknown coordinate, canonical units.
    double alpha = 0;

    double alpha_pauli_normalized() const { return 2.0 * alpha; }
    double alpha_scaled_general() const {
        return static_cast<double>(dim) * dim * alpha;
    }
};

/// Orbit of a fixed spectrum under Haar-random unitaries. The moment
/// constant is alpha = |theta_0|^2/(n^2-1) with theta_0 the Bloch vector of
/// the spectrum's diagonal state; |theta_0|^2 = sum s_i^2 - 1/n needs no
/// basis choice.
inline InvariantPrior make_haar_orbit_prior(int n, const RVector &spectrum) {
    require(n >= 2, errc::invalid_dimension, "prior dimension must be >= 2");
    require(spectrum.size() == n, errc::invalid_prior,
            "spectrum must have n entries");
    double sum = 0, sum_sq = 0;
    for (int i = 0; i < n; ++i) {
        require(spectrum(i) >= -1e-12, errc::invalid_prior,
                "spectrum entries must be nonnegative");
        sum += spectrum(i);
        sum_sq += spectrum(i) * spectrum(i);
    }
    require(std::abs(sum - 1.0) <= 1e-12, errc::invalid_prior,
            "spectrum must sum to 1");
    InvariantPrior prior;
    prior.dim = n;
    prior.kind = PriorKind::haar_orbit;
    prior.spectrum = spectrum;
    prior.alpha = (sum_sq - 1.0 / n) / (static_cast<double>(n) * n - 1);
    return prior;
}

/// The two-state qubit prior {(0,0,theta3), (0,0,-theta3)} with equal
/// weights (Pauli-normalized theta3); the only invariant companion of a
/// state whose first two coordinates are known.
inline InvariantPrior make_two_point_qubit_prior(double theta3) {
    require(std::abs(theta3) <= 1.0, errc::invalid_prior,
            "theta3 must lie in [-1,1]");
    InvariantPrior prior;
    prior.dim = 2;
    prior.kind = PriorKind::two_point_qubit;
    prior.theta3 = theta3;
    prior.alpha = 0.5 * theta3 * theta3; // point value of <theta_3^2>, canonical
    return prior;
}

/// Uniform distribution on the circle theta_1^2 + theta_2^2 = radius^2 at
/// fixed theta_3 (Pauli-normalized units). Per unknown coordinate the second
/// moment is radius^2/2 in those units, radius^2/4 canonical.
inline InvariantPrior make_circle_qubit_prior(double theta3, double radius) {
    require(std::abs(theta3) <= 1.0, errc::invalid_prior,
            "theta3 must lie in [-1,1]");
    require(radius >= 0, errc::invalid_prior, "radius must be nonnegative");
    require(radius * radius <= 1.0 - theta3 * theta3 + 1e-12, errc::invalid_prior,
            "unphysical prior: radius^2 > 1 - theta3^2");
    InvariantPrior prior;
    prior.dim = 2;
    prior.kind = PriorKind::circle_qubit;
    prior.theta3 = theta3;
    prior.radius = radius;
    prior.alpha = radius * radius / 4.0;
    return prior;
}

/// Draws a state from the prior and returns its canonical Bloch vector.
/// Qubit kinds assume the standard qubit basis ordering (x, y, z).
inline RVector sample_state_theta(const InvariantPrior &prior, Rng &rng,
                                  const OperatorBasis &basis) {
    require(basis.dim == prior.dim, errc::dimension_mismatch,
            "prior/basis dimension mismatch");
    switch (prior.kind) {
    case PriorKind::haar_orbit: {
        const CMatrix u = haar_unitary(prior.dim, rng);
        CMatrix rho = u * prior.spectrum.asDiagonal() * u.adjoint();
        return density_to_bloch(hermitize(rho), basis).theta;
    }
    case PriorKind::two_point_qubit: {
        RVector theta = RVector::Zero(3);
        const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        theta(2) = sign * prior.theta3 / std::sqrt(2.0);
        return theta;
    }
    case PriorKind::circle_qubit: {
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        RVector theta(3);
        theta(0) = prior.radius * std::cos(phi) / std::sqrt(2.0);
        theta(1) = prior.radius * std::sin(phi) / std::sqrt(2.0);
        theta(2) = prior.theta3 / std::sqrt(2.0);
        return theta;
    }
    }
    fail(errc::invalid_prior, "unknown prior kind");
}

struct ObjectiveReport {
    RMatrix avg_cov;
    double det_value = 0;
    std::string method; // "closed_form" or "monte_carlo"
    std::optional<double> mc_stderr;
    bool degenerate = false;
    std::uint64_t seed = 0;
    long samples = 0;
};

namespace detail {

inline double determinant_or_zero(const RMatrix &avg, bool &degenerate) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(avg, Eigen::EigenvaluesOnly);
    const RVector evals = solver.eigenvalues();
    degenerate = evals.minCoeff() < 1e-14;
    if (degenerate && evals.minCoeff() > -1e-10) return 0.0;
    double det = 1.0;
    for (int i = 0; i < evals.size(); ++i) det *= evals(i);
    return det;
}

} // namespace detail

/// Closed-form average of the error matrix over the prior.
inline ObjectiveReport avg_error_matrix(const DesignMatrices &design,
                                        const InvariantPrior &prior) {
    require(prior.dim == design.dim, errc::dimension_mismatch,
            "prior/design dimension mismatch");
    const RVector &e = design.offsets;
    const double alpha = prior.alpha;
    RMatrix w_avg;
    if (design.model == OutcomeModel::multinomial) {
        w_avg = RMatrix(e.asDiagonal()) - e * e.transpose();
    } else {
        w_avg = RMatrix::Zero(design.d, design.d);
        for (int i = 0; i < design.d; ++i)
            w_avg(i, i) = e(i) * (1.0 - e(i)) - alpha * design.T.row(i).squaredNorm();
    }
    ObjectiveReport report;
    report.method = "closed_form";
    report.avg_cov = design.T_inv * w_avg * design.T_inv.transpose();
    if (design.model == OutcomeModel::multinomial)
        report.avg_cov -= alpha * RMatrix::Identity(design.d, design.d);
    report.avg_cov = 0.5 * (report.avg_cov + report.avg_cov.transpose()).eval();
    report.det_value = detail::determinant_or_zero(report.avg_cov, report.degenerate);
    return report;
}

inline ObjectiveReport avg_error_matrix(const Povm &p, const InvariantPrior &prior,
                                        const KnownMask &known,
                                        const OperatorBasis &basis) {
    return avg_error_matrix(build_design(p, known, basis), prior);
}

/// Monte Carlo average of the per-state error matrix, the independent check
/// on the closed form. Per-sample RNG substreams and fixed-size block
/// reduction make the result a function of the seed alone, whatever the
/// thread count; the standard error is a delete-one-block jackknife on the
/// determinant.
inline ObjectiveReport avg_error_matrix_mc(const DesignMatrices &design,
                                           const InvariantPrior &prior,
                                           long samples, std::uint64_t seed,
                                           int threads = 1) {
    require(samples >= 1, errc::domain_error, "need at least one sample");
    require(prior.dim == design.dim, errc::dimension_mismatch,
            "prior/design dimension mismatch");
    const int d = design.d;

    constexpr long block_size = 1024; // fixed: reduction order never changes
    const long blocks = (samples + block_size - 1) / block_size;
    std::vector<RMatrix> block_sums(static_cast<std::size_t>(blocks));

    parallel_for(blocks, threads, [&](long b) {
        RMatrix sum = RMatrix::Zero(d, d);
        const long begin = b * block_size;
        const long end = std::min(samples, begin + block_size);
        for (long s = begin; s < end; ++s) {
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(s));
            BlochState state;
            state.dim = design.dim;
            state.known_mask = design.known.flags;
            state.theta = sample_state_theta(prior, rng, design.basis);
            for (int j = 0; j < design.known.size(); ++j)
                if (design.known.flags[static_cast<std::size_t>(j)])
                    require(std::abs(state.theta(j) - design.known.values(j)) <= 1e-9,
                            errc::invalid_prior,
                            "prior samples contradict the declared known coordinates");
            sum += error_matrix(design, state).V;
        }
        block_sums[static_cast<std::size_t>(b)] = sum;
    });

    RMatrix total = RMatrix::Zero(d, d);
    for (const auto &s : block_sums) total += s;

    ObjectiveReport report;
    report.method = "monte_carlo";
    report.seed = seed;
    report.samples = samples;
    report.avg_cov = total / static_cast<double>(samples);
    report.avg_cov = 0.5 * (report.avg_cov + report.avg_cov.transpose()).eval();
    report.det_value = detail::determinant_or_zero(report.avg_cov, report.degenerate);

    if (blocks >= 2) {
        std::vector<double> loo_dets(static_cast<std::size_t>(blocks));
        double mean = 0;
        for (long b = 0; b < blocks; ++b) {
            const long begin = b * block_size;
            const long count = std::min(samples, begin + block_size) - begin;
            RMatrix loo = (total - block_sums[static_cast<std::size_t>(b)]) /
                          static_cast<double>(samples - count);
            bool dummy = false;
            loo_dets[static_cast<std::size_t>(b)] = detail::determinant_or_zero(
                0.5 * (loo + loo.transpose()).eval(), dummy);
            mean += loo_dets[static_cast<std::size_t>(b)];
        }
        mean /= static_cast<double>(blocks);
        double ss = 0;
        for (double v : loo_dets) ss += (v - mean) * (v - mean);
        report.mc_stderr =
            std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
    } else {
        report.mc_stderr = 0.0;
    }
    return report;
}

/// Determinant of the averaged error matrix for the fully symmetric POVM
/// family with n^2 equal-weight elements, Gram structure <f_i,f_i> = x and
/// <f_i,f_j> = y:
///
///     (n^2/(x-y) - alpha)^(n^2-2) * (1/(x+(n^2-2)y) - alpha).
inline double symmetric_objective(int n, double x, double y, double alpha) {
    require(n >= 2, errc::invalid_dimension, "n must be >= 2");
    const double nn = static_cast<double>(n) * n;
    require(x > y, errc::domain_error, "infeasible Gram structure: x <= y");
    const double s = x + (nn - 2.0) * y;
    require(s > 0, errc::domain_error,
            "infeasible Gram structure: x + (n^2-2)y <= 0");
    return std::pow(nn / (x - y) - alpha, nn - 2.0) * (1.0 / s - alpha);
}

struct PartialObjectives {
    double A = 0;
    double B = 0;
    bool lemma_holds = false;
};

/// The qubit partial-information objectives for a three-outcome POVM
/// E_1 = a0(I + a.pauli), E_2 = b0(I + b.pauli): the averaged-covariance
/// determinant numerator A = det(D - cC), the design-volume B = det C, and
/// the sign condition d_12 - c c_12 <= 0 that drives the optimum.
inline PartialObjectives qubit_partial_objectives(const Eigen::Vector3d &a,
                                                  const Eigen::Vector3d &b,
                                                  double a0, double b0,
                                                  double theta3, double c) {
    require(a0 > 0 && b0 > 0, errc::domain_error, "weights must be positive");
    require(a.norm() <= 1.0 + 1e-12 && b.norm() <= 1.0 + 1e-12, errc::domain_error,
            "direction vectors must have norm <= 1");
    require(std::abs(theta3) <= 1.0, errc::domain_error,
            "theta3 must lie in [-1,1]");
    require(c >= -1e-15 && c <= 1.0 - theta3 * theta3 + 1e-12, errc::domain_error,
            "c must lie in [0, 1-theta3^2]");

    const double p = 1.0 + a(2) * theta3;
    const double q = 1.0 + b(2) * theta3;
    const double c11 = a(0) * a(0) + a(1) * a(1);
    const double c22 = b(0) * b(0) + b(1) * b(1);
    const double c12 = a(0) * b(0) + a(1) * b(1);
    const double d11 = p / a0 - p * p;
    const double d22 = q / b0 - q * q;
    const double d12 = -p * q;

    PartialObjectives result;
    result.A = (d11 - c * c11) * (d22 - c * c22) -
               (d12 - c * c12) * (d12 - c * c12);
    result.B = c11 * c22 - c12 * c12;
    result.lemma_holds = d12 - c * c12 <= 1e-12;
    return result;
}

} // namespace tomo
