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
 * Design optimization under positivity and completeness constraints.
 *
 * POVM designs minimize the determinant of the averaged error matrix. Each
 * element is parametrized as a Gram block A_i* A_i and the family is
 * whitened by the inverse square root of the block sum, so every iterate is
 * exactly positive and complete; the search is simplex descent with random
 * restarts and a compass-polish, which handles the optima sitting on the
 * rank boundary.
 *
 * Von Neumann families maximize |det T| over effects with a common fixed
 * spectrum. det T is linear in each row of T, so one effect at a time can
 * be driven to its exact conditional optimum through an eigendecomposition
 * of the cofactor combination of the basis elements; sweeping rows is a
 * monotone ascent.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/estimation.hpp"
#include "tomo/linalg.hpp"
#include "tomo/measurement.hpp"
#include "tomo/minimize.hpp"
#include "tomo/parallel.hpp"
#include "tomo/prior_average.hpp"
#include "tomo/rng.hpp"

namespace tomo {

struct OptimizationProblem {
    int dim = 2;
    DesignKind kind = DesignKind::povm;
    int outcomes = 0;    // POVM kind: element count, must equal d+1
    RVector vn_spectrum; // von Neumann kind: shared spectrum template
    KnownMask known;
    InvariantPrior prior;
    OperatorBasis basis;
    std::uint64_t seed = 1;
    int restarts = 32;
    long max_iters = 20000;
    double tol = 1e-10;
    int threads = 1;
};

struct StructureReport {
    std::optional<SicReport> sic;  // POVM designs only
    double max_pairwise_residual = 0;
    double max_known_residual = 0;
};

struct OptimizationResult {
    DesignKind kind = DesignKind::povm;
    Povm povm;
    VonNeumannFamily family;
    double objective = 0;
    long iterations = 0;
    bool converged = false;
    StructureReport structure;
    std::uint64_t seed = 0;
    int best_restart = -1;
};

namespace detail {

inline constexpr double objective_penalty = 1e12;

/// Parameter block -> POVM: k complex factors A_i packed as interleaved
/// re/im; E_i = S^{-1/2} A_i* A_i S^{-1/2} with S the Gram sum.
inline bool povm_from_params(const RVector &x, int n, int k, Povm &out) {
    const int block = 2 * n * n;
    std::vector<CMatrix> grams;
    grams.reserve(static_cast<std::size_t>(k));
    CMatrix total = CMatrix::Zero(n, n);
    for (int i = 0; i < k; ++i) {
        CMatrix a(n, n);
        int offset = i * block;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                a(r, c) = Complex(x(offset), x(offset + 1));
                offset += 2;
            }
        grams.push_back(a.adjoint() * a);
        total += grams.back();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(total);
    const RVector evals = solver.eigenvalues();
    if (!(evals.minCoeff() > 1e-12 * std::max(1.0, evals.maxCoeff()))) return false;
    const CMatrix whitener = solver.operatorInverseSqrt();
    out.dim = n;
    out.elements.clear();
    for (const auto &g : grams)
        out.elements.push_back(hermitize(whitener * g * whitener));
    return true;
}

inline RVector initial_povm_params(int n, int k, Rng &rng) {
    const int block = 2 * n * n;
    RVector x(k * block);
    const double base = 1.0 / std::sqrt(static_cast<double>(k));
    for (int i = 0; i < k; ++i) {
        int offset = i * block;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const double re = (r == c ? base : 0.0) + 0.25 * rng.gaussian();
                const double im = 0.25 * rng.gaussian();
                x(offset) = re;
                x(offset + 1) = im;
                offset += 2;
            }
    }
    return x;
}

inline double max_pairwise_quasi_residual(const std::vector<CMatrix> &ops) {
    double worst = 0;
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j)
            worst = std::max(worst,
                             check_quasi_orthogonal(ops[i], ops[j], 1.0).residual);
    return worst;
}

inline double max_known_quasi_residual(const std::vector<CMatrix> &ops,
                                       const KnownMask &known,
                                       const OperatorBasis &basis) {
    double worst = 0;
    for (const auto &op : ops)
        for (int j = 0; j < basis.size(); ++j)
            if (known.flags[static_cast<std::size_t>(j)])
                worst = std::max(
                    worst,
                    check_quasi_orthogonal(op, basis.elements[j], 1.0).residual);
    return worst;
}

/// Signed row-i cofactors of T, by minors; well-defined for singular T.
inline RVector row_cofactors(const RMatrix &t, int row) {
    const int d = static_cast<int>(t.rows());
    RVector cof(d);
    RMatrix minor(d - 1, d - 1);
    for (int col = 0; col < d; ++col) {
        int mr = 0;
        for (int r = 0; r < d; ++r) {
            if (r == row) continue;
            int mc = 0;
            for (int c = 0; c < d; ++c) {
                if (c == col) continue;
                minor(mr, mc++) = t(r, c);
            }
            ++mr;
        }
        const double sign = ((row + col) % 2 == 0) ? 1.0 : -1.0;
        cof(col) = (d == 1) ? sign : sign * minor.determinant();
    }
    return cof;
}

} // namespace detail

/// |det T| of a von Neumann design over the unknown coordinates; returns 0
/// for singular T instead of raising.
inline double vn_det_t(const VonNeumannFamily &f, const KnownMask &known,
                       const OperatorBasis &basis) {
    const int d = known.unknown_count();
    require(f.size() == d, errc::dimension_mismatch,
            "family size must equal the number of unknown coordinates");
    require(f.dim == basis.dim, errc::dimension_mismatch,
            "family/basis dimension mismatch");
    const auto unknown = known.unknown_indices();
    RMatrix t(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            t(i, j) = hs_inner(basis.elements[unknown[static_cast<std::size_t>(j)]],
                               f.effects[static_cast<std::size_t>(i)]);
    return std::abs(t.determinant());
}

namespace detail {

struct RestartOutcome {
    RVector x;
    double value = objective_penalty;
    long iterations = 0;
    bool converged = false;
};

inline OptimizationResult optimize_povm(const OptimizationProblem &problem) {
    const int n = problem.dim;
    const int d = problem.known.unknown_count();
    const int k = problem.outcomes;
    require(k >= d + 1, errc::under_determined_design,
            "need at least d+1 POVM outcomes");
    require(k == d + 1, errc::over_complete_design,
            "estimators for POVMs with more than d+1 outcomes are unsupported");

    auto objective = [&](const RVector &x) -> double {
        Povm p;
        if (!povm_from_params(x, n, k, p)) return objective_penalty;
        try {
            const auto report =
                avg_error_matrix(build_design(p, problem.known, problem.basis),
                                 problem.prior);
            if (!std::isfinite(report.det_value)) return objective_penalty;
            return report.det_value;
        } catch (const Error &) {
            return objective_penalty;
        }
    };

    std::vector<RestartOutcome> outcomes(
        static_cast<std::size_t>(std::max(1, problem.restarts)));
    NelderMeadOptions nm_options;
    nm_options.max_iters = problem.max_iters;
    nm_options.tol = problem.tol;
    nm_options.init_step = 0.15;
    parallel_for(static_cast<long>(outcomes.size()), problem.threads, [&](long r) {
        Rng rng = Rng::substream(problem.seed, static_cast<std::uint64_t>(r));
        const RVector x0 = initial_povm_params(n, k, rng);
        const MinimizeResult nm = nelder_mead(objective, x0, nm_options);
        outcomes[static_cast<std::size_t>(r)] =
            {nm.x, nm.value, nm.iterations, nm.converged};
    });

    int best = 0;
    for (int r = 1; r < static_cast<int>(outcomes.size()); ++r)
        if (outcomes[static_cast<std::size_t>(r)].value <
            outcomes[static_cast<std::size_t>(best)].value)
            best = r;
    const RestartOutcome &winner = outcomes[static_cast<std::size_t>(best)];
    require(winner.value < objective_penalty, errc::infeasible,
            "no feasible design found over the configured restarts");

    CompassOptions polish_options;
    polish_options.init_step = 0.05;
    polish_options.min_step = 1e-9;
    const MinimizeResult polished = compass_search(objective, winner.x, polish_options);

    OptimizationResult result;
    result.kind = DesignKind::povm;
    result.seed = problem.seed;
    result.best_restart = best;
    result.iterations = winner.iterations + polished.iterations;
    result.objective = polished.value;
    require(povm_from_params(polished.x, n, k, result.povm), errc::infeasible,
            "optimizer returned an infeasible parameter vector");

    double residual = 0;
    for (const auto &violation : validate_povm(result.povm))
        residual = std::max(residual, violation.magnitude);
    result.converged = (winner.converged || polished.converged) && residual < 1e-8;

    const bool masked = problem.known.unknown_count() < problem.known.size();
    result.structure.sic = check_sic(
        result.povm, masked ? problem.known.flags : std::vector<bool>{},
        problem.basis);
    result.structure.max_pairwise_residual =
        max_pairwise_quasi_residual(result.povm.elements);
    if (masked)
        result.structure.max_known_residual = max_known_quasi_residual(
            result.povm.elements, problem.known, problem.basis);
    return result;
}

inline OptimizationResult optimize_von_neumann(const OptimizationProblem &problem) {
    const int n = problem.dim;
    const int d = problem.known.unknown_count();
    require(problem.vn_spectrum.size() == n, errc::domain_error,
            "spectrum template must have n entries");
    for (int i = 0; i < n; ++i)
        require(problem.vn_spectrum(i) >= -1e-12 &&
                    problem.vn_spectrum(i) <= 1.0 + 1e-12,
                errc::domain_error, "spectrum entries must lie in [0,1]");
    RVector spectrum = problem.vn_spectrum;
    std::sort(spectrum.data(), spectrum.data() + spectrum.size()); // ascending

    const auto unknown = problem.known.unknown_indices();
    std::vector<const CMatrix *> f_elements;
    f_elements.reserve(static_cast<std::size_t>(d));
    for (int j : unknown)
        f_elements.push_back(&problem.basis.elements[static_cast<std::size_t>(j)]);

    auto design_row = [&](const CMatrix &effect, RMatrix &t, int i) {
        for (int j = 0; j < d; ++j) t(i, j) = hs_inner(*f_elements[static_cast<std::size_t>(j)], effect);
    };

    struct VnOutcome {
        std::vector<CMatrix> effects;
        double abs_det = 0;
        long sweeps = 0;
        bool converged = false;
    };
    std::vector<VnOutcome> outcomes(
        static_cast<std::size_t>(std::max(1, problem.restarts)));

    const long max_sweeps = std::max<long>(8, problem.max_iters / std::max(1, d));
    parallel_for(static_cast<long>(outcomes.size()), problem.threads, [&](long r) {
        Rng rng = Rng::substream(problem.seed, static_cast<std::uint64_t>(r));
        VnOutcome &out = outcomes[static_cast<std::size_t>(r)];
        out.effects.clear();
        for (int i = 0; i < d; ++i) {
            const CMatrix u = haar_unitary(n, rng);
            out.effects.push_back(hermitize(u * spectrum.asDiagonal() * u.adjoint()));
        }
        RMatrix t(d, d);
        for (int i = 0; i < d; ++i) design_row(out.effects[static_cast<std::size_t>(i)], t, i);
        double det = t.determinant();

        int calm = 0;
        for (out.sweeps = 0; out.sweeps < max_sweeps; ++out.sweeps) {
            const double before = std::abs(det);
            for (int i = 0; i < d; ++i) {
                const RVector cof = row_cofactors(t, i);
                CMatrix direction = CMatrix::Zero(n, n);
                for (int j = 0; j < d; ++j)
                    direction += cof(j) * (*f_elements[static_cast<std::size_t>(j)]);
                if (direction.cwiseAbs().maxCoeff() < 1e-15) continue;
                Eigen::SelfAdjointEigenSolver<CMatrix> solver(direction);
                const RVector evals = solver.eigenvalues(); // ascending
                const CMatrix vectors = solver.eigenvectors();
                // Extremal Tr(E, direction) over the spectral orbit: pair the
                // sorted spectrum with the eigenvalues in matching (max) or
                // opposing (min) order.
                double t_max = 0, t_min = 0;
                for (int l = 0; l < n; ++l) {
                    t_max += spectrum(l) * evals(l);
                    t_min += spectrum(l) * evals(n - 1 - l);
                }
                const bool take_max = std::abs(t_max) >= std::abs(t_min);
                const double candidate = take_max ? t_max : t_min;
                if (std::abs(candidate) <= std::abs(det) * (1 + 1e-15)) continue;
                CMatrix effect = CMatrix::Zero(n, n);
                for (int l = 0; l < n; ++l) {
                    const int slot = take_max ? l : n - 1 - l;
                    effect += spectrum(slot) * vectors.col(l) * vectors.col(l).adjoint();
                }
                out.effects[static_cast<std::size_t>(i)] = hermitize(effect);
                design_row(out.effects[static_cast<std::size_t>(i)], t, i);
                det = candidate;
            }
            const double after = std::abs(det);
            if (after - before <= problem.tol * (before + problem.tol)) {
                if (++calm >= 2) {
                    out.converged = true;
                    break;
                }
            } else {
                calm = 0;
            }
        }
        // The tracked value is exact linear algebra per update; recompute
        // from T once at the end so reported objectives carry no drift.
        out.abs_det = std::abs(t.determinant());
    });

    int best = 0;
    for (int r = 1; r < static_cast<int>(outcomes.size()); ++r)
        if (outcomes[static_cast<std::size_t>(r)].abs_det >
            outcomes[static_cast<std::size_t>(best)].abs_det)
            best = r;
    VnOutcome &winner = outcomes[static_cast<std::size_t>(best)];
    require(winner.abs_det > 0, errc::infeasible,
            "all restarts produced singular designs");

    OptimizationResult result;
    result.kind = DesignKind::von_neumann;
    result.seed = problem.seed;
    result.best_restart = best;
    result.iterations = winner.sweeps;
    result.converged = winner.converged;
    result.family.dim = n;
    result.family.effects = std::move(winner.effects);
    result.objective = -winner.abs_det;
    result.structure.max_pairwise_residual =
        max_pairwise_quasi_residual(result.family.effects);
    if (problem.known.unknown_count() < problem.known.size())
        result.structure.max_known_residual = max_known_quasi_residual(
            result.family.effects, problem.known, problem.basis);
    return result;
}

} // namespace detail

/// Minimizes the configured design objective: det of the averaged error
/// matrix for POVM problems, -|det T| for von Neumann problems. Restarts
/// run on independent RNG substreams; ties break on the restart index, so
/// results are reproducible bit-for-bit for a fixed (problem, seed).
inline OptimizationResult optimize(const OptimizationProblem &problem) {
    require(problem.dim >= 2, errc::invalid_dimension, "dimension must be >= 2");
    require(problem.tol > 0, errc::domain_error, "tolerance must be positive");
    require(problem.known.size() == problem.basis.size(), errc::dimension_mismatch,
            "mask length must match the basis");
    return problem.kind == DesignKind::povm
               ? detail::optimize_povm(problem)
               : detail::optimize_von_neumann(problem);
}

struct SymmetricOptimum {
    double x = 0;
    double y = 0;
    double value = 0;
    long iterations = 0;
};

/// Numerical minimizer of symmetric_objective over its feasible region
/// {0 < x <= n^2-n, Gram PSD, (n^2-1)(x+(n^2-2)y) <= n^2-n}. Searches in
/// the (x, s = x+(n^2-2)y) box, where the constraints are axis-aligned,
/// with a coarse grid followed by a projected compass descent.
inline SymmetricOptimum minimize_symmetric_objective_region(int n, double alpha) {
    require(n >= 2, errc::invalid_dimension, "n must be >= 2");
    const double nn = static_cast<double>(n) * n;
    const double x_max = nn - n;
    const double s_max = (nn - n) / (nn - 1.0);

    auto value_at = [&](double x, double s) -> double {
        if (!(x > 0) || x > x_max || !(s > 0) || s > s_max)
            return detail::objective_penalty;
        const double y = (s - x) / (nn - 2.0);
        if (x - y <= 1e-15) return detail::objective_penalty;
        return symmetric_objective(n, x, y, alpha);
    };

    SymmetricOptimum best;
    best.value = detail::objective_penalty;
    const int grid = 160;
    double bx = x_max, bs = s_max;
    for (int i = 1; i <= grid; ++i)
        for (int j = 1; j <= grid; ++j) {
            const double x = x_max * i / grid;
            const double s = s_max * j / grid;
            const double v = value_at(x, s);
            if (v < best.value) {
                best.value = v;
                bx = x;
                bs = s;
            }
        }
    best.iterations = grid * grid;

    double step = 0.25;
    while (step >= 1e-12) {
        bool improved = false;
        const double moves[4][2] = {{step, 0}, {-step, 0}, {0, step}, {0, -step}};
        for (const auto &move : moves) {
            const double x = std::clamp(bx + move[0], 0.0, x_max);
            const double s = std::clamp(bs + move[1], 0.0, s_max);
            if (x == bx && s == bs) continue;
            const double v = value_at(x, s);
            ++best.iterations;
            if (v < best.value) {
                best.value = v;
                bx = x;
                bs = s;
                improved = true;
                break;
            }
        }
        if (!improved) step *= 0.5;
    }

    best.x = bx;
    best.y = (bs - bx) / (nn - 2.0);
    return best;
}

} // namespace tomo
