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
 * Sampling harness: repeated estimation experiments against a true state,
 * with empirical means, covariances and jackknife standard errors. This is
 * the oracle the closed-form error matrices are validated against.
 *
 * POVM designs draw m-shot multinomial outcomes per run; von Neumann
 * families draw m Bernoulli outcomes per effect on its own batch of copies,
 * so outcomes across effects are independent by construction. Runs use
 * per-index RNG substreams and an ordered reduction: a report is a function
 * of the spec (seed included) alone.
 */

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/estimation.hpp"
#include "tomo/linalg.hpp"
#include "tomo/measurement.hpp"
#include "tomo/parallel.hpp"
#include "tomo/rng.hpp"

namespace tomo {

struct ExperimentSpec {
    DesignKind kind = DesignKind::povm;
    Povm povm;
    VonNeumannFamily family;
    KnownMask known;
    OperatorBasis basis;
    BlochState true_state;
    long shots = 1; // m: copies per run (per effect for families)
    long runs = 1;  // N: independent repetitions
    std::uint64_t seed = 1;
    int threads = 1;
    bool keep_runs = false;
};

struct EmpiricalReport {
    RVector mean_estimate;
    RMatrix empirical_cov;
    double unphysical_fraction = 0;
    RVector mean_stderr;  // standard error of the mean, per coordinate
    RMatrix cov_stderr;   // delete-one-run jackknife, per covariance entry
    RMatrix per_run;      // runs x d, filled only when keep_runs is set
};

namespace detail {

inline DesignMatrices build_spec_design(const ExperimentSpec &spec) {
    return spec.kind == DesignKind::povm
               ? build_design(spec.povm, spec.known, spec.basis)
               : build_design_vn(spec.family, spec.known, spec.basis);
}

} // namespace detail

inline EmpiricalReport run_experiments(const ExperimentSpec &spec) {
    require(spec.shots >= 1 && spec.runs >= 1, errc::domain_error,
            "shots and runs must be positive");
    const DesignMatrices design = detail::build_spec_design(spec);
    const int d = design.d;

    RVector outcome_probs;
    std::vector<double> cumulative;
    if (spec.kind == DesignKind::povm) {
        outcome_probs = probabilities(spec.true_state, spec.povm, spec.basis);
        double acc = 0;
        for (int i = 0; i < outcome_probs.size(); ++i) {
            acc += std::max(0.0, outcome_probs(i));
            cumulative.push_back(acc);
        }
    } else {
        outcome_probs = probabilities(spec.true_state, spec.family, spec.basis);
        for (int i = 0; i < outcome_probs.size(); ++i)
            require(outcome_probs(i) >= -1e-12 && outcome_probs(i) <= 1 + 1e-12,
                    errc::invalid_probability, "effect probability outside [0,1]");
    }

    RMatrix estimates(spec.runs, d);
    std::vector<char> physical(static_cast<std::size_t>(spec.runs), 0);
    const double inv_m = 1.0 / static_cast<double>(spec.shots);
    parallel_for(spec.runs, spec.threads, [&](long r) {
        Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(r));
        RVector freq = RVector::Zero(d);
        if (spec.kind == DesignKind::povm) {
            for (long shot = 0; shot < spec.shots; ++shot) {
                const int outcome = rng.discrete_from_cumulative(cumulative);
                if (outcome < d) freq(outcome) += 1.0;
            }
        } else {
            for (int i = 0; i < d; ++i) {
                const double p = std::clamp(outcome_probs(i), 0.0, 1.0);
                for (long shot = 0; shot < spec.shots; ++shot)
                    if (rng.bernoulli(p)) freq(i) += 1.0;
            }
        }
        freq *= inv_m;
        const EstimateResult estimated = estimate(design, freq);
        estimates.row(r) = estimated.theta_unknown.transpose();
        physical[static_cast<std::size_t>(r)] = estimated.physical ? 1 : 0;
    });

    EmpiricalReport report;
    const double n_runs = static_cast<double>(spec.runs);
    report.mean_estimate = estimates.colwise().mean().transpose();
    RMatrix centered = estimates.rowwise() - report.mean_estimate.transpose();
    if (spec.runs > 1) {
        report.empirical_cov =
            (centered.transpose() * centered) / (n_runs - 1.0);
    } else {
        report.empirical_cov = RMatrix::Zero(d, d);
    }
    report.empirical_cov =
        0.5 * (report.empirical_cov + report.empirical_cov.transpose()).eval();

    long unphysical = 0;
    for (char flag : physical) unphysical += flag ? 0 : 1;
    report.unphysical_fraction = static_cast<double>(unphysical) / n_runs;

    report.mean_stderr = RVector::Zero(d);
    report.cov_stderr = RMatrix::Zero(d, d);
    if (spec.runs > 2) {
        for (int j = 0; j < d; ++j)
            report.mean_stderr(j) = std::sqrt(report.empirical_cov(j, j) / n_runs);
        // Delete-one-run jackknife of each covariance entry.
        const RVector sum = estimates.colwise().sum().transpose();
        const RMatrix second = estimates.transpose() * estimates;
        RMatrix jack_mean = RMatrix::Zero(d, d);
        std::vector<RMatrix> jack(static_cast<std::size_t>(spec.runs));
        for (long r = 0; r < spec.runs; ++r) {
            const RVector x = estimates.row(r).transpose();
            const RVector loo_mean = (sum - x) / (n_runs - 1.0);
            RMatrix loo_cov = (second - x * x.transpose() -
                               (n_runs - 1.0) * loo_mean * loo_mean.transpose()) /
                              (n_runs - 2.0);
            jack[static_cast<std::size_t>(r)] = loo_cov;
            jack_mean += loo_cov;
        }
        jack_mean /= n_runs;
        RMatrix ss = RMatrix::Zero(d, d);
        for (const auto &loo : jack) {
            const RMatrix diff = loo - jack_mean;
            ss += diff.cwiseProduct(diff);
        }
        report.cov_stderr = (ss * (n_runs - 1.0) / n_runs).cwiseSqrt();
    }

    if (spec.keep_runs) report.per_run = std::move(estimates);
    return report;
}

/// Unphysical-estimate fraction along a schedule of shot counts. The true
/// state must be strictly inside the state space; on the boundary the
/// fraction has no reason to decay.
inline std::vector<std::pair<long, double>>
unphysical_decay(const ExperimentSpec &base, const std::vector<long> &shot_schedule) {
    require(min_eigenvalue(bloch_to_density(base.true_state, base.basis)) >
                positivity_eps,
            errc::domain_error,
            "unphysical_decay needs a strictly interior true state");
    std::vector<std::pair<long, double>> fractions;
    for (std::size_t i = 0; i < shot_schedule.size(); ++i) {
        ExperimentSpec spec = base;
        spec.shots = shot_schedule[i];
        std::uint64_t mix = base.seed ^ (0xD1342543DE82EF95ull *
                                         static_cast<std::uint64_t>(i + 1));
        spec.seed = splitmix64(mix);
        fractions.emplace_back(spec.shots,
                               run_experiments(spec).unphysical_fraction);
    }
    return fractions;
}

} // namespace tomo
