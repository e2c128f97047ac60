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
 * Small derivative-free minimizers: Nelder-Mead simplex descent with
 * adaptive coefficients, and a compass (coordinate pattern) search used as
 * a polish step and for box-constrained low-dimensional problems. Both are
 * deterministic given their inputs; infeasible points should be signalled
 * by returning a large finite value from the objective.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace tomo {

using Objective = std::function<double(const Eigen::VectorXd &)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0;
    long iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    long max_iters = 20000;
    double tol = 1e-10;       // value-spread convergence threshold
    int patience = 50;        // consecutive small-change iterations required
    double init_step = 0.5;   // initial simplex edge along each axis
};

inline MinimizeResult nelder_mead(const Objective &fn, const Eigen::VectorXd &x0,
                                  const NelderMeadOptions &options = {}) {
    const int dim = static_cast<int>(x0.size());
    // Adaptive coefficients; for small dimension they reduce to the classic
    // 1, 2, 1/2, 1/2 choice.
    const double refl = 1.0;
    const double expa = 1.0 + 2.0 / dim;
    const double contr = 0.75 - 0.5 / dim;
    const double shrink = 1.0 - 1.0 / dim;

    std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(dim) + 1, x0);
    std::vector<double> values(static_cast<std::size_t>(dim) + 1);
    for (int i = 0; i < dim; ++i)
        points[static_cast<std::size_t>(i) + 1](i) += options.init_step;
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = fn(points[i]);

    std::vector<std::size_t> order(points.size());
    MinimizeResult result;
    int calm = 0;
    for (result.iterations = 0; result.iterations < options.max_iters;
         ++result.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        if (values[worst] - values[best] <
            options.tol * (std::abs(values[best]) + options.tol)) {
            if (++calm >= options.patience) {
                result.converged = true;
                break;
            }
        } else {
            calm = 0;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (std::size_t i : order)
            if (i != worst) centroid += points[i];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd reflected = centroid + refl * (centroid - points[worst]);
        const double f_reflected = fn(reflected);
        if (f_reflected < values[best]) {
            const Eigen::VectorXd expanded =
                centroid + expa * (reflected - centroid);
            const double f_expanded = fn(expanded);
            if (f_expanded < f_reflected) {
                points[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                points[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            points[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const Eigen::VectorXd contracted =
            outside ? Eigen::VectorXd(centroid + contr * (reflected - centroid))
                    : Eigen::VectorXd(centroid - contr * (centroid - points[worst]));
        const double f_contracted = fn(contracted);
        if (f_contracted < std::min(f_reflected, values[worst])) {
            points[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i : order) {
            if (i == best) continue;
            points[i] = points[best] + shrink * (points[i] - points[best]);
            values[i] = fn(points[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[best]) best = i;
    result.x = points[best];
    result.value = values[best];
    return result;
}

struct CompassOptions {
    double init_step = 0.1;
    double min_step = 1e-9;
    long max_evals = 2000000;
};

/// Coordinate pattern search: sweep +-step moves per coordinate, halve the
/// step when a full sweep yields no improvement. Robust near constraint
/// boundaries where simplex methods stall.
inline MinimizeResult compass_search(const Objective &fn, const Eigen::VectorXd &x0,
                                     const CompassOptions &options = {}) {
    MinimizeResult result;
    result.x = x0;
    result.value = fn(x0);
    long evals = 1;
    double step = options.init_step;
    while (step >= options.min_step && evals < options.max_evals) {
        bool improved = false;
        for (int i = 0; i < result.x.size() && evals < options.max_evals; ++i) {
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd candidate = result.x;
                candidate(i) += sign * step;
                const double value = fn(candidate);
                ++evals;
                if (value < result.value) {
                    result.x = candidate;
                    result.value = value;
                    improved = true;
                    break;
                }
            }
        }
        ++result.iterations;
        if (!improved) step *= 0.5;
    }
    result.converged = step < options.min_step;
    return result;
}

} // namespace tomo
