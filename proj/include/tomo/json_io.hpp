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
 * JSON schemas for every type that crosses the CLI boundary.
 *
 * Complex matrices are arrays of rows, each entry a [re, im] pair. Bloch
 * vectors are flat real arrays with an explicit "basis_order" tag naming
 * the element ordering they are expressed in; readers reject a tag that
 * does not match the active basis.
 */

#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomo/errors.hpp"
#include "tomo/estimation.hpp"
#include "tomo/linalg.hpp"
#include "tomo/measurement.hpp"
#include "tomo/operator_basis.hpp"
#include "tomo/optimizer.hpp"
#include "tomo/prior_average.hpp"
#include "tomo/simulator.hpp"

namespace tomo {

using nlohmann::json;

inline json matrix_to_json(const CMatrix &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const json &j, int expected_dim = -1) {
    if (!j.is_array() || j.empty())
        fail(errc::parse_error, "matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    if (expected_dim >= 0 && (rows != expected_dim || cols != expected_dim))
        fail(errc::parse_error, "matrix has dimension " + std::to_string(rows) +
                                    "x" + std::to_string(cols) + ", expected " +
                                    std::to_string(expected_dim));
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto &row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            fail(errc::parse_error, "matrix rows have inconsistent lengths");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto &entry = row.at(static_cast<std::size_t>(c));
            if (!entry.is_array() || entry.size() != 2)
                fail(errc::parse_error, "matrix entries must be [re, im] pairs");
            m(r, c) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    }
    return m;
}

inline json real_matrix_to_json(const RMatrix &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const RVector &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline RVector vector_from_json(const json &j) {
    if (!j.is_array()) fail(errc::parse_error, "expected a real array");
    RVector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

// --------------------------------- designs ---------------------------------

inline json to_json(const Povm &p) {
    json j;
    j["dim"] = p.dim;
    j["elements"] = json::array();
    for (const auto &e : p.elements) j["elements"].push_back(matrix_to_json(e));
    return j;
}

inline Povm povm_from_json(const json &j) {
    Povm p;
    try {
        p.dim = j.at("dim").get<int>();
        for (const auto &e : j.at("elements"))
            p.elements.push_back(matrix_from_json(e, p.dim));
    } catch (const json::exception &e) {
        fail(errc::parse_error, std::string("malformed POVM JSON: ") + e.what());
    }
    return p;
}

inline json to_json(const VonNeumannFamily &f) {
    json j;
    j["dim"] = f.dim;
    j["effects"] = json::array();
    for (const auto &e : f.effects) j["effects"].push_back(matrix_to_json(e));
    return j;
}

inline VonNeumannFamily family_from_json(const json &j) {
    VonNeumannFamily f;
    try {
        f.dim = j.at("dim").get<int>();
        for (const auto &e : j.at("effects"))
            f.effects.push_back(matrix_from_json(e, f.dim));
    } catch (const json::exception &e) {
        fail(errc::parse_error, std::string("malformed family JSON: ") + e.what());
    }
    return f;
}

inline json to_json(const OperatorBasis &basis) {
    json j;
    j["dim"] = basis.dim;
    j["order"] = basis.order_tag;
    j["elements"] = json::array();
    for (const auto &e : basis.elements) j["elements"].push_back(matrix_to_json(e));
    return j;
}

inline json state_to_json(const BlochState &state, const OperatorBasis &basis) {
    json j;
    j["dim"] = state.dim;
    j["theta"] = vector_to_json(state.theta);
    j["basis_order"] = basis.order_tag;
    if (!state.known_mask.empty()) j["known_mask"] = state.known_mask;
    return j;
}

inline BlochState state_from_json(const json &j, const OperatorBasis &basis) {
    BlochState state;
    try {
        state.dim = j.at("dim").get<int>();
        state.theta = vector_from_json(j.at("theta"));
        if (j.contains("known_mask"))
            state.known_mask = j.at("known_mask").get<std::vector<bool>>();
        const std::string tag = j.value("basis_order", basis.order_tag);
        if (tag != basis.order_tag)
            fail(errc::parse_error, "state basis_order '" + tag +
                                        "' does not match the active basis '" +
                                        basis.order_tag + "'");
    } catch (const json::exception &e) {
        fail(errc::parse_error, std::string("malformed state JSON: ") + e.what());
    }
    require(state.dim == basis.dim &&
                state.theta.size() == static_cast<Eigen::Index>(basis.size()),
            errc::parse_error, "state length does not match the basis");
    return state;
}

// ---------------------------------- priors ---------------------------------

inline json to_json(const InvariantPrior &prior) {
    json j;
    j["dim"] = prior.dim;
    j["alpha"] = prior.alpha;
    switch (prior.kind) {
    case PriorKind::haar_orbit:
        j["kind"] = "haar_orbit";
        j["spectrum"] = vector_to_json(prior.spectrum);
        break;
    case PriorKind::two_point_qubit:
        j["kind"] = "two_point_qubit";
        j["theta3"] = prior.theta3;
        break;
    case PriorKind::circle_qubit:
        j["kind"] = "circle_qubit";
        j["theta3"] = prior.theta3;
        j["radius"] = prior.radius;
        break;
    }
    return j;
}

inline InvariantPrior prior_from_json(const json &j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "haar_orbit") {
            const RVector spectrum = vector_from_json(j.at("spectrum"));
            const int dim = j.value("dim", static_cast<int>(spectrum.size()));
            return make_haar_orbit_prior(dim, spectrum);
        }
        if (kind == "two_point_qubit")
            return make_two_point_qubit_prior(j.at("theta3").get<double>());
        if (kind == "circle_qubit")
            return make_circle_qubit_prior(j.at("theta3").get<double>(),
                                           j.at("radius").get<double>());
        fail(errc::parse_error, "unknown prior kind '" + kind + "'");
    } catch (const json::exception &e) {
        fail(errc::parse_error, std::string("malformed prior JSON: ") + e.what());
    }
}

inline json to_json(const KnownMask &mask) {
    json j;
    j["flags"] = mask.flags;
    j["values"] = vector_to_json(mask.values);
    return j;
}

inline KnownMask mask_from_json(const json &j, int parameter_count) {
    KnownMask mask = KnownMask::none(parameter_count);
    try {
        if (j.contains("flags")) mask.flags = j.at("flags").get<std::vector<bool>>();
        if (j.contains("values")) mask.values = vector_from_json(j.at("values"));
    } catch (const json::exception &e) {
        fail(errc::parse_error, std::string("malformed mask JSON: ") + e.what());
    }
    require(static_cast<int>(mask.flags.size()) == parameter_count &&
                mask.values.size() == parameter_count,
            errc::parse_error, "mask length does not match the parameter count");
    return mask;
}

// --------------------------------- reports ---------------------------------

inline json to_json(const Violation &violation) {
    return json{{"invariant", violation.invariant},
                {"magnitude", violation.magnitude}};
}

inline json to_json(const SicReport &report) {
    return json{{"k", report.k},
                {"lambda", report.lambda},
                {"mu", report.mu},
                {"max_lambda_residual", report.max_lambda_residual},
                {"max_mu_residual", report.max_mu_residual},
                {"all_rank_one", report.all_rank_one},
                {"quasi_orthogonal_to_known", report.quasi_orthogonal_to_known},
                {"max_known_residual", report.max_known_residual}};
}

inline json to_json(const ObjectiveReport &report) {
    json j{{"avg_cov", real_matrix_to_json(report.avg_cov)},
           {"det_value", report.det_value},
           {"method", report.method},
           {"degenerate", report.degenerate},
           {"seed", report.seed},
           {"samples", report.samples}};
    if (report.mc_stderr) j["mc_stderr"] = *report.mc_stderr;
    return j;
}

inline json to_json(const DesignMatrices &design) {
    return json{{"dim", design.dim},
                {"d", design.d},
                {"offsets", vector_to_json(design.offsets)},
                {"T", real_matrix_to_json(design.T)},
                {"model", design.model == OutcomeModel::multinomial
                              ? "multinomial"
                              : "independent_bernoulli"}};
}

inline json to_json(const ErrorMatrices &em) {
    return json{{"W", real_matrix_to_json(em.W)}, {"V", real_matrix_to_json(em.V)}};
}

inline json to_json(const EmpiricalReport &report) {
    return json{{"mean_estimate", vector_to_json(report.mean_estimate)},
                {"empirical_cov", real_matrix_to_json(report.empirical_cov)},
                {"unphysical_fraction", report.unphysical_fraction},
                {"mean_stderr", vector_to_json(report.mean_stderr)},
                {"cov_stderr", real_matrix_to_json(report.cov_stderr)}};
}

inline json to_json(const OptimizationProblem &problem) {
    json j;
    j["dim"] = problem.dim;
    j["kind"] = problem.kind == DesignKind::povm ? "povm" : "von_neumann";
    if (problem.kind == DesignKind::povm)
        j["outcomes"] = problem.outcomes;
    else
        j["spectrum"] = vector_to_json(problem.vn_spectrum);
    j["mask"] = to_json(problem.known);
    j["prior"] = to_json(problem.prior);
    j["basis"] = problem.basis.order_tag == order_tags::pauli_product
                     ? "pauli-product"
                     : "gellmann";
    j["seed"] = problem.seed;
    j["restarts"] = problem.restarts;
    j["max_iters"] = problem.max_iters;
    j["tol"] = problem.tol;
    j["threads"] = problem.threads;
    return j;
}

inline OptimizationProblem problem_from_json(const json &j) {
    OptimizationProblem problem;
    try {
        problem.dim = j.at("dim").get<int>();
        const std::string basis_tag = j.value("basis", "gellmann");
        if (basis_tag == "gellmann") {
            problem.basis = build_basis(problem.dim);
        } else if (basis_tag == "pauli-product") {
            require(problem.dim == 4, errc::parse_error,
                    "pauli-product basis requires dim 4");
            problem.basis = two_qubit_pauli_basis();
        } else {
            fail(errc::parse_error, "unknown basis '" + basis_tag + "'");
        }
        problem.known = j.contains("mask")
                            ? mask_from_json(j.at("mask"), problem.basis.size())
                            : KnownMask::none(problem.basis.size());
        problem.prior = prior_from_json(j.at("prior"));
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "povm") {
            problem.kind = DesignKind::povm;
            problem.outcomes =
                j.value("outcomes", problem.known.unknown_count() + 1);
        } else if (kind == "von_neumann") {
            problem.kind = DesignKind::von_neumann;
            problem.vn_spectrum = vector_from_json(j.at("spectrum"));
        } else {
            fail(errc::parse_error, "unknown design kind '" + kind + "'");
        }
        problem.seed = j.value("seed", std::uint64_t{1});
        problem.restarts = j.value("restarts", 32);
        problem.max_iters = j.value("max_iters", 20000L);
        problem.tol = j.value("tol", 1e-10);
        problem.threads = j.value("threads", 1);
    } catch (const json::exception &e) {
        fail(errc::parse_error, std::string("malformed problem JSON: ") + e.what());
    }
    return problem;
}

inline json to_json(const OptimizationResult &result) {
    json j;
    j["kind"] = result.kind == DesignKind::povm ? "povm" : "von_neumann";
    if (result.kind == DesignKind::povm)
        j["design"] = to_json(result.povm);
    else
        j["design"] = to_json(result.family);
    j["objective"] = result.objective;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["seed"] = result.seed;
    j["best_restart"] = result.best_restart;
    json structure;
    if (result.structure.sic) structure["sic"] = to_json(*result.structure.sic);
    structure["max_pairwise_residual"] = result.structure.max_pairwise_residual;
    structure["max_known_residual"] = result.structure.max_known_residual;
    j["structure"] = structure;
    return j;
}

// ----------------------------------- files ----------------------------------

inline json load_json_file(const std::string &path) {
    std::ifstream in(path);
    require(in.good(), errc::parse_error, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        fail(errc::parse_error, "parse error in '" + path + "': " + e.what());
    }
}

inline void write_json_file(const std::string &path, const json &j) {
    std::ofstream out(path);
    require(out.good(), errc::parse_error, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

} // namespace tomo
