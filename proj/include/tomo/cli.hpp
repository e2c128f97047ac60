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
 * Command-line front door. Subcommands:
 *
 *   validate     check a POVM / effect family file against its invariants
 *   bases        emit an operator basis
 *   verify-sic   symmetric-structure report for a POVM file
 *   demo-qutrit  regenerate and verify the bundled seven-element qutrit POVM
 *   objective    averaged-determinant objective (closed form or Monte Carlo)
 *   optimize     minimize the objective over designs
 *   simulate     repeated estimation experiments against a true state
 *
 * Every command is deterministic given its flags (seed included) and every
 * output file embeds the originating config. Exit codes: 0 success,
 * 1 validation failure, 2 parse/config error, 3 numerical failure.
 */

#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tomo/json_io.hpp"

namespace tomo {

namespace cli_detail {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

inline int exit_code_for(errc code) {
    switch (code) {
    case errc::singular_design:
    case errc::infeasible:
    case errc::degenerate_element:
    case errc::non_estimating_direction:
    case errc::domain_error:
        return exit_numerical;
    default:
        return exit_config;
    }
}

inline OperatorBasis basis_for(const std::string &tag, int dim) {
    if (tag == "gellmann") return build_basis(dim);
    if (tag == "pauli-product") {
        require(dim == 4, errc::parse_error,
                "--basis pauli-product is a two-qubit (dim 4) basis");
        return two_qubit_pauli_basis();
    }
    fail(errc::parse_error, "unknown basis '" + tag + "'");
}

/// Mask syntax: comma-separated index:value pairs in canonical units,
/// e.g. "2:0.3536" or "0:0,1:0". Empty string means nothing known.
inline KnownMask parse_mask(const std::string &text, int parameter_count) {
    KnownMask mask = KnownMask::none(parameter_count);
    if (text.empty()) return mask;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto colon = item.find(':');
        try {
            const int index = std::stoi(item.substr(0, colon));
            const double value =
                colon == std::string::npos ? 0.0 : std::stod(item.substr(colon + 1));
            require(index >= 0 && index < parameter_count, errc::parse_error,
                    "mask index out of range: " + item);
            mask.flags[static_cast<std::size_t>(index)] = true;
            mask.values(index) = value;
        } catch (const std::invalid_argument &) {
            fail(errc::parse_error, "bad mask entry '" + item + "'");
        } catch (const std::out_of_range &) {
            fail(errc::parse_error, "bad mask entry '" + item + "'");
        }
    }
    return mask;
}

inline json mask_to_config(const std::string &text) {
    return text.empty() ? json(nullptr) : json(text);
}

/// --prior accepts a file path or an inline JSON object.
inline InvariantPrior load_prior(const std::string &text) {
    if (!text.empty() && text.front() == '{') {
        try {
            return prior_from_json(json::parse(text));
        } catch (const json::parse_error &e) {
            fail(errc::parse_error, std::string("bad inline prior: ") + e.what());
        }
    }
    return prior_from_json(load_json_file(text));
}

struct LoadedDesign {
    DesignKind kind = DesignKind::povm;
    Povm povm;
    VonNeumannFamily family;
    int dim = 0;
};

inline LoadedDesign load_design(const std::string &path) {
    const json j = load_json_file(path);
    LoadedDesign design;
    if (j.contains("elements")) {
        design.kind = DesignKind::povm;
        design.povm = povm_from_json(j);
        design.dim = design.povm.dim;
    } else if (j.contains("effects")) {
        design.kind = DesignKind::von_neumann;
        design.family = family_from_json(j);
        design.dim = design.family.dim;
    } else {
        fail(errc::parse_error,
             "design file must contain 'elements' (POVM) or 'effects' (family)");
    }
    return design;
}

inline void emit(const json &payload, const std::string &output_path,
                 std::ostream &out) {
    if (output_path.empty())
        out << payload.dump(2) << "\n";
    else
        write_json_file(output_path, payload);
}

} // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream &out,
                   std::ostream &err) {
    using namespace cli_detail;

    CLI::App app{"Measurement-design toolkit: validation, averaged-error "
                 "objectives, design optimization and estimation experiments "
                 "for finite-dimensional quantum tomography."};
    app.name("tomodesign");
    app.require_subcommand(1);

    std::string input_path, output_path, mask_text, basis_tag = "gellmann";
    std::string prior_text, state_path, method = "closed", format = "json";
    std::string kind_text = "povm", spectrum_text;
    int dim = 2, outcomes = 0, restarts = 32, threads = 1;
    long samples = 100000, runs = 10000, shots = 1000, max_iters = 20000;
    std::uint64_t seed = 1;
    double tol = 1e-10;

    auto add_common = [&](CLI::App *cmd, bool with_seed) {
        cmd->add_option("--output", output_path, "write the report to this file");
        cmd->add_option("--tol", tol, "tolerance override");
        cmd->add_option("--threads", threads, "worker thread cap");
        if (with_seed) cmd->add_option("--seed", seed, "RNG seed");
    };

    CLI::App *validate = app.add_subcommand(
        "validate", "check a design file against the POVM/effect invariants");
    validate->add_option("--input", input_path, "design JSON file")->required();
    add_common(validate, false);

    CLI::App *bases = app.add_subcommand("bases", "emit an operator basis");
    bases->add_option("--dim", dim, "system dimension");
    bases->add_option("--basis", basis_tag, "gellmann or pauli-product");
    add_common(bases, false);

    CLI::App *verify = app.add_subcommand(
        "verify-sic", "symmetric-structure report for a POVM file");
    verify->add_option("--input", input_path, "POVM JSON file")->required();
    verify->add_option("--mask", mask_text, "known coordinates, index:value list");
    verify->add_option("--basis", basis_tag, "gellmann or pauli-product");
    add_common(verify, false);

    CLI::App *demo = app.add_subcommand(
        "demo-qutrit",
        "regenerate the seven-element qutrit POVM and verify it end to end");
    add_common(demo, false);

    CLI::App *objective = app.add_subcommand(
        "objective", "averaged error-matrix determinant for a design");
    objective->add_option("--input", input_path, "design JSON file")->required();
    objective->add_option("--prior", prior_text, "prior JSON file or inline JSON")
        ->required();
    objective->add_option("--mask", mask_text, "known coordinates");
    objective->add_option("--basis", basis_tag, "gellmann or pauli-product");
    objective->add_option("--method", method, "closed or mc");
    objective->add_option("--samples", samples, "Monte Carlo sample count");
    add_common(objective, true);

    std::string problem_path;
    CLI::App *optimize_cmd =
        app.add_subcommand("optimize", "minimize the averaged determinant");
    optimize_cmd->add_option("--problem", problem_path,
                             "full problem spec as a JSON file; other shape "
                             "flags are ignored, --seed etc. still override");
    optimize_cmd->add_option("--dim", dim, "system dimension");
    optimize_cmd->add_option("--kind", kind_text, "povm or von-neumann");
    optimize_cmd->add_option("--outcomes", outcomes,
                             "POVM outcome count (d+1); 0 means d+1");
    optimize_cmd->add_option("--spectrum", spectrum_text,
                             "comma-separated effect spectrum (von-neumann)");
    optimize_cmd->add_option("--prior", prior_text,
                             "prior JSON file or inline (required unless "
                             "--problem is given)");
    optimize_cmd->add_option("--mask", mask_text, "known coordinates");
    optimize_cmd->add_option("--basis", basis_tag, "gellmann or pauli-product");
    optimize_cmd->add_option("--restarts", restarts, "random restarts");
    optimize_cmd->add_option("--max-iters", max_iters, "iteration cap per restart");
    add_common(optimize_cmd, true);

    CLI::App *simulate = app.add_subcommand(
        "simulate", "repeated estimation experiments against a true state");
    simulate->add_option("--input", input_path, "design JSON file")->required();
    simulate->add_option("--state", state_path, "true state JSON file")->required();
    simulate->add_option("--mask", mask_text, "known coordinates");
    simulate->add_option("--basis", basis_tag, "gellmann or pauli-product");
    simulate->add_option("--shots", shots, "copies measured per run");
    simulate->add_option("--runs", runs, "independent runs");
    simulate->add_option("--format", format, "json or csv");
    add_common(simulate, true);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return exit_ok;
        }
        err << "config error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        if (app.got_subcommand(validate)) {
            const auto design = load_design(input_path);
            const auto violations =
                design.kind == DesignKind::povm
                    ? validate_povm(design.povm, tol > 0 ? tol : positivity_eps)
                    : validate_family(design.family,
                                      tol > 0 ? tol : positivity_eps);
            json report;
            report["config"] = {{"command", "validate"}, {"input", input_path},
                                {"tol", tol}};
            report["valid"] = violations.empty();
            report["violations"] = json::array();
            for (const auto &v : violations) report["violations"].push_back(to_json(v));
            emit(report, output_path, out);
            return violations.empty() ? exit_ok : exit_validation;
        }

        if (app.got_subcommand(bases)) {
            const OperatorBasis basis = basis_for(basis_tag, dim);
            json report = to_json(basis);
            report["config"] = {{"command", "bases"}, {"dim", dim},
                                {"basis", basis_tag}};
            emit(report, output_path, out);
            return exit_ok;
        }

        if (app.got_subcommand(verify)) {
            const json j = load_json_file(input_path);
            const Povm povm = povm_from_json(j);
            const OperatorBasis basis = basis_for(basis_tag, povm.dim);
            const KnownMask mask = parse_mask(mask_text, basis.size());
            const bool masked = mask.unknown_count() < mask.size();
            const SicReport report = check_sic(
                povm, masked ? mask.flags : std::vector<bool>{}, basis);
            json payload = to_json(report);
            payload["config"] = {{"command", "verify-sic"},
                                 {"input", input_path},
                                 {"mask", mask_to_config(mask_text)},
                                 {"basis", basis_tag}};
            emit(payload, output_path, out);
            return exit_ok;
        }

        if (app.got_subcommand(demo)) {
            const Povm povm = qutrit_seven_povm();
            const OperatorBasis basis = build_basis(3);
            const auto violations = validate_povm(povm, 1e-12);
            std::vector<bool> diag_mask(8, false);
            diag_mask[6] = diag_mask[7] = true;
            const SicReport report = check_sic(povm, diag_mask, basis);
            const bool pass = violations.empty() &&
                              std::abs(report.lambda - 7.0 / 3.0) <= 1e-10 &&
                              std::abs(report.mu - 2.0 / 9.0) <= 1e-10 &&
                              report.max_lambda_residual <= 1e-10 &&
                              report.max_mu_residual <= 1e-10 &&
                              report.all_rank_one &&
                              report.quasi_orthogonal_to_known;
            json payload;
            payload["config"] = {{"command", "demo-qutrit"}};
            payload["povm"] = to_json(povm);
            payload["sic"] = to_json(report);
            payload["valid_povm"] = violations.empty();
            payload["pass"] = pass;
            emit(payload, output_path, out);
            return pass ? exit_ok : exit_validation;
        }

        if (app.got_subcommand(objective)) {
            const auto design_file = load_design(input_path);
            const OperatorBasis basis = basis_for(basis_tag, design_file.dim);
            const KnownMask mask = parse_mask(mask_text, basis.size());
            const InvariantPrior prior = load_prior(prior_text);
            const DesignMatrices design =
                design_file.kind == DesignKind::povm
                    ? build_design(design_file.povm, mask, basis)
                    : build_design_vn(design_file.family, mask, basis);
            ObjectiveReport report;
            if (method == "closed")
                report = avg_error_matrix(design, prior);
            else if (method == "mc")
                report = avg_error_matrix_mc(design, prior, samples, seed, threads);
            else
                fail(errc::parse_error, "--method must be 'closed' or 'mc'");
            json payload = to_json(report);
            payload["design_matrices"] = to_json(design);
            payload["config"] = {{"command", "objective"},
                                 {"input", input_path},
                                 {"prior", to_json(prior)},
                                 {"mask", mask_to_config(mask_text)},
                                 {"basis", basis_tag},
                                 {"method", method},
                                 {"samples", samples},
                                 {"seed", seed}};
            emit(payload, output_path, out);
            return exit_ok;
        }

        if (app.got_subcommand(optimize_cmd)) {
            OptimizationProblem problem;
            if (!problem_path.empty()) {
                problem = problem_from_json(load_json_file(problem_path));
                if (optimize_cmd->count("--seed")) problem.seed = seed;
                if (optimize_cmd->count("--restarts")) problem.restarts = restarts;
                if (optimize_cmd->count("--max-iters")) problem.max_iters = max_iters;
                if (optimize_cmd->count("--tol")) problem.tol = tol;
                if (optimize_cmd->count("--threads")) problem.threads = threads;
                const OptimizationResult result = optimize(problem);
                json payload = to_json(result);
                payload["config"] = {{"command", "optimize"},
                                     {"problem_file", problem_path},
                                     {"problem", to_json(problem)}};
                emit(payload, output_path, out);
                return exit_ok;
            }
            require(!prior_text.empty(), errc::parse_error,
                    "optimize needs --prior (or a --problem file)");
            problem.dim = dim;
            problem.basis = basis_for(basis_tag, dim);
            problem.known = parse_mask(mask_text, problem.basis.size());
            problem.prior = load_prior(prior_text);
            problem.seed = seed;
            problem.restarts = restarts;
            problem.max_iters = max_iters;
            problem.tol = tol;
            problem.threads = threads;
            if (kind_text == "povm") {
                problem.kind = DesignKind::povm;
                problem.outcomes =
                    outcomes > 0 ? outcomes : problem.known.unknown_count() + 1;
            } else if (kind_text == "von-neumann") {
                problem.kind = DesignKind::von_neumann;
                std::stringstream stream(spectrum_text);
                std::vector<double> entries;
                std::string item;
                while (std::getline(stream, item, ',')) {
                    try {
                        entries.push_back(std::stod(item));
                    } catch (const std::exception &) {
                        fail(errc::parse_error, "bad spectrum entry '" + item + "'");
                    }
                }
                require(static_cast<int>(entries.size()) == dim, errc::parse_error,
                        "--spectrum must list n entries");
                problem.vn_spectrum =
                    Eigen::Map<RVector>(entries.data(),
                                        static_cast<Eigen::Index>(entries.size()));
            } else {
                fail(errc::parse_error, "--kind must be 'povm' or 'von-neumann'");
            }
            const OptimizationResult result = optimize(problem);
            json payload = to_json(result);
            payload["config"] = {{"command", "optimize"},
                                 {"dim", dim},
                                 {"kind", kind_text},
                                 {"outcomes", problem.outcomes},
                                 {"spectrum", spectrum_text},
                                 {"prior", to_json(problem.prior)},
                                 {"mask", mask_to_config(mask_text)},
                                 {"basis", basis_tag},
                                 {"seed", seed},
                                 {"restarts", restarts},
                                 {"max_iters", max_iters},
                                 {"tol", tol}};
            emit(payload, output_path, out);
            return exit_ok;
        }

        if (app.got_subcommand(simulate)) {
            const auto design_file = load_design(input_path);
            ExperimentSpec spec;
            spec.kind = design_file.kind;
            spec.povm = design_file.povm;
            spec.family = design_file.family;
            spec.basis = basis_for(basis_tag, design_file.dim);
            spec.known = parse_mask(mask_text, spec.basis.size());
            spec.true_state = state_from_json(load_json_file(state_path), spec.basis);
            spec.shots = shots;
            spec.runs = runs;
            spec.seed = seed;
            spec.threads = threads;
            spec.keep_runs = format == "csv";
            const EmpiricalReport report = run_experiments(spec);
            const json config = {{"command", "simulate"}, {"input", input_path},
                                 {"state", state_path},
                                 {"mask", mask_to_config(mask_text)},
                                 {"basis", basis_tag},  {"shots", shots},
                                 {"runs", runs},        {"seed", seed},
                                 {"format", format}};
            if (format == "csv") {
                std::ostringstream csv;
                csv << "# " << json(config).dump() << "\n";
                csv << "run";
                for (int j = 0; j < report.per_run.cols(); ++j)
                    csv << ",theta_" << j;
                csv << "\n";
                csv.precision(17);
                for (Eigen::Index r = 0; r < report.per_run.rows(); ++r) {
                    csv << r;
                    for (Eigen::Index c = 0; c < report.per_run.cols(); ++c)
                        csv << "," << report.per_run(r, c);
                    csv << "\n";
                }
                if (output_path.empty()) {
                    out << csv.str();
                } else {
                    std::ofstream file(output_path);
                    require(file.good(), errc::parse_error,
                            "cannot open '" + output_path + "' for writing");
                    file << csv.str();
                }
            } else if (format == "json") {
                json payload = to_json(report);
                payload["config"] = config;
                emit(payload, output_path, out);
            } else {
                fail(errc::parse_error, "--format must be 'json' or 'csv'");
            }
            return exit_ok;
        }
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_config;
}

} // namespace tomo
