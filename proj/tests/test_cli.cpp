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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "tomo/cli.hpp"

using namespace tomo;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
    json parsed() const { return json::parse(out); }
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    CliRun result;
    result.exit_code = run_cli(std::move(args), out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

const std::string tetra_path = TOMO_SOURCE_DIR "/data/tetrahedron.json";
const std::string trine_path = TOMO_SOURCE_DIR "/data/trine.json";
const std::string qutrit_path = TOMO_SOURCE_DIR "/data/qutrit7.json";
const std::string family_path = TOMO_SOURCE_DIR "/data/two_qubit_family.json";

fs::path temp_file(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / "tomodesign_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("cli: validate") {
    SECTION("bundled fixtures validate cleanly") {
        for (const auto &path : {tetra_path, trine_path, qutrit_path, family_path}) {
            const auto result = run({"validate", "--input", path});
            REQUIRE(result.exit_code == 0);
            REQUIRE(result.parsed().at("valid").get<bool>());
        }
    }
    SECTION("non-summing elements fail with the completeness violation named") {
        const auto path = temp_file("incomplete.json");
        Povm p{2, {0.5 * CMatrix::Identity(2, 2), 0.25 * CMatrix::Identity(2, 2)}};
        write_json_file(path.string(), to_json(p));
        const auto result = run({"validate", "--input", path.string()});
        REQUIRE(result.exit_code == 1);
        const json report = result.parsed();
        REQUIRE_FALSE(report.at("valid").get<bool>());
        REQUIRE(report.at("violations").at(0).at("invariant").get<std::string>() ==
                "completeness");
    }
    SECTION("dimension-mismatched matrices exit with a parse error") {
        const auto path = temp_file("mismatched.json");
        std::ofstream(path) << R"({"dim": 2, "elements": [)"
                            << matrix_to_json(CMatrix::Identity(3, 3)).dump()
                            << "]}";
        const auto result = run({"validate", "--input", path.string()});
        REQUIRE(result.exit_code == 2);
        REQUIRE(result.err.find("expected 2") != std::string::npos);
    }
    SECTION("malformed JSON exits with a parse error") {
        const auto path = temp_file("garbage.json");
        std::ofstream(path) << "{ not json";
        REQUIRE(run({"validate", "--input", path.string()}).exit_code == 2);
    }
    SECTION("missing required flags are a config error") {
        REQUIRE(run({"validate"}).exit_code == 2);
    }
    SECTION("--help exits zero") {
        REQUIRE(run({"--help"}).exit_code == 0);
    }
}

TEST_CASE("cli: bases") {
    const auto gm = run({"bases", "--dim", "3"});
    REQUIRE(gm.exit_code == 0);
    REQUIRE(gm.parsed().at("elements").size() == 8);
    const auto pp = run({"bases", "--dim", "4", "--basis", "pauli-product"});
    REQUIRE(pp.exit_code == 0);
    REQUIRE(pp.parsed().at("elements").size() == 15);
    REQUIRE(run({"bases", "--dim", "3", "--basis", "pauli-product"}).exit_code == 2);
}

TEST_CASE("cli: verify-sic on the bundled designs") {
    SECTION("tetrahedron") {
        const auto result = run({"verify-sic", "--input", tetra_path});
        REQUIRE(result.exit_code == 0);
        const json report = result.parsed();
        REQUIRE(report.at("lambda").get<double>() == Catch::Approx(2.0).margin(1e-10));
        REQUIRE(report.at("mu").get<double>() ==
                Catch::Approx(1.0 / 3.0).margin(1e-10));
        REQUIRE(report.at("all_rank_one").get<bool>());
    }
    SECTION("trine with sigma_z masked") {
        const auto result =
            run({"verify-sic", "--input", trine_path, "--mask", "2:0"});
        REQUIRE(result.exit_code == 0);
        const json report = result.parsed();
        REQUIRE(report.at("lambda").get<double>() == Catch::Approx(1.5).margin(1e-10));
        REQUIRE(report.at("mu").get<double>() == Catch::Approx(0.25).margin(1e-10));
        REQUIRE(report.at("quasi_orthogonal_to_known").get<bool>());
    }
    SECTION("qutrit seven-element file with the diagonal block masked") {
        const auto result =
            run({"verify-sic", "--input", qutrit_path, "--mask", "6:0,7:0"});
        REQUIRE(result.exit_code == 0);
        const json report = result.parsed();
        REQUIRE(report.at("lambda").get<double>() ==
                Catch::Approx(7.0 / 3.0).margin(1e-10));
        REQUIRE(report.at("mu").get<double>() ==
                Catch::Approx(2.0 / 9.0).margin(1e-10));
        REQUIRE(report.at("quasi_orthogonal_to_known").get<bool>());
        REQUIRE(report.at("all_rank_one").get<bool>());
    }
}

TEST_CASE("cli: demo-qutrit verifies the bundled construction end to end") {
    const auto result = run({"demo-qutrit"});
    REQUIRE(result.exit_code == 0);
    const json report = result.parsed();
    REQUIRE(report.at("pass").get<bool>());
    REQUIRE(report.at("valid_povm").get<bool>());
    REQUIRE(report.at("sic").at("lambda").get<double>() ==
            Catch::Approx(7.0 / 3.0).margin(1e-10));
    REQUIRE(report.at("sic").at("mu").get<double>() ==
            Catch::Approx(2.0 / 9.0).margin(1e-10));
    REQUIRE(report.at("sic").at("quasi_orthogonal_to_known").get<bool>());
}

TEST_CASE("cli: objective closed form and Monte Carlo agree") {
    const std::string prior = R"({"kind":"haar_orbit","spectrum":[1.0,0.0]})";
    const auto closed = run({"objective", "--input", tetra_path, "--prior", prior,
                             "--method", "closed"});
    REQUIRE(closed.exit_code == 0);
    const double det_closed = closed.parsed().at("det_value").get<double>();
    const auto mc = run({"objective", "--input", tetra_path, "--prior", prior,
                         "--method", "mc", "--samples", "20000", "--seed", "9"});
    REQUIRE(mc.exit_code == 0);
    const json mc_report = mc.parsed();
    const double det_mc = mc_report.at("det_value").get<double>();
    const double stderr_mc = mc_report.at("mc_stderr").get<double>();
    REQUIRE(std::abs(det_closed - det_mc) <= 3.0 * stderr_mc);
    REQUIRE(mc_report.at("config").at("seed").get<std::uint64_t>() == 9);

    SECTION("identical seeds give identical output") {
        const auto again = run({"objective", "--input", tetra_path, "--prior",
                                prior, "--method", "mc", "--samples", "20000",
                                "--seed", "9"});
        REQUIRE(again.out == mc.out);
    }
    SECTION("singular designs exit with the numerical failure code") {
        const auto path = temp_file("diagonal.json");
        Povm p{2, {}};
        CMatrix e1 = CMatrix::Zero(2, 2), e2 = CMatrix::Zero(2, 2),
                e3 = CMatrix::Zero(2, 2), e4 = CMatrix::Zero(2, 2);
        e1(0, 0) = 0.5;
        e2(1, 1) = 0.5;
        e3(0, 0) = 0.5;
        e3(1, 1) = 0.25;
        e4(1, 1) = 0.25;
        p.elements = {e1, e2, e3, e4};
        write_json_file(path.string(), to_json(p));
        const auto result = run({"objective", "--input", path.string(), "--prior",
                                 prior, "--method", "closed"});
        REQUIRE(result.exit_code == 3);
        REQUIRE(result.err.find("singular") != std::string::npos);
    }
}

TEST_CASE("cli: optimize recovers the symmetric qubit structure") {
    const auto result = run({"optimize", "--dim", "2", "--kind", "povm",
                             "--outcomes", "4", "--prior",
                             R"({"kind":"haar_orbit","spectrum":[1.0,0.0]})",
                             "--seed", "5", "--restarts", "4", "--max-iters",
                             "4000"});
    REQUIRE(result.exit_code == 0);
    const json report = result.parsed();
    REQUIRE(report.at("structure").at("sic").at("mu").get<double>() ==
            Catch::Approx(1.0 / 3.0).margin(1e-5));
    REQUIRE(report.at("converged").get<bool>());
    REQUIRE(report.at("config").at("seed").get<std::uint64_t>() == 5);
}

TEST_CASE("cli: von Neumann flows") {
    const std::string marginal_mask = "0:0,1:0,2:0,3:0,4:0,5:0";
    SECTION("objective on the bundled two-qubit family") {
        // With unit |det T|, offsets 1/2 and unit-norm rows, the averaged
        // matrix is (1/4 - alpha) I9 with alpha = (3/4)/15.
        const auto result = run({"objective", "--input", family_path, "--basis",
                                 "pauli-product", "--mask", marginal_mask,
                                 "--prior",
                                 R"({"kind":"haar_orbit","spectrum":[1,0,0,0]})",
                                 "--method", "closed"});
        REQUIRE(result.exit_code == 0);
        REQUIRE(result.parsed().at("det_value").get<double>() ==
                Catch::Approx(std::pow(0.2, 9)).epsilon(1e-10));
    }
    SECTION("optimize reaches the quasi-orthogonal family") {
        const auto result = run({"optimize", "--dim", "4", "--kind",
                                 "von-neumann", "--basis", "pauli-product",
                                 "--spectrum", "0,0,1,1", "--mask", marginal_mask,
                                 "--prior",
                                 R"({"kind":"haar_orbit","spectrum":[1,0,0,0]})",
                                 "--seed", "3", "--restarts", "4"});
        REQUIRE(result.exit_code == 0);
        const json report = result.parsed();
        REQUIRE(-report.at("objective").get<double>() ==
                Catch::Approx(1.0).margin(1e-6));
        REQUIRE(report.at("structure").at("max_pairwise_residual").get<double>() <
                1e-4);
    }
    SECTION("bad spectrum entries are a config error") {
        REQUIRE(run({"optimize", "--dim", "4", "--kind", "von-neumann",
                     "--spectrum", "0,0,one,1", "--mask", marginal_mask,
                     "--basis", "pauli-product", "--prior",
                     R"({"kind":"haar_orbit","spectrum":[1,0,0,0]})"})
                    .exit_code == 2);
    }
}

TEST_CASE("cli: optimize from a problem spec file") {
    OptimizationProblem problem;
    problem.dim = 2;
    problem.kind = DesignKind::povm;
    problem.outcomes = 4;
    problem.basis = build_basis(2);
    problem.known = KnownMask::none(3);
    RVector spectrum(2);
    spectrum << 1.0, 0.0;
    problem.prior = make_haar_orbit_prior(2, spectrum);
    problem.seed = 5;
    problem.restarts = 2;
    problem.max_iters = 800;
    const auto path = temp_file("problem.json");
    write_json_file(path.string(), to_json(problem));

    const auto from_file = run({"optimize", "--problem", path.string()});
    REQUIRE(from_file.exit_code == 0);
    const auto from_flags =
        run({"optimize", "--dim", "2", "--kind", "povm", "--outcomes", "4",
             "--prior", R"({"kind":"haar_orbit","spectrum":[1.0,0.0]})",
             "--seed", "5", "--restarts", "2", "--max-iters", "800"});
    REQUIRE(from_flags.exit_code == 0);
    // Same problem, same seed: identical optimizer output.
    REQUIRE(from_file.parsed().at("objective").get<double>() ==
            from_flags.parsed().at("objective").get<double>());
    REQUIRE(from_file.parsed().at("design") == from_flags.parsed().at("design"));

    SECTION("flag overrides still apply on top of the file") {
        const auto overridden =
            run({"optimize", "--problem", path.string(), "--seed", "6"});
        REQUIRE(overridden.exit_code == 0);
        REQUIRE(overridden.parsed().at("config").at("problem").at("seed")
                    .get<std::uint64_t>() == 6);
    }
    SECTION("optimize without prior or problem is a config error") {
        REQUIRE(run({"optimize", "--dim", "2", "--kind", "povm", "--outcomes",
                     "4"})
                    .exit_code == 2);
    }
}

TEST_CASE("cli: simulate") {
    const OperatorBasis basis = build_basis(2);
    BlochState state{2, RVector::Zero(3), {}};
    state.theta << 0.1, 0.0, 0.2;
    const auto state_path = temp_file("state.json");
    write_json_file(state_path.string(), state_to_json(state, basis));

    SECTION("json report with config echo") {
        const auto result =
            run({"simulate", "--input", tetra_path, "--state", state_path.string(),
                 "--shots", "200", "--runs", "400", "--seed", "13"});
        REQUIRE(result.exit_code == 0);
        const json report = result.parsed();
        REQUIRE(report.at("mean_estimate").size() == 3);
        REQUIRE(report.at("config").at("shots").get<long>() == 200);
        const double mean0 = report.at("mean_estimate").at(0).get<double>();
        REQUIRE(std::abs(mean0 - 0.1) < 0.05);
    }
    SECTION("csv per-run dump") {
        const auto csv_path = temp_file("runs.csv");
        const auto result =
            run({"simulate", "--input", tetra_path, "--state", state_path.string(),
                 "--shots", "50", "--runs", "25", "--seed", "13", "--format", "csv",
                 "--output", csv_path.string()});
        REQUIRE(result.exit_code == 0);
        std::ifstream file(csv_path);
        std::string line;
        int lines = 0;
        std::getline(file, line);
        REQUIRE(line.rfind("# {", 0) == 0); // config comment first
        std::getline(file, line);
        REQUIRE(line == "run,theta_0,theta_1,theta_2");
        while (std::getline(file, line))
            if (!line.empty()) ++lines;
        REQUIRE(lines == 25);
    }
}
