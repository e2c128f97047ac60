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

#include <catch2/catch_amalgamated.hpp>

#include "tomo/estimation.hpp"

#include "testutil.hpp"

using namespace tomo;

TEST_CASE("build_design on the tetrahedron matches direct traces") {
    const OperatorBasis basis = build_basis(2);
    const Povm p = tetrahedron_povm();
    const DesignMatrices design = build_design(p, KnownMask::none(3), basis);
    REQUIRE(design.d == 3);

    // Independent route: E_i = (I + u_i.pauli)/4 gives Tr(E_i s_j) =
    // sqrt(2)/4 u_ij and offsets 1/4.
    const double s = 1.0 / std::sqrt(3.0);
    const double scale = std::sqrt(2.0) / 4.0;
    const double expected_rows[3][3] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(design.offsets(i) == Catch::Approx(0.25).margin(1e-14));
        for (int j = 0; j < 3; ++j)
            REQUIRE(design.T(i, j) ==
                    Catch::Approx(scale * expected_rows[i][j]).margin(1e-14));
    }
    REQUIRE(std::abs(design.T.determinant()) > 1e-3);
}

TEST_CASE("build_design with a known coordinate") {
    const OperatorBasis basis = build_basis(2);
    const KnownMask mask = KnownMask::of(3, {{2, 0.2}});
    const DesignMatrices design = build_design(trine_povm(), mask, basis);
    REQUIRE(design.d == 2);
    REQUIRE(std::abs(design.T.determinant()) > 1e-6);
    // Trine elements have no sigma_z component, so the declared value does
    // not shift the offsets here.
    for (int i = 0; i < 2; ++i)
        REQUIRE(design.offsets(i) == Catch::Approx(1.0 / 3.0).margin(1e-13));
}

TEST_CASE("build_design failure modes") {
    const OperatorBasis basis = build_basis(2);
    SECTION("a POVM of diagonal elements cannot see sigma_x, sigma_y") {
        Povm p{2, {}};
        CMatrix e1 = CMatrix::Zero(2, 2), e2 = CMatrix::Zero(2, 2),
                e3 = CMatrix::Zero(2, 2), e4 = CMatrix::Zero(2, 2);
        e1(0, 0) = 0.5;
        e2(1, 1) = 0.5;
        e3(0, 0) = 0.5;
        e3(1, 1) = 0.25;
        e4(1, 1) = 0.25;
        p.elements = {e1, e2, e3, e4};
        REQUIRE(validate_povm(p).empty());
        try {
            build_design(p, KnownMask::none(3), basis);
            FAIL("expected singular_design");
        } catch (const Error &e) {
            REQUIRE(e.code() == errc::singular_design);
        }
    }
    SECTION("too few outcomes for the unknown count") {
        try {
            build_design(trine_povm(), KnownMask::none(3), basis);
            FAIL("expected under_determined_design");
        } catch (const Error &e) {
            REQUIRE(e.code() == errc::under_determined_design);
        }
    }
    SECTION("over-complete POVMs are rejected, not least-squares inverted") {
        try {
            build_design(tetrahedron_povm(), KnownMask::of(3, {{2, 0.0}}), basis);
            FAIL("expected over_complete_design");
        } catch (const Error &e) {
            REQUIRE(e.code() == errc::over_complete_design);
        }
    }
}

TEST_CASE("build_design_vn for the two-qubit family with known marginals") {
    const OperatorBasis basis = two_qubit_pauli_basis();
    KnownMask mask = KnownMask::none(15);
    for (int j = 0; j < 6; ++j) mask.flags[static_cast<std::size_t>(j)] = true;
    const DesignMatrices design =
        build_design_vn(two_qubit_optimal_family(), mask, basis);
    REQUIRE(design.d == 9);

    // Tr((I + s_a (x) s_b)/2 * s_c (x) s_d / 2) = delta_ac delta_bd, so T is
    // the permutation aligning the family order with the row-major product
    // ordering of the basis.
    const int perm[9] = {0, 4, 8, 1, 5, 6, 2, 3, 7};
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
            const double expected = (j == perm[i]) ? 1.0 : 0.0;
            REQUIRE(design.T(i, j) == Catch::Approx(expected).margin(1e-13));
        }
        REQUIRE(design.offsets(i) == Catch::Approx(0.5).margin(1e-13));
    }
    REQUIRE(std::abs(design.T.determinant()) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("build_design_vn for the single-effect qubit estimator") {
    const OperatorBasis basis = build_basis(2);
    const auto pauli = pauli_matrices();
    VonNeumannFamily f{2, {0.5 * (CMatrix::Identity(2, 2) + pauli[2])}};
    const KnownMask mask = KnownMask::of(3, {{0, 0.0}, {1, 0.0}});
    const DesignMatrices design = build_design_vn(f, mask, basis);
    REQUIRE(design.d == 1);
    REQUIRE(design.T(0, 0) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-14));
    REQUIRE(design.offsets(0) == Catch::Approx(0.5).margin(1e-14));

    SECTION("declared known values shift the offsets") {
        VonNeumannFamily tilted{
            2, {0.5 * (CMatrix::Identity(2, 2) + 0.6 * pauli[0] + 0.8 * pauli[2])}};
        const KnownMask known = KnownMask::of(3, {{0, 0.1}, {1, 0.0}});
        const DesignMatrices d2 = build_design_vn(tilted, known, basis);
        // offset = 1/2 + Tr(E s_x) * 0.1 = 1/2 + (0.6/sqrt 2) * 0.1
        REQUIRE(d2.offsets(0) ==
                Catch::Approx(0.5 + 0.06 / std::sqrt(2.0)).margin(1e-14));
    }
    SECTION("effects blind to the unknown block give a singular design") {
        VonNeumannFamily blind{2, {0.5 * (CMatrix::Identity(2, 2) + pauli[0])}};
        try {
            build_design_vn(blind, mask, basis);
            FAIL("expected singular_design");
        } catch (const Error &e) {
            REQUIRE(e.code() == errc::singular_design);
        }
    }
    SECTION("family size must equal the unknown count") {
        REQUIRE_THROWS_AS(build_design_vn(f, KnownMask::none(3), basis), Error);
    }
}

TEST_CASE("estimate inverts exact probabilities") {
    Rng rng(37);
    for (int n : {2, 3}) {
        const OperatorBasis basis = build_basis(n);
        for (int rep = 0; rep < 20; ++rep) {
            const Povm p = test::random_povm(n, n * n, rng);
            const BlochState state = test::random_state(basis, rng);
            const DesignMatrices design =
                build_design(p, KnownMask::none(n * n - 1), basis);
            const RVector probs = probabilities(state, p, basis);
            const auto result = estimate(design, probs.head(design.d));
            REQUIRE((result.theta_unknown - state.theta).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE(result.physical);
        }
    }
}

TEST_CASE("estimate reference cases") {
    const OperatorBasis basis = build_basis(2);
    SECTION("single qubit effect: theta3_hat = 2 nu - 1 in Pauli units") {
        const auto pauli = pauli_matrices();
        VonNeumannFamily f{2, {0.5 * (CMatrix::Identity(2, 2) + pauli[2])}};
        const DesignMatrices design =
            build_design_vn(f, KnownMask::of(3, {{0, 0.0}, {1, 0.0}}), basis);
        for (double nu : {0.0, 0.25, 0.5, 0.8, 1.0}) {
            RVector freq(1);
            freq(0) = nu;
            const auto result = estimate(design, freq);
            const RVector pauli_units = to_pauli_normalized(result.state.theta);
            REQUIRE(pauli_units(2) == Catch::Approx(2.0 * nu - 1.0).margin(1e-13));
        }
    }
    SECTION("tetrahedron with uniform frequencies estimates the mixed state") {
        const DesignMatrices design =
            build_design(tetrahedron_povm(), KnownMask::none(3), basis);
        RVector freq = RVector::Constant(3, 0.25);
        const auto result = estimate(design, freq);
        REQUIRE(result.theta_unknown.norm() < 1e-13);
        REQUIRE(result.physical);
    }
    SECTION("extreme frequencies are flagged unphysical, not rejected") {
        const DesignMatrices design =
            build_design(tetrahedron_povm(), KnownMask::none(3), basis);
        RVector freq(3);
        freq << 1.0, 0.0, 0.0;
        const auto result = estimate(design, freq);
        REQUIRE_FALSE(result.physical);
        REQUIRE(result.min_eigenvalue < -positivity_eps);
        REQUIRE(result.theta_unknown.squaredNorm() > 0.5); // outside the ball
    }
}

TEST_CASE("qubit_variance reference values") {
    SECTION("lambda = z: variance 1 - theta3^2") {
        for (double t3 : {0.0, 0.3, 0.9}) {
            const double v = qubit_variance({0, 0, 1}, {0.1, 0.2, t3});
            REQUIRE(v == Catch::Approx(1.0 - t3 * t3).margin(1e-14));
        }
    }
    SECTION("lambda aligned with a pure state gives zero variance") {
        Eigen::Vector3d theta(0.6, 0.0, 0.8);
        REQUIRE(qubit_variance(theta, theta) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("maximally mixed state: variance 1/lambda3^2 behavior") {
        REQUIRE(qubit_variance({0, 0, 1}, {0, 0, 0}) == Catch::Approx(1.0));
        const double l3 = 1.0 / std::sqrt(2.0);
        REQUIRE(qubit_variance({l3, 0, l3}, {0, 0, 0}) ==
                Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("errors") {
        REQUIRE_THROWS_AS(qubit_variance({1, 0, 0}, {0, 0, 0}), Error);
        REQUIRE_THROWS_AS(qubit_variance({0, 0, 2}, {0, 0, 0}), Error);
    }
}

TEST_CASE("the z measurement minimizes the two-point averaged variance") {
    // For fixed known (theta1, theta2) the only invariant companion state
    // flips theta3; averaging the estimator variance over the pair makes
    // lambda = (0,0,1) optimal even though single states can beat it.
    Rng rng(107);
    for (int rep = 0; rep < 500; ++rep) {
        Eigen::Vector3d lambda;
        for (int i = 0; i < 3; ++i) lambda(i) = rng.gaussian();
        lambda.normalize();
        if (std::abs(lambda(2)) < 1e-3) continue;
        const double theta3 = rng.uniform(0.0, 1.0);
        const double r = rng.uniform() * std::sqrt(1.0 - theta3 * theta3);
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        const Eigen::Vector3d plus(r * std::cos(phi), r * std::sin(phi), theta3);
        const Eigen::Vector3d minus(plus(0), plus(1), -theta3);
        const double averaged =
            0.5 * (qubit_variance(lambda, plus) + qubit_variance(lambda, minus));
        REQUIRE(averaged >= 1.0 - theta3 * theta3 - 1e-12);
    }
    SECTION("single states can still beat the z measurement") {
        const Eigen::Vector3d pure(0.6, 0.0, 0.8);
        REQUIRE(qubit_variance(pure, pure) < 1.0 - 0.8 * 0.8);
    }
}

TEST_CASE("covariance_w reference values and properties") {
    SECTION("Bernoulli case") {
        RVector p(1);
        p << 0.5;
        REQUIRE(covariance_w(p)(0, 0) == Catch::Approx(0.25));
    }
    SECTION("symmetric three-cell case") {
        const RVector p = RVector::Constant(3, 1.0 / 3.0);
        const RMatrix w = covariance_w(p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                REQUIRE(w(i, j) ==
                        Catch::Approx(i == j ? 2.0 / 9.0 : -1.0 / 9.0).margin(1e-14));
    }
    SECTION("PSD for random probability vectors") {
        Rng rng(41);
        for (int rep = 0; rep < 200; ++rep) {
            const int d = 1 + static_cast<int>(rng.uniform() * 6);
            RVector p(d);
            double total = 0;
            for (int i = 0; i < d; ++i) {
                p(i) = rng.uniform();
                total += p(i);
            }
            p /= std::max(total, 1.0) * rng.uniform(1.0, 2.0);
            const RMatrix w = covariance_w(p);
            Eigen::SelfAdjointEigenSolver<RMatrix> solver(w, Eigen::EigenvaluesOnly);
            REQUIRE(solver.eigenvalues().minCoeff() >= -1e-10);
        }
    }
    SECTION("invalid probabilities are rejected") {
        RVector p(2);
        p << 0.9, 0.3;
        REQUIRE_THROWS_AS(covariance_w(p), Error);
        RVector q(1);
        q << 1.2;
        REQUIRE_THROWS_AS(covariance_w(q), Error);
    }
}

TEST_CASE("covariance_w matches the sample covariance of multinomial draws") {
    // Monte Carlo oracle: single-shot outcome indicators for the z-aligned
    // tetrahedron at |0><0| have covariance exactly W.
    const OperatorBasis basis = build_basis(2);
    const Povm p = tetrahedron_povm_z_aligned();
    CMatrix rho(2, 2);
    rho << 1, 0, 0, 0;
    const RVector probs = probabilities(density_to_bloch(rho, basis), p, basis);
    const RMatrix w = covariance_w(probs);

    const long draws = 1000000;
    Rng rng(43);
    std::vector<double> cumulative(4);
    double acc = 0;
    for (int i = 0; i < 4; ++i) {
        acc += probs(i);
        cumulative[static_cast<std::size_t>(i)] = acc;
    }
    RVector mean = RVector::Zero(4);
    RMatrix second = RMatrix::Zero(4, 4);
    for (long s = 0; s < draws; ++s) {
        const int outcome = rng.discrete_from_cumulative(cumulative);
        mean(outcome) += 1.0;
        second(outcome, outcome) += 1.0;
    }
    mean /= static_cast<double>(draws);
    second /= static_cast<double>(draws);
    const RMatrix sample_cov = second - mean * mean.transpose();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            // Normal-approximation standard error for a covariance entry.
            const double se = std::sqrt((w(i, i) * w(j, j) + w(i, j) * w(i, j)) /
                                        static_cast<double>(draws));
            REQUIRE(std::abs(sample_cov(i, j) - w(i, j)) <= 3.0 * se + 1e-9);
        }
}

TEST_CASE("error_matrix reference cases") {
    const OperatorBasis basis = build_basis(2);
    SECTION("single-effect qubit design reproduces the variance formula") {
        const auto pauli = pauli_matrices();
        VonNeumannFamily f{2, {0.5 * (CMatrix::Identity(2, 2) + pauli[2])}};
        const DesignMatrices design =
            build_design_vn(f, KnownMask::of(3, {{0, 0.0}, {1, 0.0}}), basis);
        for (double t3_pauli : {0.0, 0.4, 0.9}) {
            BlochState state{2, RVector::Zero(3), {false, false, false}};
            state.theta(2) = t3_pauli / std::sqrt(2.0);
            const auto em = error_matrix(design, state);
            // Canonical variance is half the Pauli-normalized one.
            REQUIRE(em.V(0, 0) ==
                    Catch::Approx((1.0 - t3_pauli * t3_pauli) / 2.0).margin(1e-12));
        }
    }
    SECTION("identity design passes W through") {
        DesignMatrices design;
        design.dim = 2;
        design.d = 3;
        design.offsets = RVector::Constant(3, 0.2);
        design.T = RMatrix::Identity(3, 3);
        design.T_inv = RMatrix::Identity(3, 3);
        design.model = OutcomeModel::multinomial;
        design.known = KnownMask::none(3);
        design.basis = basis;
        BlochState state{2, RVector::Zero(3), {}};
        state.theta << 0.05, -0.03, 0.1;
        const auto em = error_matrix(design, state);
        REQUIRE((em.V - em.W).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("affine consistency: e + T theta reproduces probabilities") {
    Rng rng(47);
    for (int n : {2, 3}) {
        const OperatorBasis basis = build_basis(n);
        const int params = n * n - 1;
        for (int rep = 0; rep < 100; ++rep) {
            const BlochState state = test::random_state(basis, rng);
            // Mask a random subset of coordinates with the state's own values.
            KnownMask mask = KnownMask::none(params);
            for (int j = 0; j < params; ++j)
                if (rng.bernoulli(0.3)) {
                    mask.flags[static_cast<std::size_t>(j)] = true;
                    mask.values(j) = state.theta(j);
                }
            const int d = mask.unknown_count();
            if (d == 0) continue;
            const Povm p = test::random_povm(n, d + 1, rng);
            DesignMatrices design;
            try {
                design = build_design(p, mask, basis);
            } catch (const Error &e) {
                REQUIRE(e.code() == errc::singular_design);
                continue;
            }
            const RVector probs = probabilities(state, p, basis);
            const auto unknown = mask.unknown_indices();
            RVector theta_b(d);
            for (int j = 0; j < d; ++j)
                theta_b(j) = state.theta(unknown[static_cast<std::size_t>(j)]);
            const RVector affine = design.offsets + design.T * theta_b;
            REQUIRE((affine - probs.head(d)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}
