#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "povmseq/dilation.hpp"

#include "helpers.hpp"

using namespace povmseq;
using testutil::Cx;
using testutil::Mat;

namespace {

Povm usd_povm(double omega) {
    auto f = testutil::usd_fixture(omega);
    return validate_povm({{f.a1, "1"}, {f.a2, "2"}, {f.aq, "?"}});
}

Povm qubit_projective() {
    Mat p0(2, 2), p1(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    return validate_povm({{p0, "0"}, {p1, "1"}});
}

void check_naimark_invariants(const Povm& p, const NaimarkDilation& nd, double tol) {
    const std::size_t d = p.dim, n = p.size();
    REQUIRE(nd.isometry.rows() == n * d);
    REQUIRE(nd.isometry.cols() == d);
    REQUIRE(frob_dist(nd.isometry.dagger() * nd.isometry, Mat::identity(d)) < tol);
    for (std::size_t i = 0; i < n; ++i) {
        Mat pulled = nd.isometry.dagger() * nd.projectors[i] * nd.isometry;
        REQUIRE(frob_dist(pulled, p.effects[i].matrix) < tol);
    }
    REQUIRE(is_unitary(nd.unitary_extension, tol));
    // U applied to the |0>-ancilla sector reproduces the isometry.
    for (std::size_t b = 0; b < d; ++b)
        for (std::size_t r = 0; r < n * d; ++r)
            REQUIRE(std::abs(nd.unitary_extension(r, b * n) - nd.isometry(r, b)) < tol);
}

} // namespace

TEST_CASE("naive_naimark on a projective qubit measurement", "[dilation]") {
    Povm p = qubit_projective();
    auto nd = naive_naimark(p);
    REQUIRE(nd.isometry.rows() == 4);
    check_naimark_invariants(p, nd, 1e-12);
}

TEST_CASE("naive_naimark on the discrimination triple", "[dilation]") {
    Povm p = usd_povm(0.4);
    auto nd = naive_naimark(p);
    REQUIRE(nd.isometry.rows() == 6);
    check_naimark_invariants(p, nd, 1e-10);
}

TEST_CASE("naive_naimark invariants on random POVMs", "[dilation][property]") {
    std::mt19937_64 rng(211);
    for (int it = 0; it < 10; ++it) {
        std::uniform_int_distribution<std::size_t> nd_(2, 5), dd(2, 4);
        const std::size_t n = nd_(rng), d = dd(rng);
        auto mats = testutil::random_povm_matrices(n, d, rng);
        std::vector<Effect> effects;
        for (std::size_t i = 0; i < n; ++i) effects.push_back({mats[i], std::to_string(i)});
        Povm p = validate_povm(effects, 1e-9);
        check_naimark_invariants(p, naive_naimark(p), 1e-10);
    }
}

TEST_CASE("peres_dimension counts effect ranks", "[dilation]") {
    REQUIRE(peres_dimension(qubit_projective()) == 2);
    REQUIRE(peres_dimension(usd_povm(0.4)) == 3); // each effect is rank one

    // Trine: three rank-one effects (2/3)|phi_k><phi_k| at 120 degrees.
    std::vector<Effect> trine;
    for (int k = 0; k < 3; ++k) {
        const double th = 2.0 * M_PI * k / 3.0;
        Vec phi = {Cx(std::cos(th / 2)), Cx(std::sin(th / 2))};
        trine.push_back({Mat::outer(phi, phi) * (2.0 / 3.0), std::to_string(k + 1)});
    }
    REQUIRE(peres_dimension(validate_povm(trine)) == 3);
}

TEST_CASE("coupling_circuit for the conclusive coarse effect", "[dilation]") {
    const double w = 0.4;
    auto f = testutil::usd_fixture(w);
    const double t = std::tan(w);
    CouplingCircuit c = coupling_circuit({Mat::identity(2) - f.aq, "!"});

    REQUIRE(c.eigenvalues[0] == Approx(1.0).margin(1e-12));
    REQUIRE(c.eigenvalues[1] == Approx(t * t).margin(1e-12));

    // B = diag(tan^2 w, 1) is diagonal in ascending order, so the descending
    // convention swaps the basis: U_B is the flip, not the identity.
    Mat flip(2, 2, {{0, 0}, {1, 0}, {1, 0}, {0, 0}});
    REQUIRE(frob_dist(c.basis_change, flip) < 1e-12);

    // Block for the unit eigenvalue completes to sigma_z; the other block's
    // first column carries (tan w, sqrt(1 - tan^2 w)).
    Mat sz(2, 2, {{1, 0}, {0, 0}, {0, 0}, {-1, 0}});
    REQUIRE(frob_dist(c.blocks[0], sz) < 1e-12);
    REQUIRE(c.blocks[1](0, 0).real() == Approx(t).margin(1e-12));
    REQUIRE(c.blocks[1](1, 0).real() == Approx(std::sqrt(1.0 - t * t)).margin(1e-12));

    // Basis-independent contract: U_B^dag diag(sqrt(l)) U_B = sqrt(B).
    Mat root_diag = Mat::diagonal({std::sqrt(c.eigenvalues[0]), std::sqrt(c.eigenvalues[1])});
    Mat back = c.basis_change.dagger() * root_diag * c.basis_change;
    REQUIRE(frob_dist(back, psd_sqrt(Mat::identity(2) - f.aq)) < 1e-12);
}

TEST_CASE("coupling_circuit for the state-1 effect", "[dilation]") {
    const double w = 0.4;
    auto f = testutil::usd_fixture(w);
    const double cw = std::cos(w), sw = std::sin(w);
    CouplingCircuit c = coupling_circuit({f.a1, "1"});

    // U_B maps psi_2_perp to |0> and psi_2 to |1>.
    Mat expected_ub(2, 2, {Cx(sw), Cx(cw), Cx(cw), Cx(-sw)});
    REQUIRE(frob_dist(c.basis_change, expected_ub) < 1e-12);

    const double lambda = 1.0 / (2.0 * cw * cw);
    REQUIRE(c.eigenvalues[0] == Approx(lambda).margin(1e-12));
    REQUIRE(c.eigenvalues[1] == Approx(0.0).margin(1e-12));

    const double inv = 1.0 / (std::sqrt(2.0) * cw);
    const double rc = std::sqrt(std::cos(2 * w));
    Mat expected_v0(2, 2, {Cx(inv), Cx(inv * rc), Cx(inv * rc), Cx(-inv)});
    REQUIRE(frob_dist(c.blocks[0], expected_v0) < 1e-12);

    // The zero-eigenvalue block's first column is (0, 1); its completion is
    // free, so only that column and unitarity are pinned.
    REQUIRE(std::abs(c.blocks[1](0, 0)) < 1e-12);
    REQUIRE(c.blocks[1](1, 0).real() == Approx(1.0).margin(1e-12));
    REQUIRE(is_unitary(c.blocks[1], 1e-12));
}

TEST_CASE("coupling_circuit of the maximally mixed effect", "[dilation]") {
    CouplingCircuit c = coupling_circuit({Mat::identity(2) * 0.5, "half"});
    const double h = 1.0 / std::sqrt(2.0);
    Mat had(2, 2, {Cx(h), Cx(h), Cx(h), Cx(-h)});
    REQUIRE(frob_dist(c.blocks[0], had) < 1e-12);
    REQUIRE(frob_dist(c.blocks[1], had) < 1e-12);
}

TEST_CASE("coupling_circuit rejects non-effects", "[dilation]") {
    REQUIRE_THROWS_AS(coupling_circuit({Mat::identity(2) * 1.5, "x"}), NotEffectError);
    REQUIRE_THROWS_AS(coupling_circuit({Mat::diagonal({1.0, -0.2}), "x"}), NotEffectError);
}

TEST_CASE("assembled block unitary satisfies the column conditions", "[dilation][property]") {
    std::mt19937_64 rng(223);
    for (std::size_t d = 2; d <= 8; ++d) {
        Mat e = testutil::random_effect(d, rng);
        CouplingCircuit c = coupling_circuit({e, "b"});
        Mat v = assembled_block_unitary(c);
        REQUIRE(frob_dist(v.dagger() * v, Mat::identity(2 * d)) < 1e-10);
        for (std::size_t j = 0; j < d; ++j) {
            REQUIRE(v(2 * j, 2 * j).real() == Approx(std::sqrt(c.eigenvalues[j])).margin(1e-12));
            REQUIRE(v(2 * j + 1, 2 * j).real() ==
                    Approx(std::sqrt(1.0 - c.eigenvalues[j])).margin(1e-12));
        }
    }
}

TEST_CASE("apply_coupling with the certain effect", "[dilation]") {
    std::mt19937_64 rng(227);
    State rho(testutil::random_density(3, rng));
    CouplingCircuit c = coupling_circuit({Mat::identity(3), "sure"});
    auto [yes, no] = apply_coupling(c, rho);
    REQUIRE(yes.weight == Approx(1.0).margin(1e-12));
    REQUIRE(frob_dist(yes.state->matrix(), rho.matrix()) < 1e-10);
    REQUIRE(no.weight < null_tol);
    REQUIRE_FALSE(no.state.has_value());
}

TEST_CASE("pre-readout state of the conclusiveness measurement", "[dilation]") {
    const double w = 0.4;
    auto f = testutil::usd_fixture(w);
    CouplingCircuit c = coupling_circuit({Mat::identity(2) - f.aq, "!"});

    const double sw = std::sin(w);
    const double rc = std::sqrt(std::cos(2 * w));

    // Reference joint state (system slow, ancilla fast), one sign convention
    // of the completion: -sqrt(2) sin(w) |+>|0> + sqrt(cos 2w) |1>|1>.
    auto reference = [&](double sign_second) {
        Vec ref(4, Cx(0));
        ref[0] = Cx(-sw);              // |0>|0>
        ref[2] = Cx(-sw * sign_second); // |1>|0>
        ref[3] = Cx(rc);               // |1>|1>
        return ref;
    };

    for (int which = 0; which < 2; ++which) {
        const Vec& psi = which == 0 ? f.psi1 : f.psi2;
        Vec joint = pre_measurement_state(c, psi);
        // |+> for psi_1, |-> for psi_2 in the conclusive branch.
        Vec ref = reference(which == 0 ? 1.0 : -1.0);
        REQUIRE(testutil::branch_phase_insensitive_fidelity(ref, joint) ==
                Approx(1.0).margin(1e-10));

        // Branch weights read off the joint state: 2 sin^2 w and cos 2w.
        double w_conclusive = std::norm(joint[0]) + std::norm(joint[2]);
        double w_inconclusive = std::norm(joint[1]) + std::norm(joint[3]);
        REQUIRE(w_conclusive == Approx(2 * sw * sw).margin(1e-12));
        REQUIRE(w_inconclusive == Approx(std::cos(2 * w)).margin(1e-12));

        auto [conclusive, inconclusive] = apply_coupling(c, State(psi));
        REQUIRE(conclusive.weight == Approx(w_conclusive).margin(1e-12));
        REQUIRE(inconclusive.weight == Approx(w_inconclusive).margin(1e-12));
    }
}

TEST_CASE("apply_coupling reproduces the direct state update", "[dilation][property]") {
    std::mt19937_64 rng(229);
    for (int it = 0; it < 60; ++it) {
        std::uniform_int_distribution<std::size_t> dd(2, 8);
        const std::size_t d = dd(rng);
        Mat e = testutil::random_effect(d, rng);
        State rho(testutil::random_density(d, rng));

        CouplingCircuit c = coupling_circuit({e, "b"});
        auto [in_branch, out_branch] = apply_coupling(c, rho);

        Branch direct_in = lueders_branch({e, "b"}, rho);
        Branch direct_out = lueders_branch({Mat::identity(d) - e, "not b"}, rho);

        REQUIRE(in_branch.weight == Approx(direct_in.weight).margin(1e-10));
        REQUIRE(out_branch.weight == Approx(direct_out.weight).margin(1e-10));
        if (direct_in.state)
            REQUIRE(frob_dist(in_branch.state->matrix(), direct_in.state->matrix()) < 1e-10);
        if (direct_out.state)
            REQUIRE(frob_dist(out_branch.state->matrix(), direct_out.state->matrix()) < 1e-10);
    }
}

TEST_CASE("completion freedom is unobservable", "[dilation][property]") {
    std::mt19937_64 rng(233);
    for (int it = 0; it < 30; ++it) {
        Mat e = testutil::random_effect(2, rng);
        State rho(testutil::random_density(2, rng));

        CouplingCircuit c = coupling_circuit({e, "b"});
        CouplingCircuit altered = c;
        // Multiply each block's second column by an arbitrary phase: still a
        // valid completion, first columns untouched.
        std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
        for (auto& blk : altered.blocks) {
            const Cx phase = std::polar(1.0, angle(rng));
            blk(0, 1) *= phase;
            blk(1, 1) *= phase;
            REQUIRE(is_unitary(blk, 1e-12));
        }

        auto [a0, a1] = apply_coupling(c, rho);
        auto [b0, b1] = apply_coupling(altered, rho);
        REQUIRE(a0.weight == Approx(b0.weight).margin(1e-10));
        REQUIRE(a1.weight == Approx(b1.weight).margin(1e-10));
        if (a0.state) REQUIRE(frob_dist(a0.state->matrix(), b0.state->matrix()) < 1e-10);
        if (a1.state) REQUIRE(frob_dist(a1.state->matrix(), b1.state->matrix()) < 1e-10);
    }
}

TEST_CASE("qubit_factorization reassembles the block unitary", "[dilation]") {
    SECTION("equal blocks give a trivial controlled gate") {
        CouplingCircuit c = coupling_circuit({Mat::identity(2) * 0.5, "half"});
        QubitFactorization f = qubit_factorization(c);
        REQUIRE(frob_dist(f.controlled_gate, Mat::identity(2)) < 1e-12);
        REQUIRE(frob_dist(reassembled_factorization(f), assembled_block_unitary(c)) < 1e-12);
    }
    SECTION("conclusive coarse effect") {
        auto fx = testutil::usd_fixture(0.4);
        CouplingCircuit c = coupling_circuit({Mat::identity(2) - fx.aq, "!"});
        QubitFactorization f = qubit_factorization(c);
        REQUIRE(frob_dist(reassembled_factorization(f), assembled_block_unitary(c)) < 1e-12);
    }
    SECTION("state-1 effect gives a unitary controlled gate") {
        auto fx = testutil::usd_fixture(0.4);
        QubitFactorization f = qubit_factorization(coupling_circuit({fx.a1, "1"}));
        REQUIRE(is_unitary(f.controlled_gate, 1e-12));
    }
    SECTION("random qubit effects") {
        std::mt19937_64 rng(239);
        for (int it = 0; it < 20; ++it) {
            CouplingCircuit c = coupling_circuit({testutil::random_effect(2, rng), "b"});
            QubitFactorization f = qubit_factorization(c);
            REQUIRE(frob_dist(reassembled_factorization(f), assembled_block_unitary(c)) < 1e-12);
        }
    }
    SECTION("only qubit systems factorize this way") {
        CouplingCircuit c = coupling_circuit({Mat::identity(3) * 0.5, "x"});
        REQUIRE_THROWS_AS(qubit_factorization(c), DimensionError);
    }
}

TEST_CASE("qubit_coupling_blocks from Bloch parameters", "[dilation]") {
    SECTION("projector: alpha = 1, a = 1") {
        auto [v0, v1] = qubit_coupling_blocks(1.0, 1.0);
        Mat sz(2, 2, {{1, 0}, {0, 0}, {0, 0}, {-1, 0}});
        Mat sx(2, 2, {{0, 0}, {1, 0}, {1, 0}, {0, 0}});
        REQUIRE(frob_dist(v0, sz) < 1e-12);
        REQUIRE(frob_dist(v1, sx) < 1e-12);
    }
    SECTION("the inconclusive complement: alpha = 1 + tan^2 w, a = 1 - tan^2 w") {
        const double t2 = std::tan(0.4) * std::tan(0.4);
        auto [v0, v1] = qubit_coupling_blocks(1.0 + t2, 1.0 - t2);
        Mat sz(2, 2, {{1, 0}, {0, 0}, {0, 0}, {-1, 0}});
        REQUIRE(frob_dist(v0, sz) < 1e-12);
        REQUIRE(is_unitary(v1, 1e-12));
    }
    SECTION("maximally mixed: alpha = 1, a = 0") {
        auto [v0, v1] = qubit_coupling_blocks(1.0, 0.0);
        const double h = 1.0 / std::sqrt(2.0);
        Mat had(2, 2, {Cx(h), Cx(h), Cx(h), Cx(-h)});
        REQUIRE(frob_dist(v0, had) < 1e-12);
        REQUIRE(frob_dist(v1, had) < 1e-12);
    }
    SECTION("agrees with the circuit blocks for random qubit effects") {
        std::mt19937_64 rng(241);
        for (int it = 0; it < 20; ++it) {
            Mat e = testutil::random_effect(2, rng);
            CouplingCircuit c = coupling_circuit({e, "b"});
            const double alpha = c.eigenvalues[0] + c.eigenvalues[1];
            const double a = c.eigenvalues[0] - c.eigenvalues[1];
            auto [v0, v1] = qubit_coupling_blocks(alpha, a);
            REQUIRE(frob_dist(v0, c.blocks[0]) < 1e-12);
            REQUIRE(frob_dist(v1, c.blocks[1]) < 1e-12);
        }
    }
    SECTION("parameters outside the effect cone are rejected") {
        REQUIRE_THROWS_AS(qubit_coupling_blocks(1.0, 1.5), DomainError);
        REQUIRE_THROWS_AS(qubit_coupling_blocks(2.5, 0.0), DomainError);
        REQUIRE_THROWS_AS(qubit_coupling_blocks(0.5, -0.1), DomainError);
    }
}

TEST_CASE("symmetric all-positive second column is not a valid completion", "[dilation]") {
    // Regression guard for the corrected sign pattern: filling both columns of
    // the low-eigenvalue block with positive roots breaks unitarity.
    const double alpha = 1.0, a = 0.5;
    const double rl = std::sqrt((alpha - a) / 2.0);
    const double rc = std::sqrt((2.0 - alpha + a) / 2.0);
    Mat literal(2, 2, {Cx(rl), Cx(rc), Cx(rc), Cx(rl)});
    REQUIRE_FALSE(is_unitary(literal, 1e-12));

    auto [v0, v1] = qubit_coupling_blocks(alpha, a);
    REQUIRE(is_unitary(v0, 1e-12));
    REQUIRE(is_unitary(v1, 1e-12));
}
