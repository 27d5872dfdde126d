#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "povmseq/povm.hpp"

namespace povmseq {

// ---------------------------------------------------------------------------
// Naimark dilation (reference construction)

/// Dilation of an n-outcome POVM in dimension d to a projective measurement in
/// dimension n*d: an isometry V with V^dag P_i V = F_i, the projectors
/// I_d (x) |i><i|, and a unitary extension U acting as V on the |0> ancilla
/// sector. The ancilla is the fast tensor factor.
struct NaimarkDilation {
    Mat isometry;          // (n d) x d
    std::vector<Mat> projectors; // each (n d) x (n d)
    Mat unitary_extension; // (n d) x (n d)
};

/// Direct dilation V = sum_i sqrt(F_i) (x) |i>. Dimension-hungry (n*d) but
/// simple; used as the reference point for the ancilla-qubit constructions.
inline NaimarkDilation naive_naimark(const Povm& p) {
    const std::size_t d = p.dim;
    const std::size_t n = p.size();
    const std::size_t big = n * d;

    NaimarkDilation out;
    out.isometry = Mat(big, d);
    for (std::size_t i = 0; i < n; ++i) {
        Mat root = psd_sqrt(p.effects[i].matrix);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) out.isometry(a * n + i, b) = root(a, b);
    }

    out.projectors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Mat proj(big, big);
        for (std::size_t a = 0; a < d; ++a) proj(a * n + i, a * n + i) = 1.0;
        out.projectors.push_back(std::move(proj));
    }

    // Unitary extension: the ancilla-|0> columns are fixed to the isometry,
    // the rest come from Gram-Schmidt over the canonical basis in order,
    // dropping candidates whose residual is negligible.
    out.unitary_extension = Mat(big, big);
    std::vector<Vec> columns;
    std::vector<std::size_t> slots;
    columns.reserve(big);
    slots.reserve(big);
    for (std::size_t b = 0; b < d; ++b) {
        Vec col(big);
        for (std::size_t r = 0; r < big; ++r) col[r] = out.isometry(r, b);
        columns.push_back(std::move(col));
        slots.push_back(b * n);
    }
    std::vector<std::size_t> free_slots;
    for (std::size_t c = 0; c < big; ++c) {
        bool taken = false;
        for (std::size_t s : slots) taken = taken || s == c;
        if (!taken) free_slots.push_back(c);
    }
    std::size_t next_free = 0;
    for (std::size_t k = 0; k < big && next_free < free_slots.size(); ++k) {
        Vec cand(big, Cx(0));
        cand[k] = Cx(1);
        for (int pass = 0; pass < 2; ++pass) { // re-orthogonalize once for stability
            for (const auto& col : columns) {
                const Cx overlap = vec_dot(col, cand);
                for (std::size_t r = 0; r < big; ++r) cand[r] -= overlap * col[r];
            }
        }
        const double residual = vec_norm(cand);
        if (residual < 1e-10) continue;
        for (auto& z : cand) z /= residual;
        columns.push_back(std::move(cand));
        slots.push_back(free_slots[next_free++]);
    }
    if (columns.size() != big)
        throw ConvergenceError("naive_naimark: unitary completion fell short");
    for (std::size_t c = 0; c < big; ++c)
        for (std::size_t r = 0; r < big; ++r) out.unitary_extension(r, slots[c]) = columns[c][r];
    return out;
}

/// Dimension needed by the rank-economical dilation: sum of effect ranks.
inline std::size_t peres_dimension(const Povm& p, double rank_tol = default_rank_tol<double>) {
    std::size_t total = 0;
    for (const auto& e : p.effects) total += eig_rank(e.matrix, rank_tol);
    return total;
}

// ---------------------------------------------------------------------------
// Single-ancilla coupling circuit for a two-outcome measurement {B, I-B}

/// Realization of one two-outcome update {B, I-B} with a single ancilla qubit:
/// rotate the system to the eigenbasis of B (basis_change), apply the
/// system-controlled block unitary V = sum_j |j><j| (x) V_j to the ancilla
/// prepared in |0>, measure the ancilla in the z basis, rotate back. Ancilla
/// outcome 0 means "B happened". Eigenvalues are sorted descending and each
/// block's first column is fixed to (sqrt(l_j), sqrt(1-l_j)); the second
/// column is completion freedom and unobservable.
struct CouplingCircuit {
    Mat basis_change;           // U_B, maps the system into the eigenbasis of B
    std::vector<Mat> blocks;    // one 2x2 unitary per system basis state
    std::vector<double> eigenvalues; // of B, descending

    std::size_t dim() const { return basis_change.rows(); }
};

/// Eigenvalues within tol of 0 or 1 are snapped onto the boundary: the square
/// roots sqrt(l) and sqrt(1-l) would otherwise blow eigenvalue noise up to
/// its square root.
inline double snap01(double x, double tol = default_tol<double>) {
    const double c = clamp01(x, tol);
    if (c < tol) return 0.0;
    if (c > 1.0 - tol) return 1.0;
    return c;
}

inline CouplingCircuit coupling_circuit(const Effect& b, double tol = default_tol<double>) {
    if (!is_effect_matrix(b.matrix, tol))
        throw NotEffectError("coupling_circuit: input is not a valid effect");
    auto eig = herm_eig(b.matrix, tol);

    CouplingCircuit c;
    c.basis_change = eig.eigenvectors.dagger();
    c.eigenvalues.reserve(eig.eigenvalues.size());
    c.blocks.reserve(eig.eigenvalues.size());
    for (double lam : eig.eigenvalues) {
        const double l = snap01(lam, tol);
        c.eigenvalues.push_back(l);
        const double rl = std::sqrt(l);
        const double rc = std::sqrt(1.0 - l);
        c.blocks.push_back(Mat(2, 2, {Cx(rl), Cx(rc), Cx(rc), Cx(-rl)}));
    }
    return c;
}

/// The block-diagonal controlled unitary V = sum_j |j><j| (x) V_j (system slow,
/// ancilla fast).
inline Mat assembled_block_unitary(const CouplingCircuit& c) {
    const std::size_t d = c.dim();
    Mat v(2 * d, 2 * d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t s = 0; s < 2; ++s) v(2 * j + r, 2 * j + s) = c.blocks[j](r, s);
    return v;
}

/// Joint unitary up to the point where the ancilla is read out:
/// V (U_B (x) I). The system back-rotation happens after the readout.
inline Mat pre_measurement_unitary(const CouplingCircuit& c) {
    return assembled_block_unitary(c) * kron(c.basis_change, Mat::identity(2));
}

/// The complete coupling unitary (U_B^dag (x) I) V (U_B (x) I).
inline Mat full_coupling_unitary(const CouplingCircuit& c) {
    return kron(c.basis_change.dagger(), Mat::identity(2)) * pre_measurement_unitary(c);
}

/// Joint system (x) ancilla state right before the ancilla readout, for a pure
/// input. The system part is still expressed in the eigenbasis of B.
inline Vec pre_measurement_state(const CouplingCircuit& c, const Vec& psi) {
    if (psi.size() != c.dim()) throw DimensionError("pre_measurement_state: dimension mismatch");
    Vec joint(2 * c.dim(), Cx(0));
    for (std::size_t i = 0; i < c.dim(); ++i) joint[2 * i] = psi[i];
    return pre_measurement_unitary(c).apply(joint);
}

/// Simulate the whole circuit on rho (x) |0><0|: project the ancilla onto
/// |0> / |1>, trace it out, rotate the system back. Branch 0 reproduces the
/// Lüders update of B, branch 1 that of I-B.
inline std::pair<Branch, Branch> apply_coupling(const CouplingCircuit& c, const State& s) {
    if (s.dim() != c.dim()) throw DimensionError("apply_coupling: dimension mismatch");
    const std::size_t d = c.dim();
    const Mat u = full_coupling_unitary(c);

    Mat ancilla0(2, 2);
    ancilla0(0, 0) = 1.0;
    const Mat joint = u * kron(s.matrix(), ancilla0) * u.dagger();

    auto take_branch = [&](std::size_t outcome) -> Branch {
        Mat sys(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) sys(i, j) = joint(2 * i + outcome, 2 * j + outcome);
        sys = (sys + sys.dagger()) * 0.5;
        const double weight = clamp01(sys.trace().real(), state_tol);
        if (weight < null_tol) return {weight, std::nullopt};
        return {weight, State::trusted(sys * (1.0 / sys.trace().real()))};
    };
    return {take_branch(0), take_branch(1)};
}

// ---------------------------------------------------------------------------
// Qubit-system factorization of the controlled block unitary

/// For a qubit system the controlled V factorizes into a plain ancilla
/// rotation V_0 followed by a standard controlled gate W = V_1 V_0^dag:
/// V = (|0><0| (x) I + |1><1| (x) W)(I (x) V_0).
struct QubitFactorization {
    Mat pre_rotation;    // V_0, applied to the ancilla unconditionally
    Mat controlled_gate; // W = V_1 V_0^dag, applied when the system is |1>
};

inline QubitFactorization qubit_factorization(const CouplingCircuit& c) {
    if (c.dim() != 2) throw DimensionError("qubit_factorization: system must be a qubit");
    return {c.blocks[0], c.blocks[1] * c.blocks[0].dagger()};
}

/// Reassemble the block unitary from its factorized form.
inline Mat reassembled_factorization(const QubitFactorization& f) {
    Mat controlled = Mat::identity(4);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s) controlled(2 + r, 2 + s) = f.controlled_gate(r, s);
    return controlled * kron(Mat::identity(2), f.pre_rotation);
}

// ---------------------------------------------------------------------------
// Bloch-parametrized qubit blocks

/// Ancilla blocks for a qubit effect written as (alpha I + a n.sigma)/2 with
/// a = |Bloch vector|, i.e. eigenvalues (alpha +- a)/2. Returns the blocks for
/// the larger and smaller eigenvalue in that order. Both columns follow the
/// same reflection sign pattern [[r, q], [q, -r]]; a symmetric all-positive
/// second column would not be unitary (see the regression test).
inline std::pair<Mat, Mat> qubit_coupling_blocks(double alpha, double a) {
    const double hi = (alpha + a) / 2.0;
    const double lo = (alpha - a) / 2.0;
    if (a < 0.0 || hi < -default_tol<double> || hi > 1.0 + default_tol<double> ||
        lo < -default_tol<double> || lo > 1.0 + default_tol<double>)
        throw DomainError("qubit_coupling_blocks: parameters do not describe an effect");
    auto block = [](double lam) {
        const double l = snap01(lam);
        const double rl = std::sqrt(l);
        const double rc = std::sqrt(1.0 - l);
        return Mat(2, 2, {Cx(rl), Cx(rc), Cx(rc), Cx(-rl)});
    };
    return {block(hi), block(lo)};
}

} // namespace povmseq
