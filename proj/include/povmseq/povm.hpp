#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "povmseq/eig.hpp"
#include "povmseq/types.hpp"

namespace povmseq {

/// Weights below this are dead branches: they carry no post-measurement state,
/// and consumers must not normalize them.
inline constexpr double null_tol = 1e-12;

/// Tolerance for state validation and probability clamping.
inline constexpr double state_tol = 1e-8;

/// One measurement outcome: a Hermitian matrix with spectrum in [0, 1], plus
/// the outcome's label.
struct Effect {
    Mat matrix;
    std::string label;

    std::size_t dim() const { return matrix.rows(); }
};

/// A finite-outcome measurement: effects summing to the identity. Build one
/// through validate_povm so the invariants are actually checked.
struct Povm {
    std::size_t dim = 0;
    std::vector<Effect> effects;

    std::size_t size() const { return effects.size(); }
};

/// A density operator. Pure states are promoted to projectors on construction.
class State {
public:
    explicit State(Mat density) : rho_(std::move(density)) {
        if (!rho_.square()) throw DimensionError("state: density matrix must be square");
        if (!rho_.all_finite()) throw DomainError("state: non-finite entries");
        if (frob_dist(rho_, rho_.dagger()) > state_tol)
            throw DomainError("state: density matrix is not Hermitian");
        if (std::abs(rho_.trace().real() - 1.0) > state_tol ||
            std::abs(rho_.trace().imag()) > state_tol)
            throw DomainError("state: trace differs from one");
        auto eig = herm_eig(rho_, state_tol);
        if (eig.eigenvalues.back() < -state_tol)
            throw DomainError("state: density matrix is not positive semidefinite");
    }

    explicit State(const Vec& pure) : State(normalized_projector(pure)) {}

    /// Wrap a matrix that is PSD and unit-trace by construction (internal
    /// branch updates); skips the validating eigendecomposition.
    static State trusted(Mat density) {
        State s;
        s.rho_ = std::move(density);
        return s;
    }

    const Mat& matrix() const { return rho_; }
    std::size_t dim() const { return rho_.rows(); }

private:
    State() = default;

    static Mat normalized_projector(const Vec& pure) {
        const double n = vec_norm(pure);
        if (n <= 0.0) throw DomainError("state: zero vector");
        Mat p = Mat::outer(pure, pure);
        return p * (1.0 / (n * n));
    }

    Mat rho_;
};

/// Weighted measurement branch. A weight below null_tol carries no state.
struct Branch {
    double weight = 0.0;
    std::optional<State> state;
};

/// Disjoint cover of the outcome indices [0, n).
struct Partition {
    std::vector<std::vector<std::size_t>> cells;
};

// ---------------------------------------------------------------------------
// validation

struct PovmViolation {
    enum class Kind { empty_list, dim_mismatch, not_effect, sum_not_identity };
    Kind kind;
    /// Index of the offending effect; npos for list-level violations.
    std::size_t index;
    /// Residual magnitude (identity-sum deficit, eigenvalue excess, ...).
    double magnitude;
    std::string message;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct PovmValidationError : Error {
    explicit PovmValidationError(std::vector<PovmViolation> violations)
        : Error(join(violations)), violations(std::move(violations)) {}

    std::vector<PovmViolation> violations;

private:
    static std::string join(const std::vector<PovmViolation>& v) {
        std::string s = "invalid POVM:";
        for (const auto& x : v) {
            s += ' ';
            s += x.message;
            s += ';';
        }
        return s;
    }
};

/// Structured check; empty result means the effects form a valid POVM.
inline std::vector<PovmViolation> check_povm(const std::vector<Effect>& effects,
                                             double tol = default_tol<double>) {
    using K = PovmViolation::Kind;
    std::vector<PovmViolation> out;
    if (effects.empty()) {
        out.push_back({K::empty_list, PovmViolation::npos, 0.0, "empty effect list"});
        return out;
    }
    const std::size_t d = effects.front().dim();
    for (std::size_t i = 0; i < effects.size(); ++i) {
        const Mat& m = effects[i].matrix;
        if (!m.square() || m.rows() != d) {
            out.push_back({K::dim_mismatch, i, 0.0,
                           "effect " + std::to_string(i) + " has mismatched dimension"});
            return out; // later checks assume a common dimension
        }
    }
    Mat sum(d, d);
    for (std::size_t i = 0; i < effects.size(); ++i) {
        const Mat& m = effects[i].matrix;
        if (!m.all_finite()) {
            out.push_back({K::not_effect, i, 0.0,
                           "effect " + std::to_string(i) + " has non-finite entries"});
            continue;
        }
        const double herm = frob_dist(m, m.dagger());
        if (herm > tol) {
            out.push_back({K::not_effect, i, herm,
                           "effect " + std::to_string(i) + " is not Hermitian"});
            continue;
        }
        auto eig = herm_eig(m, tol);
        if (eig.eigenvalues.back() < -tol)
            out.push_back({K::not_effect, i, -eig.eigenvalues.back(),
                           "effect " + std::to_string(i) + " is not positive semidefinite"});
        else if (eig.eigenvalues.front() > 1.0 + tol)
            out.push_back({K::not_effect, i, eig.eigenvalues.front() - 1.0,
                           "effect " + std::to_string(i) + " exceeds the identity"});
        sum += m;
    }
    const double deficit = frob_dist(sum, Mat::identity(d));
    if (deficit > tol * static_cast<double>(effects.size()))
        out.push_back({K::sum_not_identity, PovmViolation::npos, deficit,
                       "effects do not sum to the identity (residual " +
                           std::to_string(deficit) + ")"});
    return out;
}

inline Povm validate_povm(std::vector<Effect> effects, double tol = default_tol<double>) {
    auto violations = check_povm(effects, tol);
    if (!violations.empty()) throw PovmValidationError(std::move(violations));
    Povm p;
    p.dim = effects.front().dim();
    p.effects = std::move(effects);
    return p;
}

// ---------------------------------------------------------------------------
// probabilities and state updates

/// Born probability tr(E rho), clamped into [0, 1].
inline double born_probability(const Effect& e, const State& s) {
    if (e.dim() != s.dim()) throw DimensionError("born_probability: dimension mismatch");
    Cx t(0);
    const Mat& a = e.matrix;
    const Mat& rho = s.matrix();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t += a(i, j) * rho(j, i);
    if (std::abs(t.imag()) > state_tol)
        throw DomainError("born_probability: trace has a non-negligible imaginary part");
    return clamp01(t.real(), state_tol);
}

/// Minimally disturbing state update: weight tr(E rho) and post-measurement
/// state sqrt(E) rho sqrt(E) / weight. Returns a stateless branch when the
/// weight is below null_tol.
inline Branch lueders_branch(const Effect& e, const State& s) {
    if (e.dim() != s.dim()) throw DimensionError("lueders_branch: dimension mismatch");
    const Mat root = psd_sqrt(e.matrix);
    Mat unnorm = root * s.matrix() * root;
    unnorm = (unnorm + unnorm.dagger()) * 0.5;
    const double weight = clamp01(unnorm.trace().real(), state_tol);
    if (weight < null_tol) return {weight, std::nullopt};
    return {weight, State::trusted(unnorm * (1.0 / unnorm.trace().real()))};
}

// ---------------------------------------------------------------------------
// coarse- and fine-graining

inline void require_partition(const Partition& part, std::size_t n) {
    std::vector<bool> seen(n, false);
    for (const auto& cell : part.cells) {
        if (cell.empty()) throw PartitionError("partition: empty cell");
        for (std::size_t j : cell) {
            if (j >= n) throw PartitionError("partition: index out of range");
            if (seen[j]) throw PartitionError("partition: index appears twice");
            seen[j] = true;
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        if (!seen[j]) throw PartitionError("partition: index " + std::to_string(j) + " missing");
}

/// Merge outcomes cell-wise: the k-th effect of the result is the sum over
/// cell k, labelled by the joined member labels.
inline Povm coarse_grain(const Povm& p, const Partition& part) {
    require_partition(part, p.size());
    std::vector<Effect> merged;
    merged.reserve(part.cells.size());
    for (const auto& cell : part.cells) {
        Mat sum(p.dim, p.dim);
        std::string label;
        for (std::size_t j : cell) {
            sum += p.effects[j].matrix;
            if (!label.empty()) label += '+';
            label += p.effects[j].label;
        }
        merged.push_back({std::move(sum), std::move(label)});
    }
    return validate_povm(std::move(merged));
}

/// Follow-up measurement on the outcomes of `cell`, adjusted for the fact that
/// the coarse effect B = sum over the cell has already been measured. Effects
/// are kept in the full space; they sum to the projector onto ran B.
struct SubspacePovm {
    std::vector<Effect> effects;
    std::vector<std::size_t> cell;
    Mat range_projector;
    /// Set when ran B is a proper subspace; downstream consumers work inside it.
    bool rank_deficient = false;
};

namespace detail {

/// Core of the conditional update, usable on subspace measurements whose
/// effects sum to a projector rather than the identity.
inline SubspacePovm conditional_update_effects(const std::vector<Effect>& effects,
                                               const std::vector<std::size_t>& cell,
                                               double rank_tol = default_rank_tol<double>) {
    if (cell.empty()) throw PartitionError("conditional update: empty cell");
    std::vector<bool> seen(effects.size(), false);
    const std::size_t d = effects.front().dim();
    Mat b(d, d);
    for (std::size_t j : cell) {
        if (j >= effects.size()) throw PartitionError("conditional update: index out of range");
        if (seen[j]) throw PartitionError("conditional update: index appears twice");
        seen[j] = true;
        b += effects[j].matrix;
    }

    // One eigendecomposition serves the pseudoinverse root, the range
    // projector and the rank.
    auto eig = herm_eig(b);
    const double lam_max = eig.eigenvalues.front();
    const double cut = rank_tol * std::max(lam_max, 0.0);
    std::vector<double> inv_root(d, 0.0), indicator(d, 0.0);
    std::size_t rank = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const double lam = eig.eigenvalues[i];
        if (lam < -rank_tol * std::max(lam_max, 1.0))
            throw NotPsdError("conditional update: coarse effect is not PSD");
        if (lam > cut && lam > 0.0) {
            inv_root[i] = 1.0 / std::sqrt(lam);
            indicator[i] = 1.0;
            ++rank;
        }
    }
    const Mat& w = eig.eigenvectors;
    Mat r = w * Mat::diagonal(inv_root) * w.dagger();
    r = (r + r.dagger()) * 0.5;
    Mat proj = w * Mat::diagonal(indicator) * w.dagger();
    proj = (proj + proj.dagger()) * 0.5;

    SubspacePovm out;
    out.cell = cell;
    out.range_projector = std::move(proj);
    out.rank_deficient = rank < d;
    out.effects.reserve(cell.size());
    for (std::size_t j : cell) {
        Mat updated = r * effects[j].matrix * r;
        updated = (updated + updated.dagger()) * 0.5;
        out.effects.push_back({std::move(updated), effects[j].label});
    }
    return out;
}

} // namespace detail

inline SubspacePovm conditional_update(const Povm& p, const std::vector<std::size_t>& cell,
                                       double rank_tol = default_rank_tol<double>) {
    return detail::conditional_update_effects(p.effects, cell, rank_tol);
}

} // namespace povmseq
