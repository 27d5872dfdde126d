#pragma once

#include <cmath>

#include "povmseq/sequential.hpp"

namespace povmseq {

/// Unambiguous discrimination of two equiprobable pure qubit states
/// cos(w)|0> +- sin(w)|1>: outcomes "1" and "2" identify the state without
/// error, "?" is the inconclusive answer. lambda is chosen so the inconclusive
/// probability is minimal while A_? stays positive.
struct UsdProblem {
    double omega = 0.0;
    double lambda = 0.0;
    Vec psi1, psi2;
    Vec psi1_perp, psi2_perp;
    Povm povm; // effects "1", "2", "?" in that order
};

/// Valid for omega in (0, pi/4]. omega = 0 would make the two states equal
/// (the measurement degenerates); omega = pi/4 gives orthogonal states with a
/// vanishing inconclusive effect.
inline UsdProblem build_usd(double omega) {
    constexpr double quarter_pi = 0.78539816339744830961566084581988;
    if (!(omega > 0.0) || omega > quarter_pi + 1e-15)
        throw DomainError("build_usd: omega must lie in (0, pi/4]");

    UsdProblem u;
    u.omega = omega;
    const double c = std::cos(omega), s = std::sin(omega);
    u.lambda = 1.0 / (2.0 * c * c);
    u.psi1 = {Cx(c), Cx(s)};
    u.psi2 = {Cx(c), Cx(-s)};
    u.psi1_perp = {Cx(s), Cx(-c)};
    u.psi2_perp = {Cx(s), Cx(c)};

    Mat a1 = Mat::outer(u.psi2_perp, u.psi2_perp) * u.lambda;
    Mat a2 = Mat::outer(u.psi1_perp, u.psi1_perp) * u.lambda;
    Mat aq = Mat::identity(2) - a1 - a2;
    u.povm = validate_povm({{std::move(a1), "1"}, {std::move(a2), "2"}, {std::move(aq), "?"}});
    return u;
}

/// cos(2 w): the chance of the inconclusive answer, averaged over the two
/// equiprobable inputs.
inline double inconclusive_probability(double omega) {
    if (!(omega > 0.0) || omega > 0.78539816339744830961566084581988 + 1e-15)
        throw DomainError("inconclusive_probability: omega must lie in (0, pi/4]");
    return std::cos(2.0 * omega);
}

/// 2 sin^2(w) = 1 - cos(2 w).
inline double conclusive_probability(double omega) {
    return 1.0 - inconclusive_probability(omega);
}

enum class UsdOrdering {
    conclusiveness_first, // first ask "will the answer be conclusive?"
    state_first,          // first ask "is it state 1?"
};

/// A discrimination problem together with its two-step measurement tree and
/// the per-node qubit factorizations of the coupling circuits.
struct UsdScenario {
    UsdOrdering kind;
    UsdProblem problem;
    MeasurementTree tree;
    std::vector<QubitFactorization> factorizations; // indexed by node id
};

namespace detail {

inline void collect_factorizations(const TreeNode& node, std::vector<QubitFactorization>& out) {
    out[static_cast<std::size_t>(node.id)] = qubit_factorization(node.circuit);
    for (const TreeChild* c : {&node.in, &node.out})
        if (!std::holds_alternative<TreeLeaf>(*c))
            collect_factorizations(*std::get<std::unique_ptr<TreeNode>>(*c), out);
}

inline UsdScenario make_scenario(double omega, UsdOrdering kind) {
    UsdScenario sc{kind, build_usd(omega), {}, {}};
    // Conclusiveness first is the binary split {1,2} vs {?}; asking for state
    // 1 first is the outcome-decreasing chain in the natural order.
    sc.tree = kind == UsdOrdering::conclusiveness_first ? plan_binary_search(sc.problem.povm)
                                                        : plan_outcome_decreasing(sc.problem.povm);
    sc.factorizations.resize(static_cast<std::size_t>(sc.tree.node_count));
    collect_factorizations(*sc.tree.root, sc.factorizations);
    return sc;
}

} // namespace detail

/// The first node measures {I - A_?, A_?}; on the conclusive branch the
/// follow-up is the projective {P_+, P_-}.
inline UsdScenario scenario_conclusiveness_first(double omega) {
    return detail::make_scenario(omega, UsdOrdering::conclusiveness_first);
}

/// The first node measures {A_1, I - A_1}; a negative answer is followed by
/// the updated two-outcome measurement deciding between "2" and "?".
inline UsdScenario scenario_state_first(double omega) {
    return detail::make_scenario(omega, UsdOrdering::state_first);
}

} // namespace povmseq
