// Walks through unambiguous discrimination of two pure qubit states at
// w = 0.4, in both measurement orderings, printing every intermediate piece:
// the POVM, the coupling circuits, exact statistics and a sampled run.

#include <cstdio>

#include "povmseq/povmseq.hpp"

using namespace povmseq;

namespace {

void print_matrix(const char* name, const Mat& m) {
    std::printf("%s =\n", name);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::printf("  ");
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const Cx z = m(i, j);
            if (std::abs(z.imag()) < 1e-12)
                std::printf("%9.5f          ", z.real());
            else
                std::printf("%9.5f%+8.5fi ", z.real(), z.imag());
        }
        std::printf("\n");
    }
}

void run_scenario(const UsdScenario& sc, const char* title) {
    std::printf("\n=== %s ===\n", title);
    std::printf("root measures \"%s\"; tree depth %zu, %d nodes\n",
                sc.tree.root->effect_b.label.c_str(), tree_depth(sc.tree), sc.tree.node_count);

    const CouplingCircuit& c = sc.tree.root->circuit;
    print_matrix("U_B (basis change)", c.basis_change);
    print_matrix("block for the larger eigenvalue", c.blocks[0]);
    print_matrix("block for the smaller eigenvalue", c.blocks[1]);
    const QubitFactorization& f = sc.factorizations[0];
    print_matrix("ancilla pre-rotation V0", f.pre_rotation);
    print_matrix("controlled gate W = V1 V0^dag", f.controlled_gate);

    for (int which = 0; which < 2; ++which) {
        const Vec& psi = which == 0 ? sc.problem.psi1 : sc.problem.psi2;
        OutcomeReport exact = execute_exact(sc.tree, State(psi));
        OutcomeReport counts = sample(sc.tree, State(psi), 100000, 2024);
        std::printf("input psi_%d:\n", which + 1);
        for (const auto& o : exact.outcomes) {
            const auto& sampled = counts.outcomes[o.outcome];
            std::printf("  outcome %-2s  exact %-20.15g sampled %.5f\n", o.label.c_str(),
                        o.exact_probability,
                        static_cast<double>(sampled.empirical_count) / counts.shots);
        }
    }
}

} // namespace

int main() {
    const double w = 0.4;
    UsdProblem u = build_usd(w);
    std::printf("two-state discrimination at omega = %.2f\n", w);
    std::printf("lambda = %.15g, P(?) = %.15g, P(!) = %.15g\n", u.lambda,
                inconclusive_probability(w), conclusive_probability(w));
    print_matrix("A_1", u.povm.effects[0].matrix);
    print_matrix("A_2", u.povm.effects[1].matrix);
    print_matrix("A_?", u.povm.effects[2].matrix);

    run_scenario(scenario_conclusiveness_first(w), "conclusiveness first");
    run_scenario(scenario_state_first(w), "state 1 first");
    return 0;
}
