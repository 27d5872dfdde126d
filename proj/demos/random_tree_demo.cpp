// Plans both tree shapes for a random six-outcome POVM on a qutrit, checks
// them against direct Born statistics and samples one of them.

#include <cstdio>
#include <random>

#include "povmseq/povmseq.hpp"

using namespace povmseq;

namespace {

Povm make_random_povm(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Mat> parts;
    Mat sum(d, d);
    for (std::size_t k = 0; k < n; ++k) {
        Mat g(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) g(i, j) = Cx(gauss(rng), gauss(rng));
        parts.push_back(g * g.dagger());
        sum += parts.back();
    }
    Mat t = pinv_sqrt(sum);
    std::vector<Effect> effects;
    for (std::size_t k = 0; k < n; ++k) effects.push_back({t * parts[k] * t, std::to_string(k)});
    return validate_povm(effects, 1e-9);
}

} // namespace

int main() {
    const std::size_t n = 6, d = 3;
    Povm p = make_random_povm(n, d, 7);
    std::printf("random %zu-outcome POVM on dimension %zu\n", n, d);

    MeasurementTree chain = plan_outcome_decreasing(p);
    MeasurementTree tree = plan_binary_search(p);
    std::printf("outcome-decreasing: depth %zu, %d nodes\n", tree_depth(chain),
                chain.node_count);
    std::printf("binary-search:      depth %zu, %d nodes\n", tree_depth(tree), tree.node_count);

    TreeVerification vc = verify_tree(chain, p, 50, 1e-9);
    TreeVerification vt = verify_tree(tree, p, 50, 1e-9);
    std::printf("Born-rule residual over 50 random states: chain %.3g, tree %.3g\n",
                vc.max_deviation, vt.max_deviation);

    ShotRng state_rng(11);
    Mat g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            auto [re, im] = state_rng.gaussian_pair();
            g(i, j) = Cx(re, im);
        }
    Mat rho = g * g.dagger();
    State s = State(rho * (1.0 / rho.trace().real()));

    OutcomeReport r = sample(tree, s, 200000, 42, 4);
    std::printf("\n%-8s %-22s %s\n", "outcome", "exact", "sampled");
    for (const auto& o : r.outcomes)
        std::printf("%-8s %-22.15g %.5f\n", o.label.c_str(), o.exact_probability,
                    static_cast<double>(o.empirical_count) / r.shots);
    return 0;
}
