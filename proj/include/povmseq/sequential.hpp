#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "povmseq/dilation.hpp"
#include "povmseq/rng.hpp"

namespace povmseq {

/// Terminal of a measurement tree: one original outcome.
struct TreeLeaf {
    std::size_t outcome;
    std::string label;
};

struct TreeNode;
using TreeChild = std::variant<std::unique_ptr<TreeNode>, TreeLeaf>;

/// One two-outcome step. The node measures {B, I-B} where B is the
/// conditional-update-propagated sum of the effects on the `in` side; ancilla
/// outcome 0 ("B happened") continues into `in`, outcome 1 into `out`.
struct TreeNode {
    int id = 0;
    Effect effect_b;                // expressed in the full space
    std::vector<std::size_t> cell;  // original outcome indices under this node
    CouplingCircuit circuit;
    TreeChild in;
    TreeChild out;
};

/// Binary tree of two-outcome coarse-grainings whose leaves are the original
/// outcomes. Immutable after planning; execution and sampling are read-only.
struct MeasurementTree {
    std::unique_ptr<TreeNode> root;
    std::size_t dim = 0;
    std::size_t n_outcomes = 0;
    int node_count = 0;
};

namespace detail {

/// Builds a subtree over `ids` (original outcome indices, in decision order)
/// with `effects` the matching conditional-update-propagated effects.
/// take_in(k) says how many leading ids the "in" branch covers.
inline TreeChild build_subtree(const std::vector<Effect>& effects,
                               const std::vector<std::size_t>& ids,
                               const std::function<std::size_t(std::size_t)>& take_in,
                               int& next_id) {
    if (ids.size() == 1) return TreeLeaf{ids[0], effects[0].label};

    const std::size_t take = take_in(ids.size());
    const std::size_t d = effects.front().dim();

    auto node = std::make_unique<TreeNode>();
    node->id = next_id++;
    node->cell = ids;

    Mat b(d, d);
    std::string label;
    for (std::size_t k = 0; k < take; ++k) {
        b += effects[k].matrix;
        if (!label.empty()) label += '+';
        label += effects[k].label;
    }
    node->effect_b = {std::move(b), std::move(label)};
    // Deep chains accumulate a little eigenvalue noise; give the effect check
    // headroom beyond the kernel default.
    node->circuit = coupling_circuit(node->effect_b, 1e-8);

    std::vector<std::size_t> pos_in(take), pos_out(ids.size() - take);
    std::iota(pos_in.begin(), pos_in.end(), std::size_t{0});
    std::iota(pos_out.begin(), pos_out.end(), take);

    SubspacePovm in_updated = detail::conditional_update_effects(effects, pos_in);
    SubspacePovm out_updated = detail::conditional_update_effects(effects, pos_out);

    const std::vector<std::size_t> ids_in(ids.begin(), ids.begin() + take);
    const std::vector<std::size_t> ids_out(ids.begin() + take, ids.end());
    node->in = build_subtree(in_updated.effects, ids_in, take_in, next_id);
    node->out = build_subtree(out_updated.effects, ids_out, take_in, next_id);
    return node;
}

inline MeasurementTree plan(const Povm& p, const std::vector<std::size_t>& order,
                            const std::function<std::size_t(std::size_t)>& take_in) {
    if (p.size() < 2) throw TreeError("measurement tree needs at least two outcomes");
    if (order.size() != p.size()) throw TreeError("outcome order must be a permutation");
    std::vector<bool> seen(p.size(), false);
    for (std::size_t j : order) {
        if (j >= p.size() || seen[j]) throw TreeError("outcome order must be a permutation");
        seen[j] = true;
    }
    std::vector<Effect> effects;
    effects.reserve(p.size());
    for (std::size_t j : order) effects.push_back(p.effects[j]);

    MeasurementTree t;
    t.dim = p.dim;
    t.n_outcomes = p.size();
    int next_id = 0;
    TreeChild root = build_subtree(effects, order, take_in, next_id);
    t.root = std::get<std::unique_ptr<TreeNode>>(std::move(root));
    t.node_count = next_id;
    return t;
}

} // namespace detail

/// Chain that rules out one outcome per step, in the given order (ascending
/// outcome index by default). Depth n-1; no conditioning on earlier results
/// is needed to know which measurement comes next.
inline MeasurementTree plan_outcome_decreasing(const Povm& p, std::vector<std::size_t> order) {
    return detail::plan(p, order, [](std::size_t) { return std::size_t{1}; });
}

inline MeasurementTree plan_outcome_decreasing(const Povm& p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return plan_outcome_decreasing(p, std::move(order));
}

/// Balanced tree that halves the candidate set at every step: the first
/// ceil(k/2) outcomes (in the POVM's given order) go to the "in" branch.
/// Depth ceil(log2 n); each step is chosen based on the previous outcome.
inline MeasurementTree plan_binary_search(const Povm& p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return detail::plan(p, order, [](std::size_t k) { return (k + 1) / 2; });
}

inline std::size_t tree_depth(const TreeChild& c) {
    if (std::holds_alternative<TreeLeaf>(c)) return 0;
    const auto& node = std::get<std::unique_ptr<TreeNode>>(c);
    return 1 + std::max(tree_depth(node->in), tree_depth(node->out));
}

inline std::size_t tree_depth(const MeasurementTree& t) {
    return 1 + std::max(tree_depth(t.root->in), tree_depth(t.root->out));
}

// ---------------------------------------------------------------------------
// execution

struct OutcomeResult {
    std::size_t outcome = 0;
    std::string label;
    double exact_probability = 0.0;
    std::optional<State> post_state;
    std::vector<int> path; // node ids from the root to the leaf
    long long empirical_count = 0;
};

struct OutcomeReport {
    std::vector<OutcomeResult> outcomes; // indexed by original outcome
    long long shots = 0;
};

namespace detail {

struct NodeWeights {
    double p_in = 0.0; // conditional probability of the "in" branch
};

inline void zero_fill(const TreeChild& child, std::vector<int> path, OutcomeReport& report) {
    if (std::holds_alternative<TreeLeaf>(child)) {
        const auto& leaf = std::get<TreeLeaf>(child);
        auto& res = report.outcomes[leaf.outcome];
        res.exact_probability = 0.0;
        res.post_state.reset();
        res.path = std::move(path);
        return;
    }
    const auto& node = std::get<std::unique_ptr<TreeNode>>(child);
    path.push_back(node->id);
    zero_fill(node->in, path, report);
    zero_fill(node->out, std::move(path), report);
}

inline void descend_node(const TreeNode& node, double weight, const State& state,
                         std::vector<int> path, OutcomeReport& report,
                         std::vector<NodeWeights>* cache);

inline void descend_child(const TreeChild& child, double weight,
                          const std::optional<State>& state, std::vector<int> path,
                          OutcomeReport& report, std::vector<NodeWeights>* cache) {
    if (std::holds_alternative<TreeLeaf>(child)) {
        const auto& leaf = std::get<TreeLeaf>(child);
        auto& res = report.outcomes[leaf.outcome];
        res.exact_probability = weight;
        res.post_state = state;
        res.path = std::move(path);
        return;
    }
    const auto& node = std::get<std::unique_ptr<TreeNode>>(child);
    if (!state) { // dead branch: everything below carries probability zero
        path.push_back(node->id);
        zero_fill(node->in, path, report);
        zero_fill(node->out, std::move(path), report);
        return;
    }
    descend_node(*node, weight, *state, std::move(path), report, cache);
}

inline void descend_node(const TreeNode& node, double weight, const State& state,
                         std::vector<int> path, OutcomeReport& report,
                         std::vector<NodeWeights>* cache) {
    auto [in_branch, out_branch] = apply_coupling(node.circuit, state);
    if (cache) {
        const double total = in_branch.weight + out_branch.weight;
        double p = total > 0.0 ? in_branch.weight / total : 0.0;
        if (p < null_tol) p = 0.0;
        if (p > 1.0 - null_tol) p = 1.0;
        (*cache)[static_cast<std::size_t>(node.id)] = {p};
    }
    path.push_back(node.id);
    descend_child(node.in, weight * in_branch.weight, in_branch.state, path, report, cache);
    descend_child(node.out, weight * out_branch.weight, out_branch.state, std::move(path),
                  report, cache);
}

inline void collect_labels(const TreeNode& node, OutcomeReport& report) {
    for (const TreeChild* c : {&node.in, &node.out}) {
        if (std::holds_alternative<TreeLeaf>(*c)) {
            const auto& leaf = std::get<TreeLeaf>(*c);
            report.outcomes[leaf.outcome].label = leaf.label;
        } else {
            collect_labels(*std::get<std::unique_ptr<TreeNode>>(*c), report);
        }
    }
}

inline OutcomeReport run_exact(const MeasurementTree& t, const State& s,
                               std::vector<NodeWeights>* cache) {
    if (s.dim() != t.dim) throw DimensionError("execute_exact: dimension mismatch");
    OutcomeReport report;
    report.outcomes.resize(t.n_outcomes);
    for (std::size_t i = 0; i < t.n_outcomes; ++i) report.outcomes[i].outcome = i;
    collect_labels(*t.root, report);
    descend_node(*t.root, 1.0, s, {}, report, cache);
    return report;
}

} // namespace detail

/// Walk every branch, multiplying the two-outcome weights along each path.
/// Leaf probabilities coincide with the direct Born probabilities of the
/// original POVM.
inline OutcomeReport execute_exact(const MeasurementTree& t, const State& s) {
    return detail::run_exact(t, s, nullptr);
}

/// Streams single shots through a fixed (tree, state) pair. Branch
/// probabilities are evaluated once; each shot is one descent that stops as
/// soon as a leaf fires.
class TreeSampler {
public:
    TreeSampler(const MeasurementTree& t, const State& s) : tree_(&t) {
        cache_.resize(static_cast<std::size_t>(t.node_count));
        exact_ = detail::run_exact(t, s, &cache_);
    }

    /// One stochastic descent; returns the outcome index that fired.
    std::size_t draw(ShotRng& rng) const {
        const TreeNode* node = tree_->root.get();
        for (;;) {
            const auto& w = cache_[static_cast<std::size_t>(node->id)];
            const bool go_in = rng.uniform() < w.p_in;
            const TreeChild& next = go_in ? node->in : node->out;
            if (std::holds_alternative<TreeLeaf>(next)) return std::get<TreeLeaf>(next).outcome;
            node = std::get<std::unique_ptr<TreeNode>>(next).get();
        }
    }

    const OutcomeReport& exact() const { return exact_; }

private:
    const MeasurementTree* tree_;
    std::vector<detail::NodeWeights> cache_;
    OutcomeReport exact_;
};

/// Exact probabilities plus per-shot sampled counts. Shot k draws from the
/// substream (seed, k), so the result is a pure function of (seed, shots)
/// regardless of how the shot range is partitioned across workers.
inline OutcomeReport sample(const MeasurementTree& t, const State& s, long long shots,
                            std::uint64_t seed, unsigned workers = 1) {
    if (shots < 1) throw DomainError("sample: shots must be >= 1");
    TreeSampler sampler(t, s);
    OutcomeReport report = sampler.exact();
    report.shots = shots;

    if (workers < 1) workers = 1;
    const auto n_out = report.outcomes.size();
    std::vector<std::vector<long long>> partial(workers, std::vector<long long>(n_out, 0));
    auto run_range = [&](unsigned w, long long begin, long long end) {
        for (long long k = begin; k < end; ++k) {
            ShotRng rng(seed, static_cast<std::uint64_t>(k));
            ++partial[w][sampler.draw(rng)];
        }
    };
    if (workers == 1) {
        run_range(0, 0, shots);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const long long begin = shots * w / workers;
            const long long end = shots * (w + 1) / workers;
            pool.emplace_back(run_range, w, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    for (unsigned w = 0; w < workers; ++w)
        for (std::size_t i = 0; i < n_out; ++i) report.outcomes[i].empirical_count += partial[w][i];
    return report;
}

// ---------------------------------------------------------------------------
// verification against the Born rule

struct TreeVerification {
    double max_deviation = 0.0;
    std::size_t trials = 0;
    double tol = 0.0;
    bool pass = false;
};

/// Random-state check of the tree against direct Born probabilities:
/// max_j |P_tree(j) - tr(A_j rho)| over `trials` random density matrices.
inline TreeVerification verify_tree(const MeasurementTree& t, const Povm& p, std::size_t trials,
                                    double tol, std::uint64_t seed = 0x5eedu) {
    if (p.size() != t.n_outcomes || p.dim != t.dim)
        throw DimensionError("verify_tree: tree was not built from this POVM");
    TreeVerification v;
    v.trials = trials;
    v.tol = tol;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        ShotRng rng(seed, trial);
        Mat g(p.dim, p.dim);
        for (std::size_t i = 0; i < p.dim; ++i)
            for (std::size_t j = 0; j < p.dim; ++j) {
                auto [re, im] = rng.gaussian_pair();
                g(i, j) = Cx(re, im);
            }
        Mat rho = g * g.dagger();
        State s = State::trusted(rho * (1.0 / rho.trace().real()));

        OutcomeReport report = execute_exact(t, s);
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double born = born_probability(p.effects[j], s);
            v.max_deviation =
                std::max(v.max_deviation, std::abs(report.outcomes[j].exact_probability - born));
        }
    }
    v.pass = v.max_deviation < tol;
    return v;
}

} // namespace povmseq
