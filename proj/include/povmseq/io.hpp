#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "povmseq/sequential.hpp"

namespace povmseq {

using nlohmann::json;

// ---------------------------------------------------------------------------
// matrices: row-major, complex entries as [re, im] pairs

inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix: expected a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) throw ParseError("matrix: rows must be non-empty arrays");
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = j.at(i);
        if (!row.is_array() || row.size() != cols)
            throw ParseError("matrix: ragged rows");
        for (std::size_t k = 0; k < cols; ++k) {
            const json& e = row.at(k);
            if (e.is_number()) {
                m(i, k) = Cx(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2 && e.at(0).is_number() &&
                       e.at(1).is_number()) {
                m(i, k) = Cx(e.at(0).get<double>(), e.at(1).get<double>());
            } else {
                throw ParseError("matrix: entries must be numbers or [re, im] pairs");
            }
        }
    }
    if (!m.all_finite()) throw ParseError("matrix: non-finite entry");
    return m;
}

// ---------------------------------------------------------------------------
// POVM documents: {"dim": d, "effects": [{"label": ..., "matrix": ...}, ...]}

inline std::vector<Effect> effects_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("effects"))
        throw ParseError("povm: expected an object with \"dim\" and \"effects\"");
    if (!j.at("dim").is_number_unsigned() && !j.at("dim").is_number_integer())
        throw ParseError("povm: \"dim\" must be an integer");
    const auto d = j.at("dim").get<long long>();
    if (d < 1) throw ParseError("povm: \"dim\" must be >= 1");
    const json& arr = j.at("effects");
    if (!arr.is_array() || arr.empty()) throw ParseError("povm: \"effects\" must be a non-empty array");

    std::vector<Effect> effects;
    effects.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& e = arr.at(i);
        if (!e.is_object() || !e.contains("matrix"))
            throw ParseError("povm: each effect needs a \"matrix\"");
        Mat m = matrix_from_json(e.at("matrix"));
        if (m.rows() != static_cast<std::size_t>(d) || m.cols() != static_cast<std::size_t>(d))
            throw ParseError("povm: effect matrix does not match \"dim\"");
        std::string label =
            e.contains("label") ? e.at("label").get<std::string>() : std::to_string(i);
        effects.push_back({std::move(m), std::move(label)});
    }
    return effects;
}

inline json povm_to_json(const Povm& p) {
    json effects = json::array();
    for (const auto& e : p.effects)
        effects.push_back({{"label", e.label}, {"matrix", matrix_to_json(e.matrix)}});
    return {{"dim", p.dim}, {"effects", std::move(effects)}};
}

// ---------------------------------------------------------------------------
// states: {"dim": d, "pure": [[re,im],...]} or {"dim": d, "density": matrix}

inline State state_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim"))
        throw ParseError("state: expected an object with \"dim\"");
    const auto d = j.at("dim").get<long long>();
    if (d < 1) throw ParseError("state: \"dim\" must be >= 1");
    if (j.contains("pure") == j.contains("density"))
        throw ParseError("state: exactly one of \"pure\" or \"density\" is required");
    if (j.contains("pure")) {
        const json& arr = j.at("pure");
        if (!arr.is_array() || arr.size() != static_cast<std::size_t>(d))
            throw ParseError("state: \"pure\" must be a length-dim array");
        Vec v(arr.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const json& e = arr.at(i);
            if (e.is_number())
                v[i] = Cx(e.get<double>(), 0.0);
            else if (e.is_array() && e.size() == 2)
                v[i] = Cx(e.at(0).get<double>(), e.at(1).get<double>());
            else
                throw ParseError("state: amplitudes must be numbers or [re, im] pairs");
        }
        return State(v);
    }
    Mat rho = matrix_from_json(j.at("density"));
    if (rho.rows() != static_cast<std::size_t>(d))
        throw ParseError("state: density matrix does not match \"dim\"");
    return State(std::move(rho));
}

inline json state_to_json(const State& s) {
    return {{"dim", s.dim()}, {"density", matrix_to_json(s.matrix())}};
}

// ---------------------------------------------------------------------------
// circuits and trees

inline json circuit_to_json(const CouplingCircuit& c) {
    json blocks = json::array();
    for (const auto& b : c.blocks) blocks.push_back(matrix_to_json(b));
    json out = {{"basis_change", matrix_to_json(c.basis_change)},
                {"eigenvalues", c.eigenvalues},
                {"blocks", std::move(blocks)}};
    if (c.dim() == 2) {
        QubitFactorization f = qubit_factorization(c);
        out["factorized"] = {{"v0", matrix_to_json(f.pre_rotation)},
                             {"w", matrix_to_json(f.controlled_gate)}};
    } else {
        out["factorized"] = nullptr;
    }
    return out;
}

inline json tree_node_to_json(const TreeNode& node);

inline json tree_child_to_json(const TreeChild& child) {
    if (std::holds_alternative<TreeLeaf>(child)) {
        const auto& leaf = std::get<TreeLeaf>(child);
        return {{"outcome", leaf.outcome}, {"label", leaf.label}};
    }
    return tree_node_to_json(*std::get<std::unique_ptr<TreeNode>>(child));
}

inline json tree_node_to_json(const TreeNode& node) {
    return {{"id", node.id},
            {"cell", node.cell},
            {"label", node.effect_b.label},
            {"effect", matrix_to_json(node.effect_b.matrix)},
            {"circuit", circuit_to_json(node.circuit)},
            {"in", tree_child_to_json(node.in)},
            {"out", tree_child_to_json(node.out)}};
}

inline json tree_to_json(const MeasurementTree& t) {
    return {{"dim", t.dim},
            {"outcomes", t.n_outcomes},
            {"nodes", t.node_count},
            {"depth", tree_depth(t)},
            {"root", tree_node_to_json(*t.root)}};
}

// ---------------------------------------------------------------------------
// reports

/// 15 significant digits, '.' decimal point, no locale.
inline std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", x);
    return buf;
}

inline json report_to_json(const OutcomeReport& r) {
    json outcomes = json::array();
    for (const auto& o : r.outcomes) {
        json entry = {{"outcome", o.outcome},
                      {"label", o.label},
                      {"exact_p", o.exact_probability},
                      {"path", o.path}};
        if (r.shots > 0) entry["count"] = o.empirical_count;
        if (o.post_state)
            entry["post_state"] = matrix_to_json(o.post_state->matrix());
        else
            entry["post_state"] = nullptr;
        outcomes.push_back(std::move(entry));
    }
    return {{"shots", r.shots}, {"outcomes", std::move(outcomes)}};
}

inline std::string report_to_csv(const OutcomeReport& r) {
    std::ostringstream out;
    out << "outcome_label,exact_p,empirical_count,shots\n";
    for (const auto& o : r.outcomes) {
        out << o.label << ',' << format_real(o.exact_probability) << ',';
        if (r.shots > 0) out << o.empirical_count;
        out << ',' << r.shots << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// files

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline Povm load_povm(const std::string& path, double tol = default_tol<double>) {
    return validate_povm(effects_from_json(read_json_file(path)), tol);
}

inline State load_state(const std::string& path) {
    return state_from_json(read_json_file(path));
}

} // namespace povmseq
