// Command-line front end: validate POVM documents, plan measurement trees,
// run exact or sampled simulations, and sweep the two-state discrimination
// scenarios. Exit codes: 0 success, 1 domain violation, 2 I/O or parse error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "povmseq/io.hpp"
#include "povmseq/usd.hpp"

namespace {

using namespace povmseq;

struct GlobalOptions {
    double tol = default_tol<double>;
    std::string out_path;
    std::string format = "csv";
};

void write_output(const GlobalOptions& g, const std::string& content) {
    if (g.out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(g.out_path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + g.out_path);
    out << content;
}

MeasurementTree plan_by_strategy(const Povm& p, const std::string& strategy) {
    if (strategy == "outcome-decreasing") return plan_outcome_decreasing(p);
    return plan_binary_search(p);
}

int cmd_validate(const GlobalOptions& g, const std::string& povm_file) {
    auto effects = effects_from_json(read_json_file(povm_file));
    auto violations = check_povm(effects, g.tol);
    if (violations.empty()) {
        std::cout << "ok: " << effects.size() << " effects on dimension "
                  << effects.front().dim() << "\n";
        return 0;
    }
    for (const auto& v : violations) std::cerr << v.message << "\n";
    return 1;
}

int cmd_plan(const GlobalOptions& g, const std::string& povm_file, const std::string& strategy) {
    Povm p = validate_povm(effects_from_json(read_json_file(povm_file)), g.tol);
    MeasurementTree t = plan_by_strategy(p, strategy);
    write_output(g, tree_to_json(t).dump(2) + "\n");
    return 0;
}

int cmd_simulate(const GlobalOptions& g, const std::string& povm_file,
                 const std::string& state_file, const std::string& strategy, long long shots,
                 std::uint64_t seed) {
    Povm p = validate_povm(effects_from_json(read_json_file(povm_file)), g.tol);
    State s = state_from_json(read_json_file(state_file));
    MeasurementTree t = plan_by_strategy(p, strategy);

    OutcomeReport report = shots > 0 ? sample(t, s, shots, seed) : execute_exact(t, s);
    TreeVerification check = verify_tree(t, p, 20, 1e-9, seed);

    if (g.format == "json") {
        json doc = report_to_json(report);
        doc["strategy"] = strategy;
        doc["verify_residual"] = check.max_deviation;
        doc["verify_pass"] = check.pass;
        write_output(g, doc.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "# verify_residual = " << format_real(check.max_deviation) << "\n";
        out << report_to_csv(report);
        write_output(g, out.str());
    }
    return 0;
}

int cmd_usd(const GlobalOptions& g, const std::vector<double>& omegas,
            const std::string& scenario, long long shots, std::uint64_t seed) {
    const UsdOrdering kind = scenario == "state-first" ? UsdOrdering::state_first
                                                       : UsdOrdering::conclusiveness_first;
    json rows = json::array();
    std::ostringstream csv;
    csv << "omega,scenario,input,outcome,exact_p,emp_freq,shots\n";

    std::size_t run_index = 0;
    for (double omega : omegas) {
        UsdScenario sc = detail::make_scenario(omega, kind);
        for (int which = 0; which < 2; ++which) {
            const Vec& psi = which == 0 ? sc.problem.psi1 : sc.problem.psi2;
            const std::string input = which == 0 ? "psi1" : "psi2";
            OutcomeReport report =
                shots > 0
                    ? sample(sc.tree, State(psi), shots, mix64(seed ^ mix64(run_index)))
                    : execute_exact(sc.tree, State(psi));
            ++run_index;
            for (const auto& o : report.outcomes) {
                csv << format_real(omega) << ',' << scenario << ',' << input << ','
                    << o.label << ',' << format_real(o.exact_probability) << ',';
                json row = {{"omega", omega},
                            {"scenario", scenario},
                            {"input", input},
                            {"outcome", o.label},
                            {"exact_p", o.exact_probability},
                            {"shots", shots}};
                if (shots > 0) {
                    const double freq =
                        static_cast<double>(o.empirical_count) / static_cast<double>(shots);
                    csv << format_real(freq);
                    row["emp_freq"] = freq;
                    row["count"] = o.empirical_count;
                }
                csv << ',' << (shots > 0 ? shots : 0) << '\n';
                rows.push_back(std::move(row));
            }
        }
    }
    if (g.format == "json")
        write_output(g, rows.dump(2) + "\n");
    else
        write_output(g, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Realize finite-outcome POVMs as sequences of two-outcome "
                 "ancilla-qubit measurements"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--tol", g.tol, "validation tolerance")->capture_default_str();
    app.add_option("--out", g.out_path, "write output to a file instead of stdout");
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    std::string povm_file, state_file;
    std::string strategy = "binary-search";
    std::string scenario = "conclusiveness-first";
    long long shots = 0;
    std::uint64_t seed = 12345;
    std::vector<double> omegas;

    CLI::App* validate = app.add_subcommand("validate", "check a POVM document");
    validate->fallthrough();
    validate->add_option("file", povm_file, "POVM JSON document")->required();

    CLI::App* plan = app.add_subcommand("plan", "build a measurement tree and print it");
    plan->fallthrough();
    plan->add_option("file", povm_file, "POVM JSON document")->required();
    plan->add_option("--strategy", strategy, "outcome-decreasing or binary-search")
        ->check(CLI::IsMember({"outcome-decreasing", "binary-search"}))
        ->capture_default_str();

    CLI::App* simulate = app.add_subcommand("simulate", "run a tree on a state");
    simulate->fallthrough();
    simulate->add_option("file", povm_file, "POVM JSON document")->required();
    simulate->add_option("--state", state_file, "state JSON document")->required();
    simulate->add_option("--strategy", strategy, "outcome-decreasing or binary-search")
        ->check(CLI::IsMember({"outcome-decreasing", "binary-search"}))
        ->capture_default_str();
    simulate->add_option("--shots", shots, "sample this many shots (0 = exact only)");
    simulate->add_option("--seed", seed, "sampling seed")->capture_default_str();

    CLI::App* usd = app.add_subcommand("usd", "two-state discrimination sweep");
    usd->fallthrough();
    usd->add_option("--omega", omegas, "angles in (0, pi/4], comma separated")
        ->required()
        ->delimiter(',');
    usd->add_option("--scenario", scenario, "conclusiveness-first or state-first")
        ->check(CLI::IsMember({"conclusiveness-first", "state-first"}))
        ->capture_default_str();
    usd->add_option("--shots", shots, "sample this many shots per input (0 = exact only)");
    usd->add_option("--seed", seed, "sampling seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(g, povm_file);
        if (plan->parsed()) return cmd_plan(g, povm_file, strategy);
        if (simulate->parsed())
            return cmd_simulate(g, povm_file, state_file, strategy, shots, seed);
        if (usd->parsed()) return cmd_usd(g, omegas, scenario, shots, seed);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
