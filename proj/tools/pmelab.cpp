// Scenario runner: one subcommand per operation, plus `run` and `list`.
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pmelab/scenario.hpp"

using namespace pmelab;

namespace {

struct Common {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> resolution;
    int threads = 1;
    bool quiet = false;
};

struct BarrierFlags {
    std::string kind;
    std::vector<double> c;
    std::vector<long> j;
    double m = 2.0, diam = 0.0, alpha = 0.0, gamma = 0.0, t0 = 0.0;
    int n = 2;
    std::vector<double> x0;
    std::string expect = "pass";
    int jitter = 10;
};

void add_common(CLI::App* app, Common& c, bool scenario_required) {
    auto* s = app->add_option("--scenario", c.scenario, "scenario file or bundled scenario name");
    if (scenario_required) s->required();
    app->add_option("--out", c.out, "output directory (default: $PMELAB_OUT, then the scenario's 'output')");
    app->add_option("--seed", c.seed, "override the scenario seed");
    app->add_option("--threads", c.threads, "worker threads for independent runs")->check(CLI::PositiveNumber);
    app->add_option("--resolution", c.resolution, "override the grid resolution (cells per unit length)")
        ->check(CLI::Range(2, 1 << 16));
    app->add_flag("-q,--quiet", c.quiet, "print only the final status line");
}

// Scenario built from verify-barrier flags: default square cylinder (-1/2,1/2)^2 x (0,1].
json barrier_scenario(const BarrierFlags& f) {
    json b = {{"kind", f.kind}, {"c", f.c.empty() ? std::vector<double>{1.0} : f.c}, {"m", f.m}, {"n", f.n},
              {"expect", f.expect}, {"t0", f.t0}};
    if (!f.j.empty()) b["j"] = f.j;
    if (f.diam > 0.0) b["diam"] = f.diam;
    if (f.alpha > 0.0) b["alpha"] = f.alpha;
    if (f.gamma > 0.0) b["gamma"] = f.gamma;
    if (!f.x0.empty()) b["x0"] = f.x0;
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < f.n; ++a) {
        lo.push_back(-0.5);
        hi.push_back(0.5);
    }
    return {{"name", "verify-barrier"},
            {"description", "sign check of one barrier family from command-line flags"},
            {"resolution", 16},
            {"domain",
             {{"n", f.n},
              {"time", {{"t0", 0.0}, {"t_end", 1.0}, {"steps", 16}}},
              {"cylinders", json::array({{{"base", {{"type", "box"}, {"lo", lo}, {"hi", hi}}}, {"t1", 0.0}, {"t2", 1.0}}})}}},
            {"operation",
             {{"type", "verify-barrier"},
              {"barriers", json::array({b})},
              {"sampling", {{"jitter_per_node", f.jitter}}}}}};
}

int execute(const Common& c, const std::string& required_op, const std::optional<json>& inline_scenario) {
    try {
        Scenario s = inline_scenario ? parse_scenario(*inline_scenario) : load_scenario(c.scenario);
        if (!required_op.empty() && s.operation != required_op)
            throw ScenarioError("operation.type", "subcommand '" + required_op + "' needs a '" + required_op +
                                                      "' scenario, got '" + s.operation + "'");
        std::string base = c.out;
        if (base.empty())
            if (const char* env = std::getenv("PMELAB_OUT")) base = env;
        if (base.empty()) base = s.output;
        RunOptions opt;
        if (!base.empty()) opt.out_dir = (std::filesystem::path(base) / s.name).string();
        opt.seed = c.seed;
        opt.resolution = c.resolution;
        opt.threads = c.threads;
        RunReport r = run_scenario(s, opt);
        if (!c.quiet) {
            for (const auto& ch : r.checks)
                std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
            if (!opt.out_dir.empty()) std::cout << "report: " << opt.out_dir << "/report.json\n";
            else std::cout << r.to_json().dump(2) << "\n";
        }
        std::cout << s.name << ": " << (r.passed() ? "passed" : "FAILED") << " (" << r.checks.size() << " checks)\n";
        return r.passed() ? 0 : 1;
    } catch (const ScenarioError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Porous medium equation experiments on unions of space-time cylinders"};
    app.require_subcommand(1);

    Common run_c;
    auto* run = app.add_subcommand("run", "run any scenario");
    add_common(run, run_c, true);

    auto* list = app.add_subcommand("list", "list the bundled scenarios");

    std::vector<std::pair<CLI::App*, std::string>> ops;
    std::vector<Common> op_c(operation_names().size());
    BarrierFlags bf;
    CLI::App* barrier_app = nullptr;
    for (std::size_t i = 0; i < operation_names().size(); ++i) {
        const std::string& name = operation_names()[i];
        auto* sub = app.add_subcommand(name, "run a '" + name + "' scenario");
        add_common(sub, op_c[i], name != "verify-barrier");
        if (name == "verify-barrier") {
            barrier_app = sub;
            sub->add_option("--kind", bf.kind, "barrier family (used when no --scenario is given)");
            sub->add_option("--c", bf.c, "values of c")->delimiter(',');
            sub->add_option("--j", bf.j, "values of j (default: smallest valid j)")->delimiter(',');
            sub->add_option("--m", bf.m, "exponent m");
            sub->add_option("--n", bf.n, "space dimension")->check(CLI::Range(1, 3));
            sub->add_option("--diam", bf.diam, "diameter parameter (default: domain diameter)");
            sub->add_option("--alpha", bf.alpha);
            sub->add_option("--gamma", bf.gamma);
            sub->add_option("--x0", bf.x0, "anchor point")->delimiter(',');
            sub->add_option("--t0", bf.t0, "anchor time");
            sub->add_option("--expect", bf.expect, "pass, violation or violation-if-insufficient");
            sub->add_option("--jitter", bf.jitter, "jittered samples per node");
        }
        ops.emplace_back(sub, name);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        try {
            for (const auto& [name, desc] : list_bundled()) std::cout << name << "\t" << desc << "\n";
        } catch (const std::exception& e) {
            std::cerr << "input error: " << e.what() << "\n";
            return 2;
        }
        return 0;
    }
    if (run->parsed()) return execute(run_c, "", std::nullopt);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (!ops[i].first->parsed()) continue;
        std::optional<json> inline_s;
        if (ops[i].first == barrier_app && op_c[i].scenario.empty()) {
            if (bf.kind.empty()) {
                std::cerr << "input error: verify-barrier needs --scenario or --kind\n";
                return 2;
            }
            inline_s = barrier_scenario(bf);
        }
        return execute(op_c[i], ops[i].second, inline_s);
    }
    return 2;
}
