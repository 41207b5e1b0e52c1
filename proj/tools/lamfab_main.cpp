#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lamfab/bench.hpp"

namespace {

struct CommonOpts {
    int depth = -1;
    std::string mode = "dedicated-depth";
    int cluster_size = 16;
    int value_width = 8;
    long max_ticks = 1000;
    bool trace = false;
    bool json = false;
    bool local_compare = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--depth", o.depth, "activated list depth (structural; 0 = innermost cell)");
    cmd->add_option("--mode", o.mode, "bus layout: paper-faithful or dedicated-depth")
        ->check(CLI::IsMember({"paper-faithful", "paper_faithful", "dedicated-depth", "dedicated_depth"}));
    cmd->add_option("--cluster-size", o.cluster_size, "nodes per cluster");
    cmd->add_option("--value-width", o.value_width, "payload width in bits");
    cmd->add_option("--max-ticks", o.max_ticks, "tick budget");
    cmd->add_flag("--trace", o.trace, "record bus traffic");
    cmd->add_flag("--json", o.json, "machine-readable output");
    cmd->add_flag("--local-compare", o.local_compare, "compare in the node instead of the shared unit");
}

lamfab::ClusterConfig to_config(const CommonOpts& o) {
    lamfab::ClusterConfig cfg;
    cfg.nodes_per_cluster = o.cluster_size;
    int width = 4;
    while ((1 << width) - 1 < o.cluster_size) ++width;
    cfg.id_width = width;
    cfg.value_width = o.value_width;
    cfg.max_ticks = o.max_ticks;
    cfg.trace = o.trace;
    cfg.local_compare = o.local_compare;
    if (o.depth >= 0) cfg.activated_depth = o.depth;
    cfg.mode = *lamfab::parse_bus_mode(o.mode);
    return cfg;
}

int cmd_run(const std::string& expr, const CommonOpts& o) {
    const lamfab::ClusterConfig cfg = to_config(o);
    const lamfab::TermPtr term = lamfab::parse(expr, cfg.value_width);
    lamfab::ClusterState s = lamfab::make_cluster(lamfab::compile(term, cfg));
    const lamfab::RunResult r = lamfab::run(s);

    lamfab::EvalConfig ecfg;
    ecfg.value_width = cfg.value_width;
    ecfg.activated_depth = cfg.activated_depth;
    const lamfab::EvalResult oracle = lamfab::reduce(term, ecfg);

    const bool match = r.final_term && lamfab::alpha_equal(r.final_term, oracle.normal_form);
    if (o.json) {
        lamfab::BenchReport rep;
        lamfab::BenchCase c;
        c.expression = expr;
        if (cfg.activated_depth) c.depth = cfg.activated_depth;
        lamfab::CaseReport cr = lamfab::run_case(c, cfg);
        rep.cases.push_back(cr);
        rep.all_match = cr.match;
        std::cout << lamfab::render_json(rep);
    } else {
        std::cout << "result: " << (r.final_term ? lamfab::print(r.final_term) : "<none>") << "\n"
                  << "oracle: " << lamfab::print(oracle.normal_form) << "\n"
                  << "status: " << lamfab::run_status_name(r.status) << "\n"
                  << "ticks: " << r.ticks << "\n"
                  << "nodes: " << lamfab::count_nodes(term) << " compiled, " << r.peak_nodes << " peak\n";
        for (const std::string& c : r.collision_log) std::cout << "collision: " << c << "\n";
        if (o.trace)
            for (const std::string& t : s.trace) std::cout << "trace: " << t << "\n";
        std::cout << (match ? "match\n" : "MISMATCH\n");
    }
    return match ? 0 : 1;
}

int cmd_bench(const std::string& path, const CommonOpts& o) {
    const lamfab::ClusterConfig cfg = to_config(o);
    const auto cases = lamfab::load_bench(path);
    const lamfab::BenchReport rep = lamfab::run_bench(cases, cfg);
    std::cout << (o.json ? lamfab::render_json(rep) : lamfab::render_table(rep));
    return rep.all_match ? 0 : 1;
}

int cmd_oracle(const std::string& expr, const CommonOpts& o) {
    lamfab::EvalConfig ecfg;
    ecfg.value_width = o.value_width;
    if (o.depth >= 0) ecfg.activated_depth = o.depth;
    const lamfab::EvalResult r = lamfab::reduce(lamfab::parse(expr, o.value_width), ecfg);
    std::cout << lamfab::print(r.normal_form) << "\n";
    if (r.suspended) std::cout << "suspended\n";
    return 0;
}

int cmd_expand(const std::string& expr, const CommonOpts& o) {
    const lamfab::TermPtr term = lamfab::parse(expr, o.value_width);
    const lamfab::TermPtr expanded = lamfab::church_expand(term);
    std::cout << lamfab::print(expanded) << "\n"
              << "nodes: " << lamfab::count_nodes(term) << "\n"
              << "alt nodes: " << lamfab::count_nodes(expanded) << "\n";
    return 0;
}

int cmd_dump(const std::string& expr, const CommonOpts& o) {
    const lamfab::ClusterConfig cfg = to_config(o);
    std::cout << lamfab::dump(lamfab::compile(lamfab::parse(expr, cfg.value_width), cfg));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parallel graph-reduction fabric simulator"};
    app.require_subcommand(1);

    std::string expr, path;
    CommonOpts run_o, bench_o, oracle_o, expand_o, dump_o;

    CLI::App* c_run = app.add_subcommand("run", "compile, simulate and cross-check one expression");
    c_run->add_option("expr", expr, "expression")->required();
    add_common(c_run, run_o);

    CLI::App* c_bench = app.add_subcommand("bench", "run every case in a bench file");
    c_bench->add_option("file", path, "bench file")->required();
    add_common(c_bench, bench_o);

    CLI::App* c_oracle = app.add_subcommand("oracle", "reference evaluator only");
    c_oracle->add_option("expr", expr, "expression")->required();
    add_common(c_oracle, oracle_o);

    CLI::App* c_expand = app.add_subcommand("expand", "Church expansion and its node cost");
    c_expand->add_option("expr", expr, "expression")->required();
    add_common(c_expand, expand_o);

    CLI::App* c_dump = app.add_subcommand("dump", "compiled node table");
    c_dump->add_option("expr", expr, "expression")->required();
    add_common(c_dump, dump_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_run->parsed()) return cmd_run(expr, run_o);
        if (c_bench->parsed()) return cmd_bench(path, bench_o);
        if (c_oracle->parsed()) return cmd_oracle(expr, oracle_o);
        if (c_expand->parsed()) return cmd_expand(expr, expand_o);
        if (c_dump->parsed()) return cmd_dump(expr, dump_o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
