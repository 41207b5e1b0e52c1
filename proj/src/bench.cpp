#include "lamfab/bench.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace lamfab {

const char* bus_mode_name(BusMode m) {
    return m == BusMode::PaperFaithful ? "paper_faithful" : "dedicated_depth";
}

std::optional<BusMode> parse_bus_mode(const std::string& text) {
    if (text == "paper_faithful" || text == "paper-faithful") return BusMode::PaperFaithful;
    if (text == "dedicated_depth" || text == "dedicated-depth") return BusMode::DedicatedDepth;
    return std::nullopt;
}

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw BenchError(name + ":" + std::to_string(line) + ": " + msg);
}

} // namespace

std::vector<BenchCase> load_bench(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BenchError("cannot open bench file: " + path);
    return load_bench(in, path);
}

std::vector<BenchCase> load_bench(std::istream& in, const std::string& name) {
    std::vector<BenchCase> out;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = strip(raw);
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '|')) fields.push_back(strip(field));
        if (fields.empty() || fields[0].empty()) fail(name, lineno, "missing expression");

        BenchCase c;
        c.expression = fields[0];
        c.line = lineno;
        for (size_t i = 1; i < fields.size(); ++i) {
            std::istringstream fs(fields[i]);
            std::string key, value;
            fs >> key;
            std::getline(fs, value);
            value = strip(value);
            if (value.empty()) fail(name, lineno, "field '" + key + "' has no value");
            try {
                if (key == "depth") c.depth = std::stoi(value);
                else if (key == "expect") c.expect = value;
                else if (key == "nodes") c.nodes = std::stoi(value);
                else if (key == "ticks") c.ticks = std::stol(value);
                else if (key == "mode") {
                    const auto m = parse_bus_mode(value);
                    if (!m) fail(name, lineno, "unknown mode: " + value);
                    c.mode = m;
                } else {
                    fail(name, lineno, "unknown field: " + key);
                }
            } catch (const BenchError&) {
                throw;
            } catch (const std::exception&) {
                fail(name, lineno, "bad value for '" + key + "': " + value);
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

CaseReport run_case(const BenchCase& c, const ClusterConfig& base) {
    CaseReport r;
    r.def = c;

    ClusterConfig cfg = base;
    cfg.activated_depth = c.depth;
    cfg.depth_origin = DepthOrigin::Innermost;
    if (c.mode) cfg.mode = *c.mode;

    TermPtr term;
    try {
        term = parse(c.expression, cfg.value_width);
    } catch (const ParseError& e) {
        r.status = "parse-error";
        r.error = e.what();
        return r;
    }
    r.compiled_nodes = count_nodes(term);

    try {
        r.alt_nodes = alt_node_count(term);
    } catch (const EvalError&) {
        r.alt_nodes = std::nullopt; // no Church form for this expression
    }

    TermPtr oracle_term;
    try {
        EvalConfig ecfg;
        ecfg.value_width = cfg.value_width;
        ecfg.activated_depth = c.depth;
        ecfg.depth_origin = DepthOrigin::Innermost;
        const EvalResult er = reduce(term, ecfg);
        oracle_term = er.normal_form;
        r.oracle_suspended = er.suspended;
        r.oracle_result = print(oracle_term);
    } catch (const EvalError& e) {
        r.status = "oracle-error";
        r.error = e.what();
        return r;
    }

    RunResult run;
    try {
        run = run_term(term, cfg);
    } catch (const GraphError& e) {
        r.status = "setup-error";
        r.error = e.what();
        return r;
    }
    r.status = run_status_name(run.status);
    r.ticks = run.ticks;
    r.peak_nodes = run.peak_nodes;
    r.collisions = run.collision_log.size();
    if (run.final_term) r.sim_result = print(run.final_term);

    const bool resolved_ok = run.status == RunStatus::Resolved ||
                             (run.status == RunStatus::Suspended && r.oracle_suspended);
    r.oracle_match = resolved_ok && run.final_term && alpha_equal(run.final_term, oracle_term);
    if (c.expect) {
        try {
            const TermPtr want = parse(*c.expect, cfg.value_width);
            r.expect_match = run.final_term && alpha_equal(run.final_term, want);
        } catch (const ParseError& e) {
            r.expect_match = false;
            r.error = std::string("bad expectation: ") + e.what();
        }
    }
    if (c.nodes) r.nodes_match = (r.compiled_nodes == *c.nodes);
    if (c.ticks) r.ticks_match = (r.ticks <= r.tick_budget());
    r.match = r.oracle_match && r.expect_match && r.nodes_match && r.ticks_match;
    return r;
}

BenchReport run_bench(const std::vector<BenchCase>& cases, const ClusterConfig& base) {
    BenchReport rep;
    for (const BenchCase& c : cases) {
        rep.cases.push_back(run_case(c, base));
        rep.all_match = rep.all_match && rep.cases.back().match;
    }
    return rep;
}

std::string render_table(const BenchReport& r) {
    std::ostringstream os;
    os << std::left << std::setw(44) << "expression" << std::setw(7) << "depth" << std::setw(7) << "nodes"
       << std::setw(7) << "ticks" << std::setw(6) << "peak" << std::setw(10) << "alt" << std::setw(18)
       << "result" << std::setw(18) << "oracle" << std::setw(12) << "status" << "match\n";
    for (const CaseReport& c : r.cases) {
        os << std::left << std::setw(44) << c.def.expression.substr(0, 43)
           << std::setw(7) << (c.def.depth ? std::to_string(*c.def.depth) : "-")
           << std::setw(7) << c.compiled_nodes
           << std::setw(7) << c.ticks
           << std::setw(6) << c.peak_nodes
           << std::setw(10) << (c.alt_nodes ? std::to_string(*c.alt_nodes) : "-")
           << std::setw(18) << c.sim_result.substr(0, 17)
           << std::setw(18) << c.oracle_result.substr(0, 17)
           << std::setw(12) << c.status
           << (c.match ? "yes" : "NO") << '\n';
        if (!c.error.empty()) os << "    ! " << c.error << '\n';
    }
    os << (r.all_match ? "all cases match\n" : "some cases FAILED\n");
    return os.str();
}

std::string render_json(const BenchReport& r) {
    nlohmann::json doc;
    doc["all_match"] = r.all_match;
    doc["cases"] = nlohmann::json::array();
    for (const CaseReport& c : r.cases) {
        nlohmann::json j;
        j["expression"] = c.def.expression;
        if (c.def.depth) j["depth"] = *c.def.depth;
        if (c.def.expect) j["expect"] = *c.def.expect;
        if (c.def.mode) j["mode"] = bus_mode_name(*c.def.mode);
        j["nodes"] = c.compiled_nodes;
        j["ticks"] = c.ticks;
        j["peak_nodes"] = c.peak_nodes;
        if (c.alt_nodes) j["alt_nodes"] = *c.alt_nodes;
        j["result"] = c.sim_result;
        j["oracle"] = c.oracle_result;
        j["status"] = c.status;
        j["collisions"] = c.collisions;
        j["oracle_match"] = c.oracle_match;
        j["expect_match"] = c.expect_match;
        j["nodes_match"] = c.nodes_match;
        j["ticks_match"] = c.ticks_match;
        j["match"] = c.match;
        if (!c.error.empty()) j["error"] = c.error;
        doc["cases"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

} // namespace lamfab
