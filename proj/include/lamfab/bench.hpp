#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lamfab/machine.hpp"

namespace lamfab {

class BenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchCase {
    std::string expression;
    std::optional<int> depth; // structural: 0 = innermost cell
    std::optional<std::string> expect;
    std::optional<int> nodes;
    std::optional<long> ticks; // envelope base: actual must be <= 4x this
    std::optional<BusMode> mode;
    int line = 0;
};

// Line format: `expr | depth D | expect R | nodes N | ticks T | mode M`.
// Everything after the expression is optional; `#` starts a comment.
std::vector<BenchCase> load_bench(const std::string& path);
std::vector<BenchCase> load_bench(std::istream& in, const std::string& name);

struct CaseReport {
    BenchCase def;
    std::string status;     // run status, or parse-error / setup-error
    std::string error;      // populated for setup failures
    int compiled_nodes = 0;
    std::string sim_result;
    std::string oracle_result;
    bool oracle_suspended = false;
    long ticks = 0;
    int peak_nodes = 0;
    std::optional<int> alt_nodes; // Church-expanded cost, when the form has one
    size_t collisions = 0;
    bool oracle_match = false;
    bool expect_match = true;
    bool nodes_match = true;
    bool ticks_match = true;
    bool match = false; // everything above at once

    long tick_budget() const { return def.ticks ? *def.ticks * 4 : -1; }
};

struct BenchReport {
    std::vector<CaseReport> cases;
    bool all_match = true;
};

CaseReport run_case(const BenchCase& c, const ClusterConfig& base);
BenchReport run_bench(const std::vector<BenchCase>& cases, const ClusterConfig& base);

std::string render_table(const BenchReport& r);
std::string render_json(const BenchReport& r);

const char* bus_mode_name(BusMode m);
std::optional<BusMode> parse_bus_mode(const std::string& text);

} // namespace lamfab
