// Integration gate: nine checks, one PASS/FAIL line each, non-zero exit when
// anything fails. Each check exercises the stack end to end, with the
// reference evaluator and brute-force models as the independent judges.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gen.hpp"
#include "lamfab/bench.hpp"

using namespace lamfab;

namespace {

int failures = 0;
std::vector<std::string> notes;

void note(std::string s) { notes.push_back(std::move(s)); }

void criterion(int id, const char* name, const std::function<bool()>& body) {
    notes.clear();
    bool ok = false;
    std::string blew_up;
    try {
        ok = body();
    } catch (const std::exception& e) {
        blew_up = e.what();
    }
    if (!ok) ++failures;
    std::printf("%s  %d  %s\n", ok ? "PASS" : "FAIL", id, name);
    if (!blew_up.empty()) std::printf("      unexpected exception: %s\n", blew_up.c_str());
    for (const std::string& n : notes) std::printf("      %s\n", n.c_str());
    std::fflush(stdout);
}

std::vector<BenchCase> table_cases() {
    return load_bench(std::string(LAMFAB_DATA_DIR) + "/table3.bench");
}

RunResult run_one(const std::string& expr, std::optional<int> depth, BusMode mode,
                  bool trace = false, ClusterState* out = nullptr) {
    ClusterConfig cfg;
    cfg.activated_depth = depth;
    cfg.mode = mode;
    cfg.trace = trace;
    ClusterState s = make_cluster(compile(parse(expr), cfg));
    RunResult r = run(s);
    if (out) *out = std::move(s);
    return r;
}

// ---------------------------------------------------------------------------

bool results_match_the_table() {
    const auto t0 = std::chrono::steady_clock::now();
    const BenchReport rep = run_bench(table_cases(), ClusterConfig{});
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool ok = rep.cases.size() == 15;
    for (const CaseReport& c : rep.cases) {
        if (c.status != "resolved" || !c.expect_match || !c.oracle_match) {
            ok = false;
            note("row " + std::to_string(c.def.line) + " (" + c.def.expression + "): status " +
                 c.status + ", got " + c.sim_result + ", want " + *c.def.expect);
        }
    }
    note("15 rows in " + std::to_string(secs) + " s");
    if (secs >= 5.0) {
        ok = false;
        note("exceeded the 5 s budget");
    }
    return ok;
}

bool node_counts_match_the_table() {
    bool ok = true;
    int row = 0;
    for (const BenchCase& c : table_cases()) {
        ++row;
        const int got = count_nodes(parse(c.expression));
        if (got != *c.nodes) {
            ok = false;
            note("row " + std::to_string(row) + ": " + std::to_string(got) + " nodes, table says " +
                 std::to_string(*c.nodes));
        }
        if (row == 2 && got != 7) {
            ok = false;
            note("row 2 must cost 7 nodes here (5 is only reachable by sharing leaves)");
        }
    }
    note("row 2: 7 nodes without leaf sharing (a shared-leaf layout reaches the quoted 5)");

    const int inc = count_nodes(parse("(λn.(λf.(λx.f((n f) x)))) (λf.(λx.f x))"));
    note("increment expression: " + std::to_string(inc) + " nodes");
    if (inc != 21) {
        ok = false;
        note("expected exactly 21");
    }
    return ok;
}

bool ticks_inside_the_envelope() {
    bool ok = true;
    const BenchReport rep = run_bench(table_cases(), ClusterConfig{});
    long worst_base = 0, worst_actual = 0;
    for (const CaseReport& c : rep.cases) {
        if (!c.ticks_match || c.ticks > 1000) {
            ok = false;
            note(c.def.expression + ": " + std::to_string(c.ticks) + " ticks, budget " +
                 std::to_string(c.tick_budget()));
        }
        // keep the row with the highest ticks/budget ratio
        if (c.ticks * worst_base > worst_actual * *c.def.ticks) {
            worst_actual = c.ticks;
            worst_base = *c.def.ticks;
        } else if (worst_base == 0) {
            worst_actual = c.ticks;
            worst_base = *c.def.ticks;
        }
    }
    note("tightest row: " + std::to_string(worst_actual) + " ticks against a 4x envelope of " +
         std::to_string(4 * worst_base));

    // Determinism: repeated runs produce bit-identical bus traces.
    const struct { const char* expr; std::optional<int> depth; } probes[] = {
        {"(δ+ (δ+ 1.1).(δ+ 1.1))", std::nullopt},
        {"(λf.f)(γ(δ+ 3.3).(γ(δ* 3.3).0))", 0},
        {"(γ(λf.f).(γ(λf.e).0)) a", 0},
    };
    for (const auto& p : probes) {
        ClusterState a, b;
        RunResult ra = run_one(p.expr, p.depth, BusMode::DedicatedDepth, true, &a);
        RunResult rb = run_one(p.expr, p.depth, BusMode::DedicatedDepth, true, &b);
        if (ra.ticks != rb.ticks || a.trace != b.trace) {
            ok = false;
            note(std::string("trace diverged across runs for ") + p.expr);
        }
    }
    return ok;
}

bool random_terms_agree_with_the_evaluator() {
    testgen::Gen gen(20260813);
    int resolved = 0, mismatches = 0, other = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto [term, depth] = gen.next();
        ClusterConfig cfg;
        cfg.activated_depth = depth;
        const RunResult r = run_term(term, cfg);
        if (r.status != RunStatus::Resolved) {
            ++other;
            continue;
        }
        ++resolved;
        EvalConfig ecfg;
        ecfg.activated_depth = depth;
        TermPtr want;
        try {
            want = reduce(term, ecfg).normal_form;
        } catch (const EvalError&) {
            ++mismatches;
            note("fabric resolved what the evaluator rejects: " + print(term));
            continue;
        }
        if (!r.final_term || !alpha_equal(r.final_term, want)) {
            ++mismatches;
            if (mismatches <= 5)
                note("mismatch on " + print(term) + ": fabric " +
                     (r.final_term ? print(r.final_term) : "<none>") + ", evaluator " + print(want));
        }
    }
    note(std::to_string(resolved) + "/1000 resolved, " + std::to_string(other) +
         " stalled or suspended, " + std::to_string(mismatches) + " mismatches");
    if (resolved < 600) {
        note("too few resolved runs for the property to mean anything");
        return false;
    }
    return mismatches == 0;
}

bool alu_is_exhaustively_correct() {
    bool ok = true;
    for (int a = -8; a <= 7; ++a) {
        for (int b = -8; b <= 7; ++b) {
            if (alu_compute(AluOp::Add, a, b, 4).value != wrap_value(static_cast<long long>(a) + b, 4))
                ok = false;
            if (alu_compute(AluOp::Mult, a, b, 4).value != wrap_value(static_cast<long long>(a) * b, 4))
                ok = false;
        }
    }
    note("256/256 add and mult pairs at width 4");

    for (int v = -8; v <= 7; ++v) {
        const int hits = (alu_compute(AluOp::CmpGT0, v, 0, 4).truth ? 1 : 0) +
                         (alu_compute(AluOp::CmpLT0, v, 0, 4).truth ? 1 : 0) +
                         (alu_compute(AluOp::CmpEQ0, v, 0, 4).truth ? 1 : 0);
        if (hits != 1) {
            ok = false;
            note("trichotomy broken at " + std::to_string(v));
        }
    }

    for (int len = 1; len <= 16; ++len) {
        AluState alu;
        for (int i = 1; i <= len; ++i) {
            if (!alu.request({static_cast<uint16_t>(i), i, 0, AluOp::Add})) ok = false;
            alu.alu_tick(); // arrival tick defers service
        }
        for (int expect = len; expect >= 1; --expect) {
            const auto r = alu.alu_tick();
            if (!r || r->uni != expect) {
                ok = false;
                note("LIFO broken at queue length " + std::to_string(len));
                break;
            }
        }
    }
    note("LIFO service order for queue lengths 1..16");
    return ok;
}

bool depth_alias_reproduced_and_fixed() {
    const std::string expr = "(γ(λf.f).(γ(λf.e).0)) a";
    bool ok = true;

    const RunResult faithful = run_one(expr, 0, BusMode::PaperFaithful);
    if (faithful.status != RunStatus::Resolved || print(faithful.final_term) != "e") {
        ok = false;
        note("shared layout: wrong result or status");
    }
    bool aliased = false;
    for (const std::string& line : faithful.collision_log)
        if (line.find("ReturnExpression") != std::string::npos) {
            aliased = true;
            note(line);
        }
    if (!aliased) {
        ok = false;
        note("shared layout never logged the depth-as-ReturnExpression misread");
    }

    const RunResult fixed = run_one(expr, 0, BusMode::DedicatedDepth);
    if (fixed.status != RunStatus::Resolved || print(fixed.final_term) != "e" ||
        !fixed.collision_log.empty()) {
        ok = false;
        note("dedicated layout should resolve to e with a clean log");
    } else {
        note("dedicated depth field: clean readback, same result");
    }

    // the other activation depth stays clean in both layouts
    for (const BusMode m : {BusMode::PaperFaithful, BusMode::DedicatedDepth}) {
        const RunResult r = run_one(expr, 1, m);
        if (r.status != RunStatus::Resolved || print(r.final_term) != "a") ok = false;
    }
    return ok;
}

bool branch_size_does_not_delay_comparison() {
    const RunResult small = run_one("(δ> a.b) 1", std::nullopt, BusMode::DedicatedDepth);
    const RunResult large =
        run_one("(δ> a.(γ c.(γ (δ+ 4.d).∅))) 1", std::nullopt, BusMode::DedicatedDepth);
    note("single-name branch: " + std::to_string(small.ticks) + " ticks; 6-node unresolved branch: " +
         std::to_string(large.ticks) + " ticks");
    return small.status == RunStatus::Resolved && large.status == RunStatus::Resolved &&
           print(small.final_term) == "a" && print(large.final_term) == "a" &&
           small.ticks == large.ticks;
}

bool list_machine_behaves() {
    bool ok = true;

    // Activation sequences: at most one active cell, exactly at the asked depth.
    for (int len = 1; len <= 5; ++len) {
        TermPtr chain = null_tail();
        for (int i = 0; i < len; ++i)
            chain = list_cell(name_sym(std::string(1, static_cast<char>('a' + i))), chain);
        ClusterState s = make_cluster(compile(chain, ClusterConfig{}));
        for (const int d : {0, len - 1, 1, len, 7, 0}) {
            inject(s, InstructionFrame{Opcode::ActivateDepth, d, d});
            for (int i = 0; i < 4 * len + 8; ++i) tick(s);
            int active = 0, at = -1;
            for (const auto& n : s.graph.nodes)
                if (n.kind == ExpKind::List && n.rsf) {
                    ++active;
                    at = list_depth(s.graph, n.uni);
                }
            const bool valid = d >= 0 && d < len;
            if (active != (valid ? 1 : 0) || (valid && at != d)) {
                ok = false;
                note("chain " + std::to_string(len) + ", depth " + std::to_string(d) + ": " +
                     std::to_string(active) + " active cells");
            }
        }
    }
    note("activation invariant over chains 1..5");

    // Insert a bottom cell, then remove it: structurally the original chain.
    {
        ClusterState s = make_cluster(compile(parse("(γa.(γb.∅))"), ClusterConfig{}));
        const TermPtr before = readback_static(s.graph);
        const uint16_t item = s.graph.allocate();
        s.graph.at(item).kind = ExpKind::Name;
        s.graph.at(item).sym = true;
        s.graph.at(item).payload = s.graph.symbol_id("c");
        s.graph.at(item).rsf = true;
        ExpressionFrame cell{};
        cell.kind = ExpKind::List;
        cell.clp = item;
        inject(s, InstructionFrame{Opcode::AddBottomNode, 0}, cell);
        for (int i = 0; i < 20; ++i) tick(s);
        if (!structurally_equal(readback_static(s.graph), parse("(γa.(γb.(γc.∅)))"))) {
            ok = false;
            note("bottom insertion produced the wrong chain");
        }
        inject(s, InstructionFrame{Opcode::RemoveBottomNode, 0});
        for (int i = 0; i < 20; ++i) tick(s);
        if (!structurally_equal(readback_static(s.graph), before) || !s.collision_log.empty()) {
            ok = false;
            note("insertion followed by removal did not restore the chain");
        } else {
            note("bottom insertion + removal restores the chain");
        }
    }

    // An activation depth no cell answers suspends the whole run.
    const RunResult r = run_one("(λf.f)(γ a.(γ b.0))", 7, BusMode::DedicatedDepth);
    if (r.status != RunStatus::Suspended) {
        ok = false;
        note("invalid depth ended with status " + std::string(run_status_name(r.status)));
    } else {
        note("invalid depth suspends");
    }
    return ok;
}

bool church_encodings_cross_validate() {
    bool ok = true;
    for (int m = 0; m <= 6; ++m) {
        for (int n = 0; n <= 6; ++n) {
            const TermPtr sum =
                reduce(church_expand(arith(ArithOp::Add, name_num(m), name_num(n)))).normal_form;
            if (!alpha_equal(sum, church_expand(name_num(m + n)))) {
                ok = false;
                note("plus broke at " + std::to_string(m) + "+" + std::to_string(n));
            }
            const TermPtr prod =
                reduce(church_expand(arith(ArithOp::Mult, name_num(m), name_num(n)))).normal_form;
            if (!alpha_equal(prod, church_expand(name_num(m * n)))) {
                ok = false;
                note("times broke at " + std::to_string(m) + "*" + std::to_string(n));
            }
        }
    }
    note("m,n in 0..6: numeral add and mult both agree with the evaluator");

    // Report-only: expansion costs next to the table's direct costs.
    int row = 0;
    for (const BenchCase& c : table_cases()) {
        ++row;
        if (row > 3) break;
        note("row " + std::to_string(row) + ": direct " + std::to_string(*c.nodes) + " nodes, expanded " +
             std::to_string(alt_node_count(parse(c.expression))) + " nodes");
    }
    const TermPtr big = arith(ArithOp::Add, name_num(127), name_num(127));
    note("127+127 expands to " + std::to_string(alt_node_count(big)) +
         " nodes here (cf. 1041 for a less compact encoding)");
    return ok;
}

} // namespace

int main() {
    std::printf("acceptance: graph-reduction fabric against its reference models\n");
    criterion(1, "all reference-table rows resolve to their expected results", results_match_the_table);
    criterion(2, "compiled node counts match the table (21-node increment included)", node_counts_match_the_table);
    criterion(3, "ticks stay inside the 4x envelope and runs are deterministic", ticks_inside_the_envelope);
    criterion(4, "1000 random terms: every resolved run matches the evaluator", random_terms_agree_with_the_evaluator);
    criterion(5, "ALU exhaustive at width 4, trichotomy, LIFO service order", alu_is_exhaustively_correct);
    criterion(6, "shared-bus depth alias reproduced; dedicated field reads clean", depth_alias_reproduced_and_fixed);
    criterion(7, "comparison latency independent of the losing branch size", branch_size_does_not_delay_comparison);
    criterion(8, "list activation, bottom insert/remove and suspension behave", list_machine_behaves);
    criterion(9, "Church encodings cross-validate; expansion costs reported", church_encodings_cross_validate);

    if (failures) {
        std::printf("%d of 9 criteria FAILED\n", failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
