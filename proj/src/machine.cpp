#include "lamfab/machine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace lamfab {

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::None: return "None";
        case Opcode::ActivateDepth: return "ActivateDepth";
        case Opcode::ReturnExpression: return "ReturnExpression";
        case Opcode::UpdateDepth: return "UpdateDepth";
        case Opcode::AddBottomNode: return "AddBottomNode";
        case Opcode::RemoveBottomNode: return "RemoveBottomNode";
        case Opcode::Nullification: return "Nullification";
        case Opcode::UpdateExpression: return "UpdateExpression";
        case Opcode::UpdateChildLeft: return "UpdateChildLeft";
        case Opcode::UpdateChildRight: return "UpdateChildRight";
        case Opcode::CompareValue: return "CompareValue";
        case Opcode::DescendantTransformation: return "DescendantTransformation";
        case Opcode::AncestorTransformation: return "AncestorTransformation";
        case Opcode::ImmediateResolution: return "ImmediateResolution";
    }
    return "?";
}

const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Resolved: return "resolved";
        case RunStatus::Suspended: return "suspended";
        case RunStatus::Collision: return "collision";
        case RunStatus::BudgetExhausted: return "budget_exhausted";
    }
    return "?";
}

int list_depth(const NodeGraph& g, uint16_t cell) {
    int d = 0;
    std::set<uint16_t> seen;
    uint16_t u = cell;
    while (g.live(u) && g.at(u).kind == ExpKind::List && seen.insert(u).second) {
        const uint16_t tail = g.at(u).crp;
        if (!g.live(tail) || g.at(tail).kind != ExpKind::List) break;
        ++d;
        u = tail;
    }
    return d;
}

EdgeOutputs default_outputs(const NodeState& n, const EdgeInputs& in, int own_depth, BusMode mode) {
    EdgeOutputs out{};
    ExpressionFrame self{};
    self.rsf = n.rsf;
    self.rdf = n.rdf;
    self.kind = n.kind;
    self.sym = n.sym;
    self.payload = n.payload;
    self.clp = n.clp;
    self.crp = n.crp;

    switch (n.kind) {
        case ExpKind::List:
            // Bridging: the cell connects its parent to whichever side its
            // activity selects, and reports its depth upward. With the
            // shared layout that depth rides the instruction key field.
            if (n.rsf) {
                out.peb = in.cle;
                out.cli = in.pib;
                out.cle = in.peb;
            } else {
                out.peb = in.cre;
                out.cri = in.pib;
                out.cre = in.peb;
            }
            if (mode == BusMode::PaperFaithful) {
                out.pib.opcode = static_cast<Opcode>(own_depth + 1);
                out.pib.operand = own_depth + 1;
            } else {
                out.pib.opcode = Opcode::None;
                out.pib.depth = own_depth + 1;
            }
            break;
        case ExpKind::GoTo:
            out.peb = in.cle;
            out.cli = in.pib;
            out.cle = in.peb;
            break;
        case ExpKind::Function:
            // A function is as resolved as its body.
            out.peb = self;
            out.peb.rsf = n.crp ? in.cre.rsf : false;
            break;
        case ExpKind::Application:
            out.peb = self;
            out.peb.rsf = in.cle.rsf && in.cre.rsf && in.cle.kind != ExpKind::Function;
            break;
        case ExpKind::Add:
        case ExpKind::Mult:
            // An unfired operator presents nothing usable upward.
            out.peb = self;
            out.peb.rsf = false;
            break;
        case ExpKind::GreatZero:
        case ExpKind::LessZero:
        case ExpKind::EqualZero:
            out.peb = self;
            out.peb.rsf = n.rdf ? (in.cle.rsf && in.cre.rsf) : false;
            break;
        default:
            out.peb = self;
            break;
    }
    return out;
}

namespace {

struct EnFlags {
    bool beta = false;
    bool arith = false;
};

struct Resolved {
    uint16_t uni = 0;
    bool null_item = false;   // resolved to an explicit empty
    bool list_deadend = false; // fell off an inactive bottom cell
};

bool node_busy(const NodeState& n) {
    return n.pending != PendingOp::None || n.copy_src != 0 || n.phase != 0;
}

// All per-tick read-only queries over the latched state: effective frames
// through bridges, list depths, enable flags, and the operator/ancestor
// relation of comparisons.
struct TickView {
    const NodeGraph& g;
    const std::vector<Delivery>& wires;
    std::map<uint16_t, int> rsf_memo; // -1 while computing
    std::map<uint16_t, EnFlags> en_map;
    std::map<uint16_t, uint16_t> cmp_app; // comparison -> application above it
    std::set<uint16_t> has_delivery;      // nodes with a frame in flight

    TickView(const NodeGraph& g_, const std::vector<Delivery>& wires_) : g(g_), wires(wires_) {
        for (const Delivery& d : wires) has_delivery.insert(d.to);
        for (size_t i = 1; i < g.nodes.size(); ++i) {
            const NodeState& n = g.nodes[i];
            // An application with a frame already in flight (typically the
            // splice request of a comparison it just served) cannot feed a
            // newly exposed comparison in the same tick.
            if (n.kind != ExpKind::Application || n.pending != PendingOp::None ||
                has_delivery.count(n.uni))
                continue;
            const Resolved r = resolve(n.clp);
            if (r.uni && is_compare_kind(g.at(r.uni).kind)) cmp_app[r.uni] = n.uni;
        }
        if (g.live(g.root)) walk_en(g.root, EnFlags{true, true});
    }

    Resolved resolve(uint16_t u) const {
        std::set<uint16_t> seen;
        while (true) {
            if (!u || !g.live(u) || !seen.insert(u).second) return {};
            const NodeState& n = g.at(u);
            if (n.kind == ExpKind::GoTo) {
                if (!n.clp) return {};
                u = n.clp;
                continue;
            }
            if (n.kind == ExpKind::List) {
                if (n.rsf) {
                    if (!n.clp) return {0, true, false};
                    u = n.clp;
                } else {
                    if (!n.crp) return {0, false, true};
                    u = n.crp;
                }
                continue;
            }
            return {u, false, false};
        }
    }

    // Effective resolve flag of the expression a parent would see at u.
    bool eff_rsf(uint16_t u) {
        const Resolved r = resolve(u);
        if (r.null_item) return true;
        if (!r.uni) return false;
        auto it = rsf_memo.find(r.uni);
        if (it != rsf_memo.end()) return it->second == 1;
        rsf_memo[r.uni] = -1; // cycle guard
        const NodeState& n = g.at(r.uni);
        bool v = false;
        if (!node_busy(n) && !has_delivery.count(r.uni)) {
            switch (n.kind) {
                case ExpKind::Name:
                    v = n.rsf;
                    break;
                case ExpKind::Function:
                    v = n.crp ? eff_rsf(n.crp) : false;
                    break;
                case ExpKind::Application: {
                    const Resolved l = resolve(n.clp);
                    const bool redex = l.uni && g.at(l.uni).kind == ExpKind::Function;
                    v = !redex && eff_rsf(n.clp) && eff_rsf(n.crp);
                    break;
                }
                case ExpKind::Add:
                case ExpKind::Mult:
                    v = false;
                    break;
                case ExpKind::GreatZero:
                case ExpKind::LessZero:
                case ExpKind::EqualZero:
                    v = !cmp_app.count(r.uni) && eff_rsf(n.clp) && eff_rsf(n.crp);
                    break;
                default:
                    v = false;
                    break;
            }
        }
        rsf_memo[r.uni] = v ? 1 : 0;
        return v;
    }

    // Numeric value of the effective expression at u, if it is a resolved
    // numeric name.
    std::optional<int> eff_value(uint16_t u) const {
        const Resolved r = resolve(u);
        if (!r.uni) return std::nullopt;
        const NodeState& n = g.at(r.uni);
        if (n.kind == ExpKind::Name && !n.sym && n.rsf && !node_busy(n)) return n.payload;
        return std::nullopt;
    }

    bool eff_symbolic(uint16_t u) const {
        const Resolved r = resolve(u);
        if (!r.uni) return false;
        const NodeState& n = g.at(r.uni);
        return n.kind == ExpKind::Name && n.sym && n.rsf;
    }

    EnFlags en(uint16_t u) const {
        auto it = en_map.find(u);
        return it == en_map.end() ? EnFlags{} : it->second;
    }

    void walk_en(uint16_t u, EnFlags e) {
        if (!u || !g.live(u) || en_map.count(u)) return;
        en_map[u] = e;
        const NodeState& n = g.at(u);
        const EnFlags off{};
        if (n.pending == PendingOp::Beta) {
            // Everything under a busy application is frozen until the
            // substitution completes.
            walk_en(n.clp, off);
            walk_en(n.crp, off);
            return;
        }
        switch (n.kind) {
            case ExpKind::Application: {
                const Resolved l = resolve(n.clp);
                const bool redex = l.uni && g.at(l.uni).kind == ExpKind::Function;
                // The operator side keeps reducing until it is a function;
                // then it waits to be consumed. The operand side reduces in
                // parallel.
                walk_en(n.clp, redex ? off : e);
                walk_en(n.crp, e);
                break;
            }
            case ExpKind::Add:
            case ExpKind::Mult:
            case ExpKind::GreatZero:
            case ExpKind::LessZero:
            case ExpKind::EqualZero:
                // Substitution never runs under an unfired operator, but
                // nested arithmetic still does.
                walk_en(n.clp, EnFlags{false, e.arith});
                walk_en(n.crp, EnFlags{false, e.arith});
                break;
            case ExpKind::Function:
                walk_en(n.clp, off);
                walk_en(n.crp, e);
                break;
            case ExpKind::List:
                walk_en(n.clp, n.rsf ? e : off);
                walk_en(n.crp, e);
                break;
            case ExpKind::GoTo:
                walk_en(n.clp, e);
                break;
            default:
                break;
        }
    }

    void collect_subtree(uint16_t u, std::set<uint16_t>& out) const {
        if (!u || !g.live(u) || !out.insert(u).second) return;
        collect_subtree(g.at(u).clp, out);
        collect_subtree(g.at(u).crp, out);
    }

    bool subtree_busy(const std::set<uint16_t>& members) const {
        for (uint16_t m : members)
            if (node_busy(g.at(m))) return true;
        for (const Delivery& d : wires)
            if (members.count(d.to)) return true;
        return false;
    }

    // Occurrences of a binder symbol a substitution broadcast can reach.
    void count_occurrences(uint16_t u, int sym, int& k) const {
        if (!u || !g.live(u)) return;
        const NodeState& n = g.at(u);
        switch (n.kind) {
            case ExpKind::Name:
                if (n.sym && n.payload == sym) ++k;
                return;
            case ExpKind::Function: {
                if (g.live(n.clp)) {
                    const NodeState& b = g.at(n.clp);
                    if (b.sym && b.payload == sym) return; // shadowed
                }
                count_occurrences(n.crp, sym, k);
                return;
            }
            case ExpKind::List:
                count_occurrences(n.crp, sym, k);
                if (n.rsf) count_occurrences(n.clp, sym, k);
                return;
            case ExpKind::GoTo:
                count_occurrences(n.clp, sym, k);
                return;
            default:
                count_occurrences(n.clp, sym, k);
                count_occurrences(n.crp, sym, k);
                return;
        }
    }
};

struct AllocReq {
    NodeState init;
    int link = 0; // 0 none, 1 self.clp, 2 self.crp
};

struct NodeEffects {
    uint16_t self = 0;
    std::optional<NodeState> write;
    std::vector<std::pair<uint16_t, uint16_t>> pnt_writes;
    std::vector<std::pair<uint16_t, uint16_t>> clp_writes;
    std::vector<std::pair<uint16_t, uint16_t>> crp_writes;
    std::vector<AllocReq> allocs;
    std::vector<uint16_t> free_roots; // recursive
    std::vector<uint16_t> free_ones;  // single node
    std::vector<uint16_t> adopted_clp; // depth-addressed item adoptions
    std::vector<Delivery> emits;
    std::vector<AluRequest> alu_pushes;
    std::optional<uint16_t> new_root;
    std::vector<std::string> faults;
};

NodeState copy_placeholder(uint16_t src, uint16_t parent) {
    NodeState ph{};
    ph.kind = ExpKind::Name;
    ph.rsf = false;
    ph.copy_src = src;
    ph.pnt = parent;
    return ph;
}

void forward_down(const ClusterState& s, NodeEffects& eff, const NodeState& n, const Delivery& d,
                  bool spine_only) {
    Delivery fwd = d;
    fwd.from = n.uni;
    fwd.port = Port::Down;
    if (n.kind == ExpKind::List && spine_only) {
        if (s.graph.live(n.crp)) {
            fwd.to = n.crp;
            eff.emits.push_back(fwd);
        }
        return;
    }
    if (s.graph.live(n.clp)) {
        fwd.to = n.clp;
        eff.emits.push_back(fwd);
    }
    if (s.graph.live(n.crp)) {
        fwd.to = n.crp;
        eff.emits.push_back(fwd);
    }
}

// Forwarding that matches substitution reach: functions forward into their
// body only (and stop when they shadow the symbol), cells skip inactive
// items, indirections chase.
void forward_broadcast(const ClusterState& s, NodeEffects& eff, const NodeState& n, const Delivery& d) {
    Delivery fwd = d;
    fwd.from = n.uni;
    fwd.port = Port::Down;
    auto send = [&](uint16_t to) {
        if (s.graph.live(to)) {
            fwd.to = to;
            eff.emits.push_back(fwd);
        }
    };
    switch (n.kind) {
        case ExpKind::Function:
            send(n.crp);
            break;
        case ExpKind::List:
            send(n.crp);
            if (n.rsf) send(n.clp);
            break;
        case ExpKind::GoTo:
            send(n.clp);
            break;
        case ExpKind::Name:
            break;
        default:
            send(n.clp);
            send(n.crp);
            break;
    }
}

void dispatch(const ClusterState& s, TickView& view, NodeEffects& eff, NodeState& next,
              const Delivery& d, bool& self_freed) {
    const NodeState& n = s.graph.at(eff.self);
    switch (d.ins.opcode) {
        case Opcode::ActivateDepth:
            if (n.kind == ExpKind::List) next.rsf = (list_depth(s.graph, n.uni) == d.ins.operand);
            forward_down(s, eff, n, d, false);
            break;
        case Opcode::UpdateDepth:
            if (n.kind == ExpKind::List && list_depth(s.graph, n.uni) == d.ins.operand) {
                next.clp = d.peb.clp;
                eff.adopted_clp.push_back(d.peb.clp);
                if (s.graph.live(d.peb.clp)) eff.pnt_writes.emplace_back(d.peb.clp, n.uni);
            }
            forward_down(s, eff, n, d, false);
            break;
        case Opcode::AddBottomNode:
            if (n.kind == ExpKind::List) {
                if (list_depth(s.graph, n.uni) == 0 && n.pending == PendingOp::None) {
                    AllocReq req;
                    req.init.kind = ExpKind::List;
                    req.init.pnt = n.uni;
                    req.link = 2;
                    eff.allocs.push_back(req);
                    next.pending = PendingOp::AddBottom;
                    next.phase = 1;
                    next.st_kind = d.peb.kind;
                    next.st_sym = d.peb.sym;
                    next.st_payload = d.peb.payload;
                    next.st_clp = d.peb.clp;
                    next.st_crp = d.peb.crp;
                } else {
                    forward_down(s, eff, n, d, true);
                }
            } else {
                forward_down(s, eff, n, d, false);
            }
            break;
        case Opcode::RemoveBottomNode:
            if (n.kind == ExpKind::List) {
                if (list_depth(s.graph, n.uni) == 1 && n.pending == PendingOp::None) {
                    if (s.graph.live(n.crp)) {
                        Delivery kill{};
                        kill.to = n.crp;
                        kill.from = n.uni;
                        kill.port = Port::Down;
                        kill.ins.opcode = Opcode::Nullification;
                        kill.ins.operand = n.crp;
                        eff.emits.push_back(kill);
                    }
                    next.pending = PendingOp::RemoveBottom;
                    next.phase = 1;
                } else {
                    forward_down(s, eff, n, d, true);
                }
            } else {
                forward_down(s, eff, n, d, false);
            }
            break;
        case Opcode::Nullification:
            // The whole subtree releases in a single commit.
            eff.free_roots.push_back(n.uni);
            self_freed = true;
            break;
        case Opcode::UpdateExpression:
            next.kind = d.peb.kind;
            next.sym = d.peb.sym;
            next.payload = d.peb.payload;
            next.clp = d.peb.clp;
            next.crp = d.peb.crp;
            next.rsf = d.peb.rsf;
            next.rdf = d.peb.rdf;
            if (s.graph.live(d.peb.clp)) eff.pnt_writes.emplace_back(d.peb.clp, n.uni);
            if (s.graph.live(d.peb.crp)) eff.pnt_writes.emplace_back(d.peb.crp, n.uni);
            break;
        case Opcode::ReturnExpression: {
            if (s.graph.live(n.pnt)) {
                Delivery rep{};
                rep.to = n.pnt;
                rep.from = n.uni;
                rep.port = Port::Up;
                rep.ins.opcode = Opcode::ReturnExpression;
                rep.peb.rsf = n.rsf;
                rep.peb.rdf = n.rdf;
                rep.peb.kind = n.kind;
                rep.peb.sym = n.sym;
                rep.peb.payload = n.payload;
                rep.peb.clp = n.clp;
                rep.peb.crp = n.crp;
                if (d.port == Port::Down) eff.emits.push_back(rep);
                // An Up-port arrival is the reply itself: nothing to do.
            }
            break;
        }
        case Opcode::UpdateChildLeft:
            next.clp = static_cast<uint16_t>(d.ins.operand);
            if (s.graph.live(next.clp)) eff.pnt_writes.emplace_back(next.clp, n.uni);
            break;
        case Opcode::UpdateChildRight:
            next.crp = static_cast<uint16_t>(d.ins.operand);
            if (s.graph.live(next.crp)) eff.pnt_writes.emplace_back(next.crp, n.uni);
            break;
        case Opcode::CompareValue:
        case Opcode::DescendantTransformation: {
            const int sym = d.peb.payload;
            if (n.kind == ExpKind::Name && n.sym && n.payload == sym) {
                const uint16_t arg = static_cast<uint16_t>(d.ins.operand);
                if (d.ins.opcode == Opcode::DescendantTransformation) {
                    next.kind = ExpKind::GoTo;
                    next.sym = false;
                    next.payload = 0;
                    next.clp = arg;
                    next.crp = 0;
                    next.rsf = false;
                    if (s.graph.live(arg)) eff.pnt_writes.emplace_back(arg, n.uni);
                } else {
                    const Resolved rt = view.resolve(arg);
                    next.copy_src = rt.uni ? rt.uni : arg;
                    next.rsf = false;
                }
                break;
            }
            if (n.kind == ExpKind::Function && s.graph.live(n.clp)) {
                const NodeState& b = s.graph.at(n.clp);
                if (b.sym && b.payload == sym) break; // shadowing binder: stop here
            }
            forward_broadcast(s, eff, n, d);
            break;
        }
        case Opcode::AncestorTransformation:
            break; // ownership handover notice; no state change
        case Opcode::ImmediateResolution: {
            if (n.kind != ExpKind::Application || n.pending != PendingOp::None) {
                eff.faults.push_back("stray ImmediateResolution from node " + std::to_string(d.from) +
                                     " at node " + std::to_string(n.uni));
                break;
            }
            // The fired comparison below the operator side survives; this
            // application and the consumed operand vanish.
            const uint16_t survivor = n.clp;
            eff.free_ones.push_back(n.uni);
            if (n.crp) eff.free_roots.push_back(n.crp);
            self_freed = true;
            if (s.graph.live(n.pnt)) {
                const NodeState& p = s.graph.at(n.pnt);
                if (p.clp == n.uni) eff.clp_writes.emplace_back(n.pnt, survivor);
                else eff.crp_writes.emplace_back(n.pnt, survivor);
                if (s.graph.live(survivor)) eff.pnt_writes.emplace_back(survivor, n.pnt);
            } else if (s.graph.root == n.uni) {
                eff.new_root = survivor;
                if (s.graph.live(survivor)) eff.pnt_writes.emplace_back(survivor, 0);
            }
            break;
        }
        case Opcode::None:
            break;
    }
}

AluOp compare_alu_op(ExpKind k) {
    if (k == ExpKind::GreatZero) return AluOp::CmpGT0;
    if (k == ExpKind::LessZero) return AluOp::CmpLT0;
    return AluOp::CmpEQ0;
}

void spontaneous(const ClusterState& s, TickView& view, NodeEffects& eff, NodeState& next,
                 bool received) {
    const NodeGraph& g = s.graph;
    const NodeState& n = g.at(eff.self);

    // Duplication engine: adopt the source's registers, spawn placeholder
    // children that keep copying, one level per tick.
    if (n.copy_src) {
        if (!g.live(n.copy_src)) {
            eff.faults.push_back("copy source vanished under node " + std::to_string(n.uni));
            next.copy_src = 0;
            return;
        }
        const NodeState& src = g.at(n.copy_src);
        next.kind = src.kind;
        next.sym = src.sym;
        next.payload = src.payload;
        next.rsf = src.rsf;
        next.rdf = src.rdf;
        next.copy_src = 0;
        next.clp = 0;
        next.crp = 0;
        if (src.clp && g.live(src.clp)) {
            AllocReq req{copy_placeholder(src.clp, n.uni), 1};
            eff.allocs.push_back(req);
        }
        if (src.crp && g.live(src.crp)) {
            AllocReq req{copy_placeholder(src.crp, n.uni), 2};
            eff.allocs.push_back(req);
        }
        return;
    }

    // Second cycle of a bottom-node insertion: hand the stashed registers to
    // the freshly linked child.
    if (n.pending == PendingOp::AddBottom && n.phase == 1) {
        if (g.live(n.crp)) {
            Delivery d{};
            d.to = n.crp;
            d.from = n.uni;
            d.port = Port::Down;
            d.ins.opcode = Opcode::UpdateExpression;
            d.ins.operand = n.crp;
            d.peb.kind = n.st_kind;
            d.peb.sym = n.st_sym;
            d.peb.payload = n.st_payload;
            d.peb.clp = n.st_clp;
            d.peb.crp = n.st_crp;
            d.peb.rsf = false;
            eff.emits.push_back(d);
        } else {
            eff.faults.push_back("bottom insertion lost its new node under cell " + std::to_string(n.uni));
        }
        next.pending = PendingOp::None;
        next.phase = 0;
        next.st_kind = ExpKind::Free;
        next.st_sym = false;
        next.st_payload = 0;
        next.st_clp = 0;
        next.st_crp = 0;
        return;
    }

    // Second cycle of a bottom-node removal: the nullified child unlinks.
    if (n.pending == PendingOp::RemoveBottom && n.phase == 1) {
        next.crp = 0;
        next.pending = PendingOp::None;
        next.phase = 0;
        return;
    }

    // Result pickup from the shared arithmetic unit.
    if (n.pending == PendingOp::AluWait) {
        if (s.alu.result_out && s.alu.result_out->uni == n.uni) {
            const AluResult r = *s.alu.result_out;
            if (n.kind == ExpKind::Add || n.kind == ExpKind::Mult) {
                // Both operands are consumed; the node becomes the value.
                if (n.clp) eff.free_roots.push_back(n.clp);
                if (n.crp) eff.free_roots.push_back(n.crp);
                next.kind = ExpKind::Name;
                next.sym = false;
                next.payload = r.value;
                next.clp = 0;
                next.crp = 0;
                next.rsf = true;
                next.rdf = false;
                next.pending = PendingOp::None;
            } else if (is_compare_kind(n.kind)) {
                const uint16_t winner = r.truth ? n.clp : n.crp;
                const uint16_t loser = r.truth ? n.crp : n.clp;
                if (loser) eff.free_roots.push_back(loser);
                next.kind = ExpKind::GoTo;
                next.sym = false;
                next.payload = 0;
                next.clp = winner;
                next.crp = 0;
                next.rsf = false;
                next.rdf = false;
                next.pending = PendingOp::None;
                auto it = view.cmp_app.find(n.uni);
                if (it != view.cmp_app.end()) {
                    Delivery d{};
                    d.to = it->second;
                    d.from = n.uni;
                    d.port = Port::Up;
                    d.ins.opcode = Opcode::ImmediateResolution;
                    d.ins.operand = n.uni;
                    eff.emits.push_back(d);
                }
            }
        }
        return;
    }

    if (n.pending != PendingOp::None || n.phase != 0) return;

    // Frames processed this tick keep the node's buses occupied; firing
    // decisions wait for a quiet tick so no bus ever carries two frames.
    if (received) return;

    // Arithmetic fires once both effective operands are resolved numerics.
    if ((n.kind == ExpKind::Add || n.kind == ExpKind::Mult) && view.en(n.uni).arith) {
        const auto lv = view.eff_value(n.clp);
        const auto rv = view.eff_value(n.crp);
        if (lv && rv) {
            AluRequest req{n.uni, *lv, *rv, n.kind == ExpKind::Add ? AluOp::Add : AluOp::Mult};
            eff.alu_pushes.push_back(req);
            next.pending = PendingOp::AluWait;
        }
        return;
    }

    if (is_compare_kind(n.kind)) {
        auto it = view.cmp_app.find(n.uni);
        if (it == view.cmp_app.end()) {
            // No application feeds this comparison: it is irreducible and
            // resolves in place once both branches do.
            if (!n.rdf) next.rdf = true;
            if (!n.rsf && view.eff_rsf(n.clp) && view.eff_rsf(n.crp)) next.rsf = true;
            return;
        }
        // Applied (directly or through bridges): reducible again.
        if (n.rdf) next.rdf = false;
        if (n.rsf) next.rsf = false;
        const uint16_t app = it->second;
        if (!view.en(app).beta) return;
        const auto av = view.eff_value(g.at(app).crp);
        if (!av) {
            if (view.eff_symbolic(g.at(app).crp)) {
                eff.faults.push_back("comparison at node " + std::to_string(n.uni) +
                                     " applied to a symbolic name");
                next.phase = 200; // inert; never retried
            }
            return;
        }
        if (s.cfg().local_compare) {
            const AluComputed c = alu_compute(compare_alu_op(n.kind), *av, 0, s.cfg().value_width);
            const uint16_t winner = c.truth ? n.clp : n.crp;
            const uint16_t loser = c.truth ? n.crp : n.clp;
            if (loser) eff.free_roots.push_back(loser);
            next.kind = ExpKind::GoTo;
            next.sym = false;
            next.payload = 0;
            next.clp = winner;
            next.crp = 0;
            next.rsf = false;
            next.rdf = false;
            Delivery d{};
            d.to = app;
            d.from = n.uni;
            d.port = Port::Up;
            d.ins.opcode = Opcode::ImmediateResolution;
            d.ins.operand = n.uni;
            eff.emits.push_back(d);
        } else {
            AluRequest req{n.uni, *av, 0, compare_alu_op(n.kind)};
            eff.alu_pushes.push_back(req);
            next.pending = PendingOp::AluWait;
        }
        return;
    }

    if (n.kind == ExpKind::Application) {
        if (!view.en(n.uni).beta) return;
        const Resolved l = view.resolve(n.clp);
        if (!l.uni || g.at(l.uni).kind != ExpKind::Function) return;
        const NodeState& fn = g.at(l.uni);
        if (!g.live(fn.clp) || !g.live(fn.crp)) return;
        std::set<uint16_t> members;
        view.collect_subtree(n.clp, members);
        if (view.subtree_busy(members)) return;
        const NodeState& binder = g.at(fn.clp);
        int k = 0;
        view.count_occurrences(fn.crp, binder.payload, k);
        if (k >= 2) {
            // The operand is about to be photographed level by level; wait
            // until nothing inside it is mid-flight.
            std::set<uint16_t> arg_members;
            view.collect_subtree(n.crp, arg_members);
            if (view.subtree_busy(arg_members)) return;
        }
        next.pending = PendingOp::Beta;
        next.phase = 1;
        next.beta_sym = binder.payload;
        next.beta_arg = n.crp;
        next.beta_copy = (k >= 2);
        next.beta_discard = (k == 0);
        if (k >= 1) {
            Delivery d{};
            d.to = fn.crp;
            d.from = n.uni;
            d.port = Port::Down;
            d.ins.opcode = k == 1 ? Opcode::DescendantTransformation : Opcode::CompareValue;
            d.ins.operand = n.crp;
            d.peb.sym = true;
            d.peb.payload = binder.payload;
            eff.emits.push_back(d);
        }
        if (k == 1 && g.live(n.crp)) {
            Delivery d{};
            d.to = n.crp;
            d.from = n.uni;
            d.port = Port::Down;
            d.ins.opcode = Opcode::AncestorTransformation;
            d.ins.operand = n.uni;
            eff.emits.push_back(d);
        }
        return;
    }
}

// Completion of a substitution: once the body is quiescent the application
// splices the result into its own place.
void beta_completion(const ClusterState& s, TickView& view, NodeEffects& eff, NodeState& next) {
    const NodeGraph& g = s.graph;
    const NodeState& n = g.at(eff.self);
    if (n.kind != ExpKind::Application || n.pending != PendingOp::Beta) return;

    const Resolved l = view.resolve(n.clp);
    if (!l.uni || g.at(l.uni).kind != ExpKind::Function) {
        eff.faults.push_back("substitution lost its function under node " + std::to_string(n.uni));
        next.pending = PendingOp::None;
        next.phase = 0;
        return;
    }
    const NodeState& fn = g.at(l.uni);
    std::set<uint16_t> members;
    view.collect_subtree(n.clp, members);
    if (n.beta_copy) view.collect_subtree(n.beta_arg, members);
    if (view.subtree_busy(members)) return;

    const uint16_t body = fn.crp;
    if (n.beta_discard || n.beta_copy) {
        if (n.beta_arg) eff.free_roots.push_back(n.beta_arg);
    }
    const bool leaf_name = g.live(body) && g.at(body).kind == ExpKind::Name &&
                           g.at(body).clp == 0 && g.at(body).crp == 0;
    if (leaf_name) {
        // Adopt the leaf in place rather than indirect to it. Any spectator
        // still holding this node as its parent will now be reading a
        // name's buses where a list parent used to be.
        const NodeState& b = g.at(body);
        next.kind = ExpKind::Name;
        next.sym = b.sym;
        next.payload = b.payload;
        next.clp = 0;
        next.crp = 0;
        next.rsf = true;
        next.rdf = false;
        eff.free_ones.push_back(body);
    } else {
        next.kind = ExpKind::GoTo;
        next.sym = false;
        next.payload = 0;
        next.clp = body;
        next.crp = 0;
        next.rsf = false;
        next.rdf = false;
        if (g.live(body)) eff.pnt_writes.emplace_back(body, n.uni);
    }
    next.pending = PendingOp::None;
    next.phase = 0;
    next.beta_sym = -1;
    next.beta_arg = 0;
    next.beta_copy = false;
    next.beta_discard = false;
    eff.free_ones.push_back(fn.uni);
    if (g.live(fn.clp)) eff.free_ones.push_back(fn.clp);
}

std::string frame_trace(const Delivery& d, BusMode mode) {
    std::ostringstream os;
    os << d.from << "->" << d.to << (d.port == Port::Down ? " ins " : " rsp ") << opcode_name(d.ins.opcode)
       << " op=" << d.ins.operand;
    if (mode == BusMode::DedicatedDepth && d.ins.depth >= 0) os << " d=" << d.ins.depth;
    if (d.peb.kind != ExpKind::Free || d.peb.sym) os << " peb=" << exp_kind_name(d.peb.kind);
    return os.str();
}

std::string state_hash(const ClusterState& s) {
    std::ostringstream os;
    for (size_t i = 1; i < s.graph.nodes.size(); ++i) {
        const NodeState& n = s.graph.nodes[i];
        if (n.kind == ExpKind::Free) continue;
        os << i << ':' << static_cast<int>(n.kind) << ',' << n.sym << ',' << n.payload << ',' << n.clp
           << ',' << n.crp << ',' << n.pnt << ',' << n.rsf << ',' << n.rdf << ','
           << static_cast<int>(n.phase) << ',' << static_cast<int>(n.pending) << ',' << n.copy_src << ','
           << n.beta_sym << ',' << n.beta_arg << ';';
    }
    os << "|r" << s.graph.root << "|a";
    for (const AluRequest& r : s.alu.stack)
        os << r.uni << ',' << r.a << ',' << r.b << ',' << static_cast<int>(r.op) << ';';
    if (s.alu.result_out) os << "R" << s.alu.result_out->uni << ',' << s.alu.result_out->value;
    os << "|w";
    for (const Delivery& d : s.wires)
        os << d.to << ',' << d.from << ',' << static_cast<int>(d.ins.opcode) << ',' << d.ins.operand << ';';
    return os.str();
}

} // namespace

ClusterState make_cluster(NodeGraph g) {
    ClusterState s{std::move(g), AluState{}, 0, {}, {}, {}, 0, 0};
    s.alu.capacity = s.graph.cfg.queue_capacity();
    s.alu.width = s.graph.cfg.value_width;
    s.peak_nodes = s.graph.live_count();
    return s;
}

void inject(ClusterState& s, InstructionFrame ins, ExpressionFrame peb) {
    Delivery d{};
    d.to = s.graph.root;
    d.from = 0;
    d.port = Port::Down;
    d.ins = ins;
    d.peb = peb;
    s.wires.push_back(d);
    if (s.cfg().trace) s.trace.push_back(std::to_string(s.tick_count) + " " + frame_trace(d, s.cfg().mode));
}

void tick(ClusterState& s) {
    std::vector<uint16_t> order;
    for (size_t i = 1; i < s.graph.nodes.size(); ++i) order.push_back(static_cast<uint16_t>(i));
    tick_ordered(s, order);
}

void tick_ordered(ClusterState& s, const std::vector<uint16_t>& order) {
    TickView view(s.graph, s.wires);

    // Phase A: every node computes its effects from the latched state.
    std::map<uint16_t, NodeEffects> effects;
    for (uint16_t u : order) {
        if (!s.graph.live(u)) continue;
        NodeEffects eff;
        eff.self = u;
        NodeState next = s.graph.at(u);
        bool self_freed = false;

        std::vector<Delivery> incoming;
        for (const Delivery& d : s.wires)
            if (d.to == u) incoming.push_back(d);
        std::stable_sort(incoming.begin(), incoming.end(), [](const Delivery& a, const Delivery& b) {
            return std::tuple(a.port, a.from, a.ins.opcode) < std::tuple(b.port, b.from, b.ins.opcode);
        });
        if (incoming.size() > 1) {
            // More than one frame on the same node in one tick means at
            // least one bus carried two frames.
            std::map<Port, int> per_port;
            for (const Delivery& d : incoming) per_port[d.port]++;
            for (auto& [port, count] : per_port)
                if (count > 1)
                    eff.faults.push_back("bus collision: " + std::to_string(count) + " frames for node " +
                                         std::to_string(u) + " on the " +
                                         (port == Port::Down ? std::string("parent") : std::string("child")) +
                                         " side");
        }
        for (const Delivery& d : incoming) {
            if (self_freed) break;
            dispatch(s, view, eff, next, d, self_freed);
        }
        if (!self_freed) {
            spontaneous(s, view, eff, next, !incoming.empty());
            beta_completion(s, view, eff, next);
        }
        if (!self_freed) eff.write = next;
        effects.emplace(u, std::move(eff));
    }

    // Phase B: commit everything at once, in id order, independent of the
    // phase A visit order.
    std::vector<std::string> new_trace;
    std::vector<Delivery> new_wires;
    std::vector<AluRequest> pushes;
    std::vector<std::string> faults;
    std::optional<uint16_t> new_root;

    for (auto& [u, eff] : effects)
        if (eff.write) {
            NodeState w = *eff.write;
            w.uni = u;
            s.graph.nodes[u] = w;
        }
    for (auto& [u, eff] : effects) {
        for (auto& [node, val] : eff.clp_writes)
            if (s.graph.live(node)) s.graph.nodes[node].clp = val;
        for (auto& [node, val] : eff.crp_writes)
            if (s.graph.live(node)) s.graph.nodes[node].crp = val;
        for (auto& [node, val] : eff.pnt_writes)
            if (s.graph.live(node)) s.graph.nodes[node].pnt = val;
    }
    for (auto& [u, eff] : effects) {
        for (AllocReq& req : eff.allocs) {
            uint16_t id = 0;
            try {
                id = s.graph.allocate();
            } catch (const GraphError&) {
                faults.push_back("node allocation failed for node " + std::to_string(u));
                continue;
            }
            NodeState init = req.init;
            init.uni = id;
            s.graph.nodes[id] = init;
            if (req.link == 1) s.graph.nodes[u].clp = id;
            if (req.link == 2) s.graph.nodes[u].crp = id;
        }
    }

    // Two cells adopting the same item in the same tick is a wiring fault.
    {
        std::map<uint16_t, int> adopted;
        for (auto& [u, eff] : effects)
            for (uint16_t c : eff.adopted_clp) adopted[c]++;
        for (auto& [c, count] : adopted)
            if (count > 1)
                faults.push_back("depth-addressed item " + std::to_string(c) + " adopted by " +
                                 std::to_string(count) + " cells in one tick");
    }

    // Frees last: a freed subtree wins over concurrent writes into it.
    {
        std::set<uint16_t> to_free;
        auto expand = [&](auto&& self, uint16_t r) -> void {
            if (!r || !s.graph.live(r) || !to_free.insert(r).second) return;
            self(self, s.graph.nodes[r].clp);
            self(self, s.graph.nodes[r].crp);
        };
        for (auto& [u, eff] : effects) {
            for (uint16_t r : eff.free_roots) expand(expand, r);
            for (uint16_t one : eff.free_ones)
                if (s.graph.live(one)) to_free.insert(one);
        }
        for (uint16_t f : to_free) {
            s.graph.free_node(f);
            // Requests owned by a released node leave the queue with it.
            auto& st = s.alu.stack;
            st.erase(std::remove_if(st.begin(), st.end(), [&](const AluRequest& r) { return r.uni == f; }),
                     st.end());
        }
    }

    for (auto& [u, eff] : effects) {
        for (Delivery& d : eff.emits) new_wires.push_back(d);
        for (AluRequest& r : eff.alu_pushes) pushes.push_back(r);
        for (std::string& f : eff.faults) faults.push_back(std::move(f));
        if (eff.new_root) new_root = eff.new_root;
    }
    std::stable_sort(new_wires.begin(), new_wires.end(), [](const Delivery& a, const Delivery& b) {
        return std::tuple(a.to, a.port, a.from, a.ins.opcode, a.ins.operand) <
               std::tuple(b.to, b.port, b.from, b.ins.opcode, b.ins.operand);
    });
    std::stable_sort(pushes.begin(), pushes.end(),
                     [](const AluRequest& a, const AluRequest& b) { return a.uni < b.uni; });
    for (const AluRequest& r : pushes) {
        if (!s.alu.request(r))
            faults.push_back("operation queue overflow: request from node " + std::to_string(r.uni) +
                             " dropped");
    }
    const auto alu_result = s.alu.alu_tick();

    if (new_root) s.graph.root = *new_root;
    s.wires = std::move(new_wires);
    s.tick_count++;

    if (s.cfg().trace) {
        for (const Delivery& d : s.wires)
            new_trace.push_back(std::to_string(s.tick_count) + " " + frame_trace(d, s.cfg().mode));
        if (alu_result) {
            std::ostringstream os;
            os << s.tick_count << " ALU " << alu_op_name(alu_result->op) << " -> " << alu_result->uni << " ";
            if (alu_result->op == AluOp::Add || alu_result->op == AluOp::Mult) os << alu_result->value;
            else os << (alu_result->truth ? "true" : "false");
            new_trace.push_back(os.str());
        }
        for (std::string& t : new_trace) s.trace.push_back(std::move(t));
    }
    for (std::string& f : faults) {
        s.collision_log.push_back(std::move(f));
        s.run_faults++;
    }
    s.peak_nodes = std::max(s.peak_nodes, s.graph.live_count());
}

bool root_resolved(const ClusterState& s) {
    if (!s.graph.live(s.graph.root)) return false;
    TickView view(s.graph, s.wires);
    return view.eff_rsf(s.graph.root);
}

namespace {

// True when the path a controller readback would walk runs into an inactive
// cell with no tail: the structure is waiting for an activation that never
// selected it.
bool live_path_dead_chain(const NodeGraph& g) {
    bool dead = false;
    std::set<uint16_t> seen;
    auto walk = [&](auto&& self, uint16_t u) -> void {
        if (!u || !g.live(u) || dead || !seen.insert(u).second) return;
        const NodeState& n = g.at(u);
        switch (n.kind) {
            case ExpKind::List:
                if (n.rsf) {
                    self(self, n.clp);
                } else {
                    if (!n.crp) dead = true;
                    else self(self, n.crp);
                }
                break;
            case ExpKind::GoTo:
                self(self, n.clp);
                break;
            case ExpKind::Function:
                self(self, n.crp);
                break;
            case ExpKind::Name:
                break;
            default:
                self(self, n.clp);
                self(self, n.crp);
                break;
        }
    };
    walk(walk, g.root);
    return dead;
}

TermPtr readback_live_rec(const ClusterState& s, const TickView& view, uint16_t u, std::set<uint16_t>& path) {
    const Resolved r = view.resolve(u);
    if (r.null_item) return null_tail();
    if (!r.uni) throw GraphError("readback fell off a dead end at node " + std::to_string(u));
    if (!path.insert(r.uni).second) throw GraphError("readback cycle through node " + std::to_string(r.uni));
    const NodeState& n = s.graph.at(r.uni);
    TermPtr out;
    switch (n.kind) {
        case ExpKind::Name:
            out = n.sym ? name_sym(s.graph.symbol_name(n.payload)) : name_num(n.payload);
            break;
        case ExpKind::Function: {
            const NodeState& b = s.graph.at(n.clp);
            out = function(s.graph.symbol_name(b.payload), readback_live_rec(s, view, n.crp, path));
            break;
        }
        case ExpKind::Application:
            out = application(readback_live_rec(s, view, n.clp, path),
                              readback_live_rec(s, view, n.crp, path));
            break;
        case ExpKind::Add:
        case ExpKind::Mult:
        case ExpKind::GreatZero:
        case ExpKind::LessZero:
        case ExpKind::EqualZero: {
            ArithOp op = ArithOp::Add;
            if (n.kind == ExpKind::Mult) op = ArithOp::Mult;
            if (n.kind == ExpKind::GreatZero) op = ArithOp::GreatZero;
            if (n.kind == ExpKind::LessZero) op = ArithOp::LessZero;
            if (n.kind == ExpKind::EqualZero) op = ArithOp::EqualZero;
            out = arith(op, readback_live_rec(s, view, n.clp, path),
                        readback_live_rec(s, view, n.crp, path));
            break;
        }
        default:
            throw GraphError("readback reached an unexpected node kind");
    }
    path.erase(r.uni);
    return out;
}

} // namespace

TermPtr readback_live(ClusterState& s) {
    if (s.cfg().mode == BusMode::PaperFaithful) {
        // A surviving cell keeps sending its parent-bound depth signal. A
        // parent slot now occupied by a non-list node decodes that signal as
        // an instruction key; depth 1 encodes exactly like ReturnExpression,
        // so every such node answers with its contents at once.
        for (size_t i = 1; i < s.graph.nodes.size(); ++i) {
            const NodeState& n = s.graph.nodes[i];
            if (n.kind != ExpKind::List) continue;
            if (!s.graph.live(n.pnt)) continue;
            const NodeState& p = s.graph.at(n.pnt);
            if (p.kind == ExpKind::List) continue;
            const int signal = list_depth(s.graph, n.uni) + 1;
            if (signal == static_cast<int>(Opcode::ReturnExpression))
                s.collision_log.push_back(
                    "readback collision: node " + std::to_string(p.uni) + " decoded the depth signal of cell " +
                    std::to_string(n.uni) + " as ReturnExpression and answered out of turn");
        }
    }
    TickView view(s.graph, s.wires);
    std::set<uint16_t> path;
    return readback_live_rec(s, view, s.graph.root, path);
}

RunResult run(ClusterState& s) {
    const ClusterConfig& cfg = s.cfg();
    if (cfg.activated_depth) {
        int d = *cfg.activated_depth;
        if (cfg.depth_origin == DepthOrigin::Outermost) {
            int maxd = -1;
            for (size_t i = 1; i < s.graph.nodes.size(); ++i)
                if (s.graph.nodes[i].kind == ExpKind::List)
                    maxd = std::max(maxd, list_depth(s.graph, static_cast<uint16_t>(i)));
            d = maxd - d;
        }
        InstructionFrame fr{Opcode::ActivateDepth, d, cfg.mode == BusMode::DedicatedDepth ? d : -1};
        inject(s, fr);
    }

    RunResult out;
    std::string prev;
    while (true) {
        tick(s);
        if (s.run_faults > 0) {
            out.status = RunStatus::Collision;
            break;
        }
        if (root_resolved(s)) {
            out.status = RunStatus::Resolved;
            break;
        }
        if (s.tick_count >= cfg.max_ticks) {
            out.status = RunStatus::BudgetExhausted;
            break;
        }
        const std::string h = state_hash(s);
        if (h == prev) {
            out.status = live_path_dead_chain(s.graph) ? RunStatus::Suspended : RunStatus::BudgetExhausted;
            break;
        }
        prev = h;
    }

    if (out.status == RunStatus::Resolved) {
        try {
            out.final_term = readback_live(s);
        } catch (const GraphError& e) {
            s.collision_log.push_back(std::string("readback failed: ") + e.what());
            out.final_term = nullptr;
        }
    } else {
        try {
            out.final_term = readback_static(s.graph);
        } catch (const GraphError&) {
            out.final_term = nullptr;
        }
    }
    out.ticks = s.tick_count;
    out.peak_nodes = s.peak_nodes;
    out.collision_log = s.collision_log;
    return out;
}

RunResult run_term(const TermPtr& t, const ClusterConfig& cfg) {
    ClusterState s = make_cluster(compile(t, cfg));
    return run(s);
}

} // namespace lamfab
