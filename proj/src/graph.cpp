#include "lamfab/graph.hpp"

#include <set>
#include <sstream>

namespace lamfab {

void ClusterConfig::validate() const {
    if (id_width < 1 || id_width > 15) throw GraphError("id width must be between 1 and 15");
    if (nodes_per_cluster < 1 || nodes_per_cluster > (1 << id_width) - 1)
        throw GraphError("cluster size must fit the id width (id 0 is reserved)");
    if (value_width < 2 || value_width > 31) throw GraphError("value width must be between 2 and 31");
    if (queue_capacity() < 1) throw GraphError("operation queue needs at least one slot");
    if (max_ticks < 1) throw GraphError("tick budget must be positive");
}

const char* exp_kind_name(ExpKind k) {
    switch (k) {
        case ExpKind::Free: return "Free";
        case ExpKind::Name: return "Name";
        case ExpKind::Function: return "Function";
        case ExpKind::Application: return "Application";
        case ExpKind::List: return "List";
        case ExpKind::Add: return "Add";
        case ExpKind::Mult: return "Mult";
        case ExpKind::GreatZero: return "GreatZero";
        case ExpKind::LessZero: return "LessZero";
        case ExpKind::EqualZero: return "EqualZero";
        case ExpKind::GoTo: return "GoTo";
    }
    return "?";
}

bool is_arith_kind(ExpKind k) {
    return k == ExpKind::Add || k == ExpKind::Mult || is_compare_kind(k);
}

bool is_compare_kind(ExpKind k) {
    return k == ExpKind::GreatZero || k == ExpKind::LessZero || k == ExpKind::EqualZero;
}

NodeGraph::NodeGraph(ClusterConfig cfg_) : cfg(std::move(cfg_)) {
    cfg.validate();
    nodes.resize(static_cast<size_t>(cfg.nodes_per_cluster) + 1);
    for (size_t i = 0; i < nodes.size(); ++i) nodes[i].uni = static_cast<uint16_t>(i);
}

uint16_t NodeGraph::allocate() {
    for (size_t i = 1; i < nodes.size(); ++i) {
        if (nodes[i].kind == ExpKind::Free) {
            nodes[i].clear();
            nodes[i].uni = static_cast<uint16_t>(i);
            return static_cast<uint16_t>(i);
        }
    }
    throw GraphError("cluster node limit exceeded");
}

void NodeGraph::free_node(uint16_t uni) {
    NodeState& n = at(uni);
    n.clear();
    n.uni = uni;
    n.kind = ExpKind::Free;
}

bool NodeGraph::live(uint16_t uni) const {
    return uni >= 1 && uni < nodes.size() && nodes[uni].kind != ExpKind::Free;
}

int NodeGraph::live_count() const {
    int c = 0;
    for (size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].kind != ExpKind::Free) ++c;
    return c;
}

NodeState& NodeGraph::at(uint16_t uni) {
    if (uni < 1 || uni >= nodes.size()) throw GraphError("node id out of range");
    return nodes[uni];
}

const NodeState& NodeGraph::at(uint16_t uni) const {
    if (uni < 1 || uni >= nodes.size()) throw GraphError("node id out of range");
    return nodes[uni];
}

int NodeGraph::symbol_id(const std::string& label) {
    auto it = symbol_ids.find(label);
    if (it != symbol_ids.end()) return it->second;
    const int id = static_cast<int>(symbols.size());
    symbols.push_back(label);
    symbol_ids.emplace(label, id);
    return id;
}

const std::string& NodeGraph::symbol_name(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= symbols.size())
        throw GraphError("unknown symbol id");
    return symbols[static_cast<size_t>(id)];
}

NodeGraph compile(const TermPtr& t, const ClusterConfig& cfg) {
    NodeGraph g(cfg);
    if (!t || t->kind == TermKind::NullTail)
        throw GraphError("cannot compile an empty expression");
    const int needed = count_nodes(t);
    if (needed > cfg.nodes_per_cluster)
        throw GraphError("expression needs " + std::to_string(needed) + " nodes but the cluster has " +
                         std::to_string(cfg.nodes_per_cluster));

    // Preorder emission: parents take lower ids than their children.
    struct Emit {
        NodeGraph& g;
        uint16_t operator()(const TermPtr& t, uint16_t parent, bool reducible_cmp) {
            if (!t || t->kind == TermKind::NullTail) return 0;
            const uint16_t uni = g.allocate();
            NodeState& n = g.at(uni);
            n.pnt = parent;
            switch (t->kind) {
                case TermKind::Name:
                    n.kind = ExpKind::Name;
                    n.rsf = true;
                    if (t->symbolic) {
                        n.sym = true;
                        n.payload = g.symbol_id(t->label);
                    } else {
                        if (!fits_width(t->value, g.cfg.value_width))
                            throw GraphError("name value out of range for the cluster value width");
                        n.payload = t->value;
                    }
                    break;
                case TermKind::Function: {
                    n.kind = ExpKind::Function;
                    const uint16_t binder = g.allocate();
                    NodeState& bn = g.at(binder);
                    bn.kind = ExpKind::Name;
                    bn.sym = true;
                    bn.rsf = true;
                    bn.payload = g.symbol_id(t->label);
                    bn.pnt = uni;
                    g.at(uni).clp = binder;
                    const uint16_t body = (*this)(t->a, uni, false);
                    g.at(uni).crp = body;
                    break;
                }
                case TermKind::Application: {
                    n.kind = ExpKind::Application;
                    const uint16_t f = (*this)(t->a, uni, true);
                    const uint16_t x = (*this)(t->b, uni, false);
                    g.at(uni).clp = f;
                    g.at(uni).crp = x;
                    break;
                }
                case TermKind::ListCell: {
                    n.kind = ExpKind::List;
                    const uint16_t item = (*this)(t->a, uni, false);
                    const uint16_t tail = (*this)(t->b, uni, false);
                    g.at(uni).clp = item;
                    g.at(uni).crp = tail;
                    break;
                }
                case TermKind::Arith: {
                    switch (t->op) {
                        case ArithOp::Add: n.kind = ExpKind::Add; break;
                        case ArithOp::Mult: n.kind = ExpKind::Mult; break;
                        case ArithOp::GreatZero: n.kind = ExpKind::GreatZero; break;
                        case ArithOp::LessZero: n.kind = ExpKind::LessZero; break;
                        case ArithOp::EqualZero: n.kind = ExpKind::EqualZero; break;
                    }
                    // A comparison with nothing feeding it from above is
                    // irreducible: it can only resolve in place.
                    if (is_compare_kind(g.at(uni).kind)) g.at(uni).rdf = !reducible_cmp;
                    const uint16_t l = (*this)(t->a, uni, false);
                    const uint16_t r = (*this)(t->b, uni, false);
                    g.at(uni).clp = l;
                    g.at(uni).crp = r;
                    break;
                }
                case TermKind::GoTo: {
                    n.kind = ExpKind::GoTo;
                    const uint16_t target = (*this)(t->a, uni, reducible_cmp);
                    g.at(uni).clp = target;
                    break;
                }
                case TermKind::NullTail:
                    break;
            }
            return uni;
        }
    } emit{g};

    g.root = emit(t, 0, false);
    return g;
}

namespace {

TermPtr readback_rec(const NodeGraph& g, uint16_t uni, std::set<uint16_t>& path) {
    if (uni == 0) return nullptr;
    if (!g.live(uni)) throw GraphError("dangling child pointer to node " + std::to_string(uni));
    if (!path.insert(uni).second) throw GraphError("cycle through node " + std::to_string(uni));
    const NodeState& n = g.at(uni);
    TermPtr out;
    switch (n.kind) {
        case ExpKind::Name:
            out = n.sym ? name_sym(g.symbol_name(n.payload)) : name_num(n.payload);
            break;
        case ExpKind::Function: {
            if (!g.live(n.clp)) throw GraphError("function node without a binder");
            const NodeState& b = g.at(n.clp);
            TermPtr body = readback_rec(g, n.crp, path);
            if (!body) throw GraphError("function node without a body");
            out = function(g.symbol_name(b.payload), body);
            break;
        }
        case ExpKind::Application: {
            TermPtr f = readback_rec(g, n.clp, path);
            TermPtr x = readback_rec(g, n.crp, path);
            if (!f || !x) throw GraphError("application node missing a child");
            out = application(f, x);
            break;
        }
        case ExpKind::List: {
            TermPtr item = readback_rec(g, n.clp, path);
            TermPtr tail = n.crp ? readback_rec(g, n.crp, path) : null_tail();
            if (!tail) tail = null_tail();
            out = list_cell(item, tail);
            break;
        }
        case ExpKind::Add:
        case ExpKind::Mult:
        case ExpKind::GreatZero:
        case ExpKind::LessZero:
        case ExpKind::EqualZero: {
            TermPtr l = readback_rec(g, n.clp, path);
            TermPtr r = readback_rec(g, n.crp, path);
            if (!l || !r) throw GraphError("operator node missing a child");
            ArithOp op = ArithOp::Add;
            if (n.kind == ExpKind::Mult) op = ArithOp::Mult;
            if (n.kind == ExpKind::GreatZero) op = ArithOp::GreatZero;
            if (n.kind == ExpKind::LessZero) op = ArithOp::LessZero;
            if (n.kind == ExpKind::EqualZero) op = ArithOp::EqualZero;
            out = arith(op, l, r);
            break;
        }
        case ExpKind::GoTo:
            out = readback_rec(g, n.clp, path);
            if (!out) throw GraphError("indirection node without a target");
            break;
        case ExpKind::Free:
            throw GraphError("walked into a free node");
    }
    path.erase(uni);
    return out;
}

} // namespace

TermPtr readback_static(const NodeGraph& g) { return readback_static(g, g.root); }

TermPtr readback_static(const NodeGraph& g, uint16_t from) {
    if (from == 0) throw GraphError("graph has no root");
    std::set<uint16_t> path;
    TermPtr t = readback_rec(g, from, path);
    if (!t) throw GraphError("empty readback");
    return t;
}

std::string dump(const NodeGraph& g) {
    std::ostringstream os;
    for (size_t i = 1; i < g.nodes.size(); ++i) {
        const NodeState& n = g.nodes[i];
        if (n.kind == ExpKind::Free) continue;
        os << n.uni << ' ' << exp_kind_name(n.kind) << ' ';
        if (n.kind == ExpKind::Name && n.sym) os << g.symbol_name(n.payload);
        else os << n.payload;
        os << ' ' << n.clp << ' ' << n.crp << ' ' << (n.rsf ? 1 : 0) << ' ' << (n.rdf ? 1 : 0) << '\n';
    }
    return os.str();
}

} // namespace lamfab
