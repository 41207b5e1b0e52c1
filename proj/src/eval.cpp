#include "lamfab/eval.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace lamfab {

namespace {

bool is_numeric_name(const TermPtr& t) {
    return t && t->kind == TermKind::Name && !t->symbolic;
}

bool is_cmp(ArithOp op) {
    return op == ArithOp::GreatZero || op == ArithOp::LessZero || op == ArithOp::EqualZero;
}

void collect_labels(const TermPtr& t, std::set<std::string>& out) {
    if (!t) return;
    if (t->kind == TermKind::Name && t->symbolic) out.insert(t->label);
    if (t->kind == TermKind::Function) out.insert(t->label);
    collect_labels(t->a, out);
    collect_labels(t->b, out);
}

void free_labels(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
    if (!t) return;
    switch (t->kind) {
        case TermKind::Name:
            if (t->symbolic && !bound.count(t->label)) out.insert(t->label);
            return;
        case TermKind::Function: {
            const bool added = bound.insert(t->label).second;
            free_labels(t->a, bound, out);
            if (added) bound.erase(t->label);
            return;
        }
        default:
            free_labels(t->a, bound, out);
            free_labels(t->b, bound, out);
            return;
    }
}

std::set<std::string> free_labels(const TermPtr& t) {
    std::set<std::string> bound, out;
    free_labels(t, bound, out);
    return out;
}

struct Reducer {
    EvalConfig cfg;
    long steps = 0;
    int fresh_counter = 0;
    bool suspended = false;

    void bump() {
        if (++steps > cfg.max_steps) throw EvalError("step budget exhausted (likely divergence)");
    }

    std::string fresh(const std::string& base, const std::set<std::string>& avoid) {
        for (;;) {
            std::string cand = base + "_" + std::to_string(cfg.fresh_seed * 1000 + fresh_counter++);
            if (!avoid.count(cand)) return cand;
        }
    }

    TermPtr subst(const TermPtr& t, const std::string& x, const TermPtr& arg) {
        if (!t) return t;
        switch (t->kind) {
            case TermKind::Name:
                if (t->symbolic && t->label == x) return arg;
                return t;
            case TermKind::NullTail:
                return t;
            case TermKind::Function: {
                if (t->label == x) return t; // shadowed
                const auto fv = free_labels(arg);
                if (fv.count(t->label)) {
                    // Capture: rename the binder before substituting.
                    std::set<std::string> avoid = fv;
                    collect_labels(t->a, avoid);
                    avoid.insert(x);
                    const std::string nb = fresh(t->label, avoid);
                    TermPtr body = subst(t->a, t->label, name_sym(nb));
                    return function(nb, subst(body, x, arg));
                }
                return function(t->label, subst(t->a, x, arg));
            }
            case TermKind::Application:
                return application(subst(t->a, x, arg), subst(t->b, x, arg));
            case TermKind::ListCell:
                return list_cell(subst(t->a, x, arg), subst(t->b, x, arg));
            case TermKind::Arith:
                return arith(t->op, subst(t->a, x, arg), subst(t->b, x, arg));
            case TermKind::GoTo:
                return goto_term(subst(t->a, x, arg));
        }
        return t;
    }

    // Replaces every activated list chain by its active item, front to back.
    // Chains the configured depth cannot address are left in place and mark
    // the result suspended.
    TermPtr collapse(const TermPtr& t) {
        if (!t) return t;
        if (t->kind == TermKind::ListCell) {
            std::vector<TermPtr> items;
            TermPtr cell = t;
            while (cell && cell->kind == TermKind::ListCell) {
                items.push_back(cell->a);
                cell = cell->b;
            }
            const int len = static_cast<int>(items.size());
            if (cfg.activated_depth) {
                const int d = *cfg.activated_depth;
                // Structural depths count from the innermost cell, so the
                // head of the chain sits at depth len-1.
                const int index_from_head =
                    cfg.depth_origin == DepthOrigin::Innermost ? len - 1 - d : d;
                if (d >= 0 && index_from_head >= 0 && index_from_head < len) {
                    bump();
                    TermPtr item = items[static_cast<size_t>(index_from_head)];
                    if (!item) return null_tail();
                    return collapse(item);
                }
                suspended = true;
            }
            TermPtr rebuilt = null_tail();
            for (auto it = items.rbegin(); it != items.rend(); ++it)
                rebuilt = list_cell(collapse(*it), rebuilt);
            return rebuilt;
        }
        switch (t->kind) {
            case TermKind::Function:
                return function(t->label, collapse(t->a));
            case TermKind::Application:
                return application(collapse(t->a), collapse(t->b));
            case TermKind::Arith:
                return arith(t->op, collapse(t->a), collapse(t->b));
            case TermKind::GoTo:
                return goto_term(collapse(t->a));
            default:
                return t;
        }
    }

    // One leftmost-outermost step; null when t is in normal form.
    std::optional<TermPtr> step(const TermPtr& t) {
        if (!t) return std::nullopt;
        switch (t->kind) {
            case TermKind::Name:
            case TermKind::NullTail:
                return std::nullopt;
            case TermKind::GoTo:
                return t->a;
            case TermKind::Function:
                if (auto b = step(t->a)) return function(t->label, *b);
                return std::nullopt;
            case TermKind::Application: {
                const TermPtr& f = t->a;
                if (f->kind == TermKind::Function) return subst(f->a, f->label, t->b);
                if (f->kind == TermKind::Arith && is_cmp(f->op)) {
                    // The comparison consumes the applied value as soon as it
                    // is numeric; the branches are never normalized first.
                    if (is_numeric_name(t->b)) {
                        const int v = t->b->value;
                        bool take_left = false;
                        switch (f->op) {
                            case ArithOp::GreatZero: take_left = v > 0; break;
                            case ArithOp::LessZero: take_left = v < 0; break;
                            case ArithOp::EqualZero: take_left = v == 0; break;
                            default: break;
                        }
                        return take_left ? f->a : f->b;
                    }
                    if (t->b->kind == TermKind::Name)
                        throw EvalError("comparison applied to a symbolic name");
                    if (auto x = step(t->b)) return application(f, *x);
                    throw EvalError("comparison applied to a value that is not a name");
                }
                if (auto g = step(f)) return application(*g, t->b);
                if (auto x = step(t->b)) return application(f, *x);
                return std::nullopt;
            }
            case TermKind::Arith: {
                if (t->op == ArithOp::Add || t->op == ArithOp::Mult) {
                    if (is_numeric_name(t->a) && is_numeric_name(t->b)) {
                        const long long raw = t->op == ArithOp::Add
                            ? static_cast<long long>(t->a->value) + t->b->value
                            : static_cast<long long>(t->a->value) * t->b->value;
                        return name_num(wrap_value(raw, cfg.value_width));
                    }
                    if (auto l = step(t->a)) return arith(t->op, *l, t->b);
                    if (auto r = step(t->b)) return arith(t->op, t->a, *r);
                    throw EvalError("add/mult operand is not a numeric name");
                }
                if (auto l = step(t->a)) return arith(t->op, *l, t->b);
                if (auto r = step(t->b)) return arith(t->op, t->a, *r);
                return std::nullopt;
            }
            case TermKind::ListCell: {
                if (auto i = step(t->a)) return list_cell(*i, t->b);
                if (auto tail = step(t->b)) return list_cell(t->a, *tail);
                return std::nullopt;
            }
        }
        return std::nullopt;
    }
};

TermPtr church_numeral(int n) {
    TermPtr body = name_sym("x");
    for (int i = 0; i < n; ++i) body = application(name_sym("f"), body);
    return function("f", function("x", body));
}

TermPtr church_plus() {
    // \m.\n.\f.\x.(m f)((n f) x)
    TermPtr body = application(application(name_sym("m"), name_sym("f")),
                               application(application(name_sym("n"), name_sym("f")), name_sym("x")));
    return function("m", function("n", function("f", function("x", body))));
}

TermPtr church_mult() {
    // \m.\n.\f.(m (n f))
    TermPtr body = application(name_sym("m"), application(name_sym("n"), name_sym("f")));
    return function("m", function("n", function("f", body)));
}

} // namespace

EvalResult reduce(TermPtr t, const EvalConfig& cfg) {
    Reducer r{cfg};
    TermPtr cur = r.collapse(t);
    for (;;) {
        auto next = r.step(cur);
        if (!next) break;
        r.bump();
        cur = *next;
    }
    return {cur, r.steps, r.suspended};
}

TermPtr church_expand(const TermPtr& t) {
    if (!t) throw EvalError("empty term has no numeral encoding");
    switch (t->kind) {
        case TermKind::Name:
            if (t->symbolic) return t;
            if (t->value < 0) throw EvalError("negative values have no numeral encoding");
            return church_numeral(t->value);
        case TermKind::Function:
            return function(t->label, church_expand(t->a));
        case TermKind::Application:
            return application(church_expand(t->a), church_expand(t->b));
        case TermKind::Arith: {
            if (t->op == ArithOp::Add)
                return application(application(church_plus(), church_expand(t->a)), church_expand(t->b));
            if (t->op == ArithOp::Mult)
                return application(application(church_mult(), church_expand(t->a)), church_expand(t->b));
            throw EvalError("comparisons have no numeral encoding");
        }
        default:
            throw EvalError("lists and indirections have no numeral encoding");
    }
}

int alt_node_count(const TermPtr& t) { return count_nodes(church_expand(t)); }

namespace {

bool alpha_rec(const TermPtr& x, const TermPtr& y,
               std::map<std::string, int>& bx, std::map<std::string, int>& by, int& counter) {
    if (!x || !y) {
        if (!x && !y) return true;
        const TermPtr& p = x ? x : y;
        return p->kind == TermKind::NullTail; // missing item vs explicit null tail
    }
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case TermKind::Name: {
            if (x->symbolic != y->symbolic) return false;
            if (!x->symbolic) return x->value == y->value;
            auto ix = bx.find(x->label);
            auto iy = by.find(y->label);
            if ((ix == bx.end()) != (iy == by.end())) return false;
            if (ix == bx.end()) return x->label == y->label; // both free
            return ix->second == iy->second;
        }
        case TermKind::NullTail:
            return true;
        case TermKind::Function: {
            const int id = counter++;
            auto ox = bx.find(x->label); std::optional<int> px;
            if (ox != bx.end()) px = ox->second;
            auto oy = by.find(y->label); std::optional<int> py;
            if (oy != by.end()) py = oy->second;
            bx[x->label] = id;
            by[y->label] = id;
            const bool ok = alpha_rec(x->a, y->a, bx, by, counter);
            if (px) bx[x->label] = *px; else bx.erase(x->label);
            if (py) by[y->label] = *py; else by.erase(y->label);
            return ok;
        }
        case TermKind::Arith:
            if (x->op != y->op) return false;
            [[fallthrough]];
        case TermKind::Application:
        case TermKind::ListCell:
            return alpha_rec(x->a, y->a, bx, by, counter) &&
                   alpha_rec(x->b, y->b, bx, by, counter);
        case TermKind::GoTo:
            return alpha_rec(x->a, y->a, bx, by, counter);
    }
    return false;
}

} // namespace

bool alpha_equal(const TermPtr& x, const TermPtr& y) {
    std::map<std::string, int> bx, by;
    int counter = 0;
    return alpha_rec(x, y, bx, by, counter);
}

} // namespace lamfab
