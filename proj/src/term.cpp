#include "lamfab/term.hpp"

#include <cassert>
#include <sstream>
#include <vector>

namespace lamfab {

namespace {

TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }

bool is_tail_kind(const TermPtr& t) {
    return t && (t->kind == TermKind::ListCell || t->kind == TermKind::NullTail);
}

} // namespace

TermPtr name_num(int value) {
    Term t;
    t.kind = TermKind::Name;
    t.symbolic = false;
    t.value = value;
    return make(std::move(t));
}

TermPtr name_sym(std::string label) {
    Term t;
    t.kind = TermKind::Name;
    t.symbolic = true;
    t.label = std::move(label);
    return make(std::move(t));
}

TermPtr function(std::string binder, TermPtr body) {
    assert(body);
    Term t;
    t.kind = TermKind::Function;
    t.label = std::move(binder);
    t.a = std::move(body);
    return make(std::move(t));
}

TermPtr application(TermPtr fn, TermPtr arg) {
    assert(fn && arg);
    Term t;
    t.kind = TermKind::Application;
    t.a = std::move(fn);
    t.b = std::move(arg);
    return make(std::move(t));
}

TermPtr list_cell(TermPtr item, TermPtr tail) {
    if (!tail) tail = null_tail();
    if (!is_tail_kind(tail)) throw std::logic_error("list tail must be a cell or a null tail");
    Term t;
    t.kind = TermKind::ListCell;
    t.a = std::move(item);
    t.b = std::move(tail);
    return make(std::move(t));
}

TermPtr null_tail() {
    static const TermPtr instance = [] {
        Term t;
        t.kind = TermKind::NullTail;
        return make(std::move(t));
    }();
    return instance;
}

TermPtr arith(ArithOp op, TermPtr left, TermPtr right) {
    assert(left && right);
    Term t;
    t.kind = TermKind::Arith;
    t.op = op;
    t.a = std::move(left);
    t.b = std::move(right);
    return make(std::move(t));
}

TermPtr goto_term(TermPtr target) {
    assert(target);
    Term t;
    t.kind = TermKind::GoTo;
    t.a = std::move(target);
    return make(std::move(t));
}

int wrap_value(long long v, int width) {
    const unsigned long long mask = (width >= 64) ? ~0ull : ((1ull << width) - 1);
    unsigned long long u = static_cast<unsigned long long>(v) & mask;
    const unsigned long long sign = 1ull << (width - 1);
    if (u & sign) return static_cast<int>(static_cast<long long>(u) - static_cast<long long>(mask) - 1);
    return static_cast<int>(u);
}

bool fits_width(long long v, int width) {
    const long long lo = -(1ll << (width - 1));
    const long long hi = (1ll << (width - 1)) - 1;
    return v >= lo && v <= hi;
}

const char* arith_op_token(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return "+";
        case ArithOp::Mult: return "*";
        case ArithOp::GreatZero: return ">";
        case ArithOp::LessZero: return "<";
        case ArithOp::EqualZero: return "==";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
    LParen,
    RParen,
    Dot,
    Lambda,
    Gamma,
    Delta,
    NullSym,
    Name,
    Number,
    ArithPlus,
    ArithStar,
    ArithGt,
    ArithLt,
    ArithEq,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    long long number = 0;
    size_t pos = 0;
};

struct Lexer {
    std::string_view src;
    size_t i = 0;

    bool starts_with(std::string_view s) const { return src.substr(i, s.size()) == s; }

    // Superscript digits after a gamma/delta are annotations, not syntax.
    bool skip_superscript() {
        static const std::string_view sups[] = {
            "⁰", "¹", "²", "³", "⁴",
            "⁵", "⁶", "⁷", "⁸", "⁹"};
        for (auto s : sups) {
            if (starts_with(s)) {
                i += s.size();
                return true;
            }
        }
        return false;
    }

    Token next() {
        while (i < src.size() && (src[i] == ' ' || src[i] == '\t' || src[i] == '\n' || src[i] == '\r'))
            ++i;
        if (i >= src.size()) return {Tok::End, "", 0, i};
        const size_t start = i;
        const char c = src[i];
        if (c == '(') { ++i; return {Tok::LParen, "(", 0, start}; }
        if (c == ')') { ++i; return {Tok::RParen, ")", 0, start}; }
        if (c == '.') { ++i; return {Tok::Dot, ".", 0, start}; }
        if (c == '\\') { ++i; return {Tok::Lambda, "\\", 0, start}; }
        if (starts_with("λ")) { i += 2; return {Tok::Lambda, "λ", 0, start}; }
        if (starts_with("γ")) {
            i += 2;
            while (skip_superscript()) {}
            return {Tok::Gamma, "γ", 0, start};
        }
        if (starts_with("δ")) {
            i += 2;
            while (skip_superscript()) {}
            return {Tok::Delta, "δ", 0, start};
        }
        if (starts_with("∅")) { i += 3; return {Tok::NullSym, "∅", 0, start}; }
        if (c == '/') {
            if (i + 1 < src.size() && src[i + 1] == 'g') {
                i += 2;
                while (skip_superscript()) {}
                return {Tok::Gamma, "/g", 0, start};
            }
            if (i + 1 < src.size() && src[i + 1] == 'd') {
                i += 2;
                while (skip_superscript()) {}
                return {Tok::Delta, "/d", 0, start};
            }
            throw ParseError("unexpected '/'", start);
        }
        if (c == '+') { ++i; return {Tok::ArithPlus, "+", 0, start}; }
        if (c == '*') { ++i; return {Tok::ArithStar, "*", 0, start}; }
        if (starts_with("×")) { i += 2; return {Tok::ArithStar, "×", 0, start}; }
        if (c == '>') { ++i; return {Tok::ArithGt, ">", 0, start}; }
        if (c == '<') { ++i; return {Tok::ArithLt, "<", 0, start}; }
        if (c == '=') {
            ++i;
            if (i < src.size() && src[i] == '=') ++i;
            return {Tok::ArithEq, "==", 0, start};
        }
        if (c == '-' || (c >= '0' && c <= '9')) {
            if (c == '-' && !(i + 1 < src.size() && src[i + 1] >= '0' && src[i + 1] <= '9'))
                throw ParseError("'-' must introduce a numeric literal", start);
            size_t j = i + (c == '-' ? 1 : 0);
            while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
            Token t{Tok::Number, std::string(src.substr(i, j - i)), 0, start};
            t.number = std::stoll(t.text);
            i = j;
            return t;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            size_t j = i;
            while (j < src.size() &&
                   ((src[j] >= 'a' && src[j] <= 'z') || (src[j] >= 'A' && src[j] <= 'Z') ||
                    (src[j] >= '0' && src[j] <= '9') || src[j] == '_' || src[j] == '\''))
                ++j;
            Token t{Tok::Name, std::string(src.substr(i, j - i)), 0, start};
            i = j;
            if (t.text == "null") return {Tok::NullSym, t.text, 0, start};
            return t;
        }
        throw ParseError("unexpected character", start);
    }
};

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    Lexer lex;
    Token tok;
    int width;

    explicit Parser(std::string_view src, int value_width) : lex{src}, width(value_width) {
        tok = lex.next();
    }

    void advance() { tok = lex.next(); }

    void expect(Tok k, const char* what) {
        if (tok.kind != k) throw ParseError(std::string("expected ") + what, tok.pos);
        advance();
    }

    TermPtr number_term(const Token& t) {
        if (!fits_width(t.number, width))
            throw ParseError("numeric literal out of range for value width " + std::to_string(width), t.pos);
        return name_num(static_cast<int>(t.number));
    }

    bool at_atom_start() const {
        switch (tok.kind) {
            case Tok::LParen:
            case Tok::NullSym:
            case Tok::Name:
            case Tok::Number:
            case Tok::Lambda:
                return true;
            default:
                return false;
        }
    }

    // expression := atom+ with left-associative application; a bare lambda
    // extends to the end of the enclosing scope.
    TermPtr parse_expr() {
        std::vector<TermPtr> atoms;
        while (at_atom_start()) {
            if (tok.kind == Tok::Lambda) {
                atoms.push_back(parse_function_body());
                break;
            }
            atoms.push_back(parse_atom());
        }
        if (atoms.empty()) throw ParseError("expected an expression", tok.pos);
        TermPtr t = atoms[0];
        for (size_t k = 1; k < atoms.size(); ++k) t = application(t, atoms[k]);
        return t;
    }

    TermPtr parse_function_body() {
        advance(); // lambda
        if (tok.kind != Tok::Name) throw ParseError("expected a binder name", tok.pos);
        std::string binder = tok.text;
        advance();
        expect(Tok::Dot, "'.' after binder");
        return function(std::move(binder), parse_expr());
    }

    TermPtr parse_atom() {
        switch (tok.kind) {
            case Tok::NullSym:
                advance();
                return null_tail();
            case Tok::Number: {
                Token t = tok;
                advance();
                return number_term(t);
            }
            case Tok::Name: {
                Token t = tok;
                advance();
                return name_sym(t.text);
            }
            case Tok::LParen: {
                advance();
                TermPtr inner = parse_paren_body();
                expect(Tok::RParen, "')'");
                return inner;
            }
            default:
                throw ParseError("expected an expression", tok.pos);
        }
    }

    TermPtr parse_paren_body() {
        switch (tok.kind) {
            case Tok::Lambda:
                return parse_function_body();
            case Tok::Gamma: {
                advance();
                TermPtr item = parse_list_item();
                expect(Tok::Dot, "'.' between list item and tail");
                TermPtr tail = parse_list_tail();
                return list_cell(std::move(item), std::move(tail));
            }
            case Tok::Delta: {
                advance();
                ArithOp op;
                switch (tok.kind) {
                    case Tok::ArithPlus: op = ArithOp::Add; break;
                    case Tok::ArithStar: op = ArithOp::Mult; break;
                    case Tok::ArithGt: op = ArithOp::GreatZero; break;
                    case Tok::ArithLt: op = ArithOp::LessZero; break;
                    case Tok::ArithEq: op = ArithOp::EqualZero; break;
                    default: throw ParseError("expected an operator after the delta", tok.pos);
                }
                advance();
                TermPtr left = parse_expr();
                expect(Tok::Dot, "'.' between operands");
                TermPtr right = parse_expr();
                return arith(op, std::move(left), std::move(right));
            }
            default:
                return parse_expr();
        }
    }

    TermPtr parse_list_item() {
        if (tok.kind == Tok::NullSym) {
            advance();
            return nullptr; // empty item
        }
        return parse_expr();
    }

    TermPtr parse_list_tail() {
        // A bare 0 in tail position is an accepted spelling of the null tail.
        if (tok.kind == Tok::Number && tok.number == 0) {
            advance();
            return null_tail();
        }
        if (tok.kind == Tok::NullSym) {
            advance();
            return null_tail();
        }
        TermPtr t = parse_expr();
        if (t->kind != TermKind::ListCell && t->kind != TermKind::NullTail)
            throw ParseError("list tail must be another list or a null tail", tok.pos);
        return t;
    }
};

void print_rec(const TermPtr& t, std::string& out) {
    if (!t) {
        out += "∅";
        return;
    }
    switch (t->kind) {
        case TermKind::Name:
            if (t->symbolic) out += t->label;
            else out += std::to_string(t->value);
            break;
        case TermKind::Function:
            out += "(λ";
            out += t->label;
            out += ".";
            print_rec(t->a, out);
            out += ")";
            break;
        case TermKind::Application:
            out += "(";
            print_rec(t->a, out);
            out += " ";
            print_rec(t->b, out);
            out += ")";
            break;
        case TermKind::ListCell:
            out += "(γ";
            print_rec(t->a, out);
            out += ".";
            print_rec(t->b, out);
            out += ")";
            break;
        case TermKind::NullTail:
            out += "∅";
            break;
        case TermKind::Arith:
            out += "(δ";
            out += arith_op_token(t->op);
            out += " ";
            print_rec(t->a, out);
            out += ".";
            print_rec(t->b, out);
            out += ")";
            break;
        case TermKind::GoTo:
            out += "→";
            print_rec(t->a, out);
            break;
    }
}

} // namespace

TermPtr parse(std::string_view text, int value_width) {
    Parser p(text, value_width);
    TermPtr t = p.parse_expr();
    if (p.tok.kind != Tok::End) throw ParseError("trailing input after expression", p.tok.pos);
    return t;
}

std::string print(const TermPtr& t) {
    std::string out;
    print_rec(t, out);
    return out;
}

int count_nodes(const TermPtr& t) {
    if (!t) return 0;
    switch (t->kind) {
        case TermKind::Name: return 1;
        case TermKind::NullTail: return 0;
        case TermKind::GoTo: return 1 + count_nodes(t->a);
        case TermKind::Application: return 1 + count_nodes(t->a) + count_nodes(t->b);
        case TermKind::Arith: return 1 + count_nodes(t->a) + count_nodes(t->b);
        case TermKind::ListCell: return 1 + count_nodes(t->a) + count_nodes(t->b);
        case TermKind::Function: return 2 + count_nodes(t->a);
    }
    return 0;
}

bool structurally_equal(const TermPtr& x, const TermPtr& y) {
    if (x == y) return true;
    if (!x || !y) {
        // A missing list item and an explicit null tail are the same shape.
        const TermPtr& p = x ? x : y;
        return p && p->kind == TermKind::NullTail;
    }
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case TermKind::Name:
            if (x->symbolic != y->symbolic) return false;
            return x->symbolic ? x->label == y->label : x->value == y->value;
        case TermKind::Function:
            return x->label == y->label && structurally_equal(x->a, y->a);
        case TermKind::NullTail:
            return true;
        case TermKind::Arith:
            if (x->op != y->op) return false;
            [[fallthrough]];
        case TermKind::Application:
        case TermKind::ListCell:
            return structurally_equal(x->a, y->a) && structurally_equal(x->b, y->b);
        case TermKind::GoTo:
            return structurally_equal(x->a, y->a);
    }
    return false;
}

} // namespace lamfab
