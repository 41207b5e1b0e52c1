#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lamfab {

// Expression tree for the extended calculus: plain lambda terms plus list
// cells, arithmetic/comparison operators and the GoTo indirection produced
// by reduction.
enum class TermKind { Name, Function, Application, ListCell, NullTail, Arith, GoTo };

enum class ArithOp { Add, Mult, GreatZero, LessZero, EqualZero };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    TermKind kind;
    // Name: either a numeric value (two's complement, value_width bits) or a
    // symbolic label. Function: `label` is the binder.
    bool symbolic = false;
    int value = 0;
    std::string label;
    // Function: a = body. Application: a = operator, b = operand.
    // ListCell: a = item (null pointer encodes an empty item), b = tail
    // (always ListCell or NullTail). Arith: a = left, b = right.
    // GoTo: a = target.
    TermPtr a;
    TermPtr b;
    ArithOp op = ArithOp::Add;
};

TermPtr name_num(int value);
TermPtr name_sym(std::string label);
TermPtr function(std::string binder, TermPtr body);
TermPtr application(TermPtr fn, TermPtr arg);
TermPtr list_cell(TermPtr item, TermPtr tail);
TermPtr null_tail();
TermPtr arith(ArithOp op, TermPtr left, TermPtr right);
TermPtr goto_term(TermPtr target);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t position)
        : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
          position(position) {}
    size_t position;
};

// Parses the surface syntax. Accepts the UTF-8 symbols and their ASCII
// aliases: `\` for lambda, `/g` for gamma, `/d` for delta, `null` for the
// empty-tail symbol. Numeric literals are range-checked against value_width.
TermPtr parse(std::string_view text, int value_width = 8);

// Canonical printer; parse(print(t)) is structurally identical to t for any
// parseable term.
std::string print(const TermPtr& t);

// Fabric cost of a term: one node per name/application/cell/operator, two
// per function (the function node plus its binder name node), none for a
// null tail.
int count_nodes(const TermPtr& t);

bool structurally_equal(const TermPtr& x, const TermPtr& y);

// Two's complement helpers shared by the evaluator and the ALU.
int wrap_value(long long v, int width);
bool fits_width(long long v, int width);

const char* arith_op_token(ArithOp op);

} // namespace lamfab
