#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "lamfab/term.hpp"

using namespace lamfab;

TEST_CASE("parsing the arithmetic forms") {
    TermPtr t = parse("(δ+ 1.1)");
    REQUIRE(t->kind == TermKind::Arith);
    CHECK(t->op == ArithOp::Add);
    CHECK(t->a->kind == TermKind::Name);
    CHECK_FALSE(t->a->symbolic);
    CHECK(t->a->value == 1);
    CHECK(t->b->value == 1);

    CHECK(parse("(δ* 3.3)")->op == ArithOp::Mult);
    CHECK(parse("(δ× 3.3)")->op == ArithOp::Mult);
    CHECK(parse("(δ> a.b)")->op == ArithOp::GreatZero);
    CHECK(parse("(δ< a.b)")->op == ArithOp::LessZero);
    CHECK(parse("(δ== a.b)")->op == ArithOp::EqualZero);
    CHECK(parse("(δ= a.b)")->op == ArithOp::EqualZero);
    CHECK(parse("(/d+ 2.3)")->op == ArithOp::Add);
}

TEST_CASE("parsing lists") {
    TermPtr t = parse("(γ a.(γ b.∅))");
    REQUIRE(t->kind == TermKind::ListCell);
    CHECK(t->a->label == "a");
    REQUIRE(t->b->kind == TermKind::ListCell);
    CHECK(t->b->a->label == "b");
    CHECK(t->b->b->kind == TermKind::NullTail);

    // A bare 0 in tail position is the null tail, not the number zero.
    CHECK(parse("(γ a.(γ b.0))")->b->b->kind == TermKind::NullTail);
    // Digit annotations on γ/δ are decorative.
    CHECK(structurally_equal(parse("(γ¹ b.(γ⁰ a.∅))"), parse("(γ b.(γ a.∅))")));
    CHECK(parse("(/g a.null)")->kind == TermKind::ListCell);
    // An explicitly empty item slot.
    CHECK(parse("(γ ∅.∅)")->a == nullptr);
}

TEST_CASE("application and function syntax") {
    TermPtr t = parse("(λf.f) a");
    REQUIRE(t->kind == TermKind::Application);
    CHECK(t->a->kind == TermKind::Function);
    CHECK(t->a->label == "f");

    // Juxtaposition associates left.
    TermPtr u = parse("f g h");
    REQUIRE(u->kind == TermKind::Application);
    CHECK(u->a->kind == TermKind::Application);
    CHECK(u->b->label == "h");

    // An unparenthesized lambda body extends to the end of its scope.
    TermPtr v = parse("λx.x x");
    REQUIRE(v->kind == TermKind::Function);
    CHECK(v->a->kind == TermKind::Application);

    CHECK(parse("(\\x.x)")->kind == TermKind::Function);
    CHECK(parse("(δ< a.b) -1")->b->value == -1);
}

TEST_CASE("node costs") {
    CHECK(count_nodes(parse("(δ+ 1.1)")) == 3);
    CHECK(count_nodes(parse("(δ+ (δ+ 1.1).(δ+ 1.1))")) == 7);
    CHECK(count_nodes(parse("(δ* 3.3)")) == 3);
    CHECK(count_nodes(parse("(δ< a.b) -1")) == 5);
    CHECK(count_nodes(parse("(δ== a.b) 0")) == 5);
    CHECK(count_nodes(parse("(δ> a.b) 1")) == 5);
    CHECK(count_nodes(parse("(λf.f)(γ a.(γ b.0))")) == 8);
    CHECK(count_nodes(parse("(λf.f)(γ(δ+ 3.3).(γ(δ* 3.3).0))")) == 12);
    CHECK(count_nodes(parse("(γ(λf.f).(γ(λf.e).0)) a")) == 10);
}

TEST_CASE("the increment graph costs 21 nodes") {
    CHECK(count_nodes(parse("(λn.(λf.(λx.f((n f) x)))) (λf.(λx.f x))")) == 21);
}

TEST_CASE("function cost is two nodes plus the body") {
    CHECK(count_nodes(parse("(λf.f)")) == 3);
    CHECK(count_nodes(parse("(λf.(λg.f))")) == 5);
    CHECK(count_nodes(name_num(4)) == 1);
    CHECK(count_nodes(parse("(γ a.∅)")) == 2); // cell + item; null tail is free
}

TEST_CASE("print and parse round-trip") {
    const char* samples[] = {
        "(δ+ 1.1)",
        "(δ+ (δ+ 1.1).(δ+ 1.1))",
        "((δ< a.b) -1)",
        "((λf.f) (γa.(γb.∅)))",
        "((γ(λf.f).(γ(λf.e).∅)) a)",
        "(λx.(λy.(x (y x))))",
        "(γ∅.(γa.∅))",
    };
    for (const char* s : samples) {
        TermPtr t = parse(s);
        TermPtr again = parse(print(t));
        CHECK_MESSAGE(structurally_equal(t, again), s);
    }
}

TEST_CASE("round-trip holds for generated terms") {
    testgen::Gen gen(2026);
    for (int i = 0; i < 200; ++i) {
        TermPtr t = gen.next().term;
        TermPtr again = parse(print(t));
        CHECK_MESSAGE(structurally_equal(t, again), print(t));
    }
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse("(δ+ 1 1)"), ParseError);
    CHECK_THROWS_AS(parse("(γ a)"), ParseError);
    CHECK_THROWS_AS(parse("(λf f)"), ParseError);
    CHECK_THROWS_AS(parse("(a"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("a)"), ParseError);
    CHECK_THROWS_AS(parse("(γ a.b)"), ParseError); // tail must be a cell or null

    try {
        parse("(δ+ 1 1)");
    } catch (const ParseError& e) {
        CHECK(e.position > 0);
    }
}

TEST_CASE("values must fit the configured width") {
    CHECK(parse("(δ+ 127.1)", 8)->a->value == 127);
    CHECK_THROWS_AS(parse("(δ+ 128.1)", 8), ParseError);
    CHECK_THROWS_AS(parse("(δ+ 999.1)", 8), ParseError);
    CHECK_THROWS_AS(parse("(δ+ 8.1)", 4), ParseError);
    CHECK(parse("(δ+ -8.1)", 4)->a->value == -8);
}

TEST_CASE("two's complement wrap") {
    CHECK(wrap_value(127 + 1, 8) == -128);
    CHECK(wrap_value(-128 - 1, 8) == 127);
    CHECK(wrap_value(7 + 1, 4) == -8);
    CHECK(wrap_value(3 * 3, 4) == -7);
    CHECK(wrap_value(5, 8) == 5);
    CHECK(fits_width(127, 8));
    CHECK_FALSE(fits_width(128, 8));
}

TEST_CASE("structural equality treats a missing item as a null tail") {
    CHECK(structurally_equal(parse("(γ ∅.∅)"), parse("(γ ∅.∅)")));
    CHECK_FALSE(structurally_equal(parse("(γ a.∅)"), parse("(γ b.∅)")));
    CHECK_FALSE(structurally_equal(parse("(δ+ 1.2)"), parse("(δ+ 2.1)")));
}

TEST_CASE("indirections print but do not parse") {
    TermPtr g = goto_term(name_sym("a"));
    CHECK(print(g).find("→") != std::string::npos);
    CHECK(count_nodes(g) == 2);
}
