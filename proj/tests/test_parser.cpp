#include <doctest.h>

#include "rmleq/parser.hpp"
#include "rmleq/typecheck.hpp"

using namespace rmleq;

TEST_CASE("unit literal") {
  TermPtr t = parse_term("()");
  CHECK(t->kind == TermKind::Unit);
}

TEST_CASE("the running example parses") {
  TermPtr t = parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
  REQUIRE(t->kind == TermKind::Let);
  CHECK(t->name == "c");
  CHECK(t->kids[0]->kind == TermKind::Ref);
  REQUIRE(t->kids[1]->kind == TermKind::Lambda);
  const TermPtr& body = t->kids[1]->kids[0];
  REQUIRE(body->kind == TermKind::Cond);
  CHECK(body->kids[0]->kind == TermKind::IntEq);
  CHECK(body->kids[2]->kind == TermKind::Omega);
}

TEST_CASE("lambda without a dot is a syntax error with a position") {
  try {
    parse_term("λx:unit x");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("comments and ascii lambda") {
  TermPtr t = parse_term("(* a comment (* nested *) *) \\f:unit -> unit. f ()");
  CHECK(t->kind == TermKind::Lambda);
}

TEST_CASE("typing the examples") {
  Context ctx = {{"x", RmlType::intref_t()}, {"y", RmlType::int_t()}};
  TermPtr t = typecheck(parse_term("x := y"), ctx, 3);
  CHECK(t->type->kind == TypeKind::Unit);

  TermPtr mv = typecheck(parse_term("mkvar(λx:unit. 0, λy:int. ())"), {}, 3);
  CHECK(mv->type->kind == TypeKind::IntRef);

  CHECK_THROWS_AS(typecheck(parse_term("succ ()"), {}, 3), TypeError);
  CHECK_THROWS_AS(typecheck(parse_term("5"), {}, 3), TypeError); // literal >= k
  CHECK_THROWS_AS(typecheck(parse_term("z"), {}, 3), TypeError); // unbound
}

TEST_CASE("desugaring preserves typing") {
  Context ctx = {{"f", parse_type("unit -> unit")}};
  // let x = M in N against its expansion (λx.N) M
  TermPtr sugar = typecheck(parse_term("let x = f () in x"), ctx, 3);
  TermPtr manual = typecheck(parse_term("(λx:unit. x) (f ())"), ctx, 3);
  CHECK(type_equal(sugar->type, manual->type));
  // seq
  TermPtr s2 = typecheck(parse_term("f (); ()"), ctx, 3);
  CHECK(s2->type->kind == TypeKind::Unit);
  // a sugar term fails iff its expansion fails
  CHECK_THROWS_AS(typecheck(parse_term("let x = f () in succ x"), ctx, 3), TypeError);
  CHECK_THROWS_AS(typecheck(parse_term("(λx:unit. succ x) (f ())"), ctx, 3), TypeError);
}

TEST_CASE("equality desugars to a finite case split") {
  TermPtr t = typecheck(parse_term("1 = 1"), {}, 3);
  CHECK(t->type->kind == TypeKind::Int);
  CHECK(t->kind == TermKind::App); // let-bound case split
}

TEST_CASE("omega defaults to unit and adopts int from context") {
  TermPtr u = typecheck(parse_term("Ω"), {}, 3);
  CHECK(u->type->kind == TypeKind::Unit);
  TermPtr i = typecheck(parse_term("if 1 then 0 else omega"), {}, 3);
  CHECK(i->type->kind == TypeKind::Int);
  CHECK_THROWS_AS(typecheck(parse_term("(λg:unit -> unit. ()) Ω"), {}, 3), TypeError);
}

TEST_CASE("json dump mentions kinds and types") {
  TermPtr t = typecheck(parse_term("succ 1"), {}, 3);
  std::string j = term_to_json(t);
  CHECK(j.find("\"kind\"") != std::string::npos);
  CHECK(j.find("\"type\"") != std::string::npos);
}
