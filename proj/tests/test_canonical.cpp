#include <doctest.h>

#include "rmleq/canonical.hpp"
#include "rmleq/parser.hpp"
#include "rmleq/typecheck.hpp"

using namespace rmleq;

namespace {
CanPtr canon_of(const std::string& src, const Context& ctx = {}, int k = 3) {
  return canonicalize(typecheck(parse_term(src), ctx, k), ctx);
}
} // namespace

TEST_CASE("operands become variables") {
  CanPtr c = canon_of("succ 3", {}, 5);
  REQUIRE(c->kind == CanKind::LetBase);
  CHECK(c->kids[0]->kind == CanKind::Lit);
  CHECK(c->kids[0]->lit == 3);
  REQUIRE(c->kids[1]->kind == CanKind::Succ);
  CHECK(c->kids[1]->var == c->binder);
}

TEST_CASE("the running example lands in the grammar") {
  Context ctx;
  CanPtr c = canon_of("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω", ctx, 2);
  REQUIRE(c->kind == CanKind::RefLet);
  CHECK(c->kids[0]->kind == CanKind::Lambda);
  CHECK(validate_canonical(embed_canonical(c), ctx));
  CHECK(type_equal(c->type, parse_type("unit -> unit")));
}

TEST_CASE("calls through context variables") {
  Context ctx = {{"f", parse_type("unit -> unit")}};
  CanPtr c = canon_of("f ()", ctx);
  CHECK(validate_canonical(embed_canonical(c), ctx));
  CHECK(c->type->kind == TypeKind::Unit);
  // shape: a let binding () then let r = f t in r
  REQUIRE(c->kind == CanKind::LetBase);
  CHECK(c->kids[1]->kind == CanKind::LetAppBase);
}

TEST_CASE("higher-type redexes are reduced away") {
  CanPtr c = canon_of("(λg:unit -> unit. g ()) (λw:unit. w)");
  CHECK(validate_canonical(embed_canonical(c), {}));
  CHECK(c->type->kind == TypeKind::Unit);
}

TEST_CASE("references eta-expand to bad variables where needed") {
  Context ctx = {{"r", RmlType::intref_t()}};
  CanPtr c = canon_of("r", ctx);
  REQUIRE(c->kind == CanKind::Mkvar);
  CHECK(c->kids[0]->kind == CanKind::Deref);
  CHECK(c->kids[1]->kind == CanKind::Assign);
  CHECK(validate_canonical(embed_canonical(c), ctx));
}

TEST_CASE("nonzero initialisation becomes an explicit write") {
  CanPtr c = canon_of("let r = ref 2 in !r", {}, 3);
  // let t = 2 in let r = ref 0 in let _ = r := t in !r
  REQUIRE(c->kind == CanKind::LetBase);
  REQUIRE(c->kids[1]->kind == CanKind::RefLet);
  const CanPtr& body = c->kids[1]->kids[0];
  REQUIRE(body->kind == CanKind::LetBase);
  CHECK(body->kids[0]->kind == CanKind::Assign);
  CHECK(validate_canonical(embed_canonical(c), {}));
}

TEST_CASE("validation rejects compound guards") {
  Context ctx = {{"x", RmlType::int_t()}};
  TermPtr bad = parse_term("if succ x then () else ()");
  CHECK(!validate_canonical(bad, ctx));
  TermPtr good = parse_term("if x then () else ()");
  CHECK(validate_canonical(good, ctx));
}

TEST_CASE("validation accepts function application binding") {
  Context ctx = {{"z", parse_type("(unit -> unit) -> unit")}};
  CHECK(validate_canonical(parse_term("let x = z (λw:unit. w) in x"), ctx));
  CHECK(!validate_canonical(parse_term("let x = z (succ 1) in x"), ctx));
}

TEST_CASE("canonicalization is idempotent and type preserving") {
  Context ctx = {{"f", parse_type("unit -> unit")}, {"v", RmlType::int_t()},
                 {"r", RmlType::intref_t()}};
  const char* corpus[] = {
      "succ (succ v)",
      "let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω",
      "f (); f ()",
      "if v then !r else 0",
      "while !r do r := pred (!r)",
      "mkvar(λu:unit. !r, λw:int. r := w)",
      "let g = f in g ()",
  };
  for (const char* src : corpus) {
    TermPtr typed = typecheck(parse_term(src), ctx, 3);
    CanPtr once = canonicalize(typed, ctx);
    CHECK(type_equal(once->type, typed->type));
    CHECK(validate_canonical(embed_canonical(once), ctx));
    TermPtr back = typecheck(embed_canonical(once), ctx, 3);
    CanPtr twice = canonicalize(back, ctx);
    CHECK(canonical_to_string(once) == canonical_to_string(twice));
  }
}

TEST_CASE("the pretty-printer round-trips through the parser") {
  Context ctx = {{"f", parse_type("unit -> unit")}, {"r", RmlType::intref_t()}};
  const char* corpus[] = {
      "let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω",
      "f (); r := 1",
      "mkvar(λu:unit. !r, λw:int. r := w)",
  };
  for (const char* src : corpus) {
    CanPtr once = canon_of(src, ctx, 2);
    std::string printed = canonical_to_string(once);
    TermPtr reparsed = parse_term(printed);
    CanPtr again = canonicalize(typecheck(reparsed, ctx, 2), ctx);
    CHECK(canonical_to_string(again) == printed);
  }
}

TEST_CASE("deterministic output") {
  Context ctx = {{"f", parse_type("unit -> unit")}};
  CHECK(canonical_to_string(canon_of("f (); f ()", ctx)) ==
        canonical_to_string(canon_of("f (); f ()", ctx)));
}
