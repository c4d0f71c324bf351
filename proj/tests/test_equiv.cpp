#include <doctest.h>

#include "rmleq/equiv.hpp"
#include "rmleq/parser.hpp"

using namespace rmleq;

namespace {

Verdict run(const std::string& m, const std::string& n, const Context& ctx, int k = 2) {
  DecideOptions opts;
  opts.k = k;
  return decide(parse_term(m), parse_term(n), ctx, opts);
}

} // namespace

TEST_CASE("identical behaviour after sequencing a unit call") {
  Context ctx = {{"f", parse_type("unit -> unit")}};
  CHECK(run("f ()", "f (); ()", ctx).kind == Verdict::Equivalent);
}

TEST_CASE("wraparound makes succ of pred the identity") {
  CHECK(run("λx:int. x", "λx:int. succ (pred x)", {}, 3).kind == Verdict::Equivalent);
}

TEST_CASE("the cell term differs from pure divergence") {
  Verdict v = run("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω", "λy:unit. Ω", {});
  REQUIRE(v.kind == Verdict::Inequivalent);
  REQUIRE(v.witness.has_value());
  CHECK(v.witness->positions.size() == 4);
  CHECK(v.witness_text == "q0@0 a0@0 q1@1(0) a1@1(0)");
  // the oracle confirms the witness at its length
  Wndcma a = compile_term(parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω"),
                          {}, 2, Encoding::RForml);
  Wndcma b = compile_term(parse_term("λy:unit. Ω"), {}, 2, Encoding::RForml);
  CHECK(accepts(a, *v.witness));
  CHECK(!accepts(b, *v.witness));
}

TEST_CASE("bad-variable contexts observe a double read") {
  Context ctx = {{"x", RmlType::intref_t()}};
  Verdict v = run("!x", "!x; !x", ctx);
  CHECK(v.kind == Verdict::Inequivalent);
  REQUIRE(v.witness.has_value());
  Wndcma a = compile_term(parse_term("!x"), ctx, 2, Encoding::RForml);
  Wndcma b = compile_term(parse_term("!x; !x"), ctx, 2, Encoding::RForml);
  CHECK(accepts(a, *v.witness) != accepts(b, *v.witness));
}

TEST_CASE("verdicts agree with the bounded oracle") {
  Context ctx = {{"f", parse_type("unit -> unit")}, {"r", RmlType::intref_t()}};
  struct Pair {
    const char* m;
    const char* n;
  } pairs[] = {
      {"f ()", "f (); ()"},
      {"!r", "!r; !r"},
      {"r := 0", "r := 0; r := 0"},
      {"λy:unit. f ()", "λy:unit. (f (); ())"},
      {"while 0 do ()", "()"},
      {"if 1 then () else Ω", "()"},
  };
  DecideOptions opts;
  opts.k = 2;
  for (auto& p : pairs) {
    Verdict v = decide(parse_term(p.m), parse_term(p.n), ctx, opts);
    REQUIRE(v.kind != Verdict::Unknown);
    Wndcma a = compile_term(parse_term(p.m), ctx, 2, Encoding::RForml);
    Wndcma b = compile_term(parse_term(p.n), ctx, 2, Encoding::RForml);
    auto diff = bounded_language_equal(a, b, 6);
    INFO(p.m << "  vs  " << p.n);
    if (v.kind == Verdict::Equivalent) CHECK(!diff.has_value());
    else CHECK(diff.has_value());
  }
}

TEST_CASE("decide is reflexive and symmetric") {
  Context ctx = {{"r", RmlType::intref_t()}};
  const char* terms[] = {"!r", "succ (!r)", "if !r then 1 else 0"};
  DecideOptions opts;
  opts.k = 2;
  for (const char* m : terms) {
    CHECK(decide(parse_term(m), parse_term(m), ctx, opts).kind == Verdict::Equivalent);
    for (const char* n : terms) {
      Verdict mn = decide(parse_term(m), parse_term(n), ctx, opts);
      Verdict nm = decide(parse_term(n), parse_term(m), ctx, opts);
      CHECK(mn.kind == nm.kind);
    }
  }
}

TEST_CASE("undecidable sequents are rejected with the reason") {
  Verdict v = run("λf:(unit -> unit). λx:unit. f x", "λf:(unit -> unit). λx:unit. f x", {});
  CHECK(v.kind == Verdict::NotDecidableFragment);
  REQUIRE(v.reason.has_value());
  CHECK(*v.reason == UndecidableReason::NonFinalFirstOrderArg);
}

TEST_CASE("the fragment choice respects the flags") {
  // context type with an arity-two argument: P-strict but not restricted
  Context ctx = {{"f", parse_type("(int -> int -> int) -> int")}};
  DecideOptions opts;
  opts.k = 2;
  opts.fragment = Fragment::RForml;
  Verdict v = decide(parse_term("()"), parse_term("()"), ctx, opts);
  CHECK(v.kind == Verdict::NotDecidableFragment);
  opts.fragment = Fragment::PStrict;
  CHECK(decide(parse_term("()"), parse_term("()"), ctx, opts).kind == Verdict::Equivalent);
  opts.fragment = Fragment::Auto;
  CHECK(decide(parse_term("()"), parse_term("()"), ctx, opts).kind == Verdict::Equivalent);
}

TEST_CASE("bounded comparison returns the first difference") {
  Wndcma a = compile_term(parse_term("λy:unit. ()"), {}, 2, Encoding::RForml);
  CHECK(!bounded_language_equal(a, a, 6).has_value());
  Wndcma b = compile_term(parse_term("λy:unit. Ω"), {}, 2, Encoding::RForml);
  auto d = bounded_language_equal(a, b, 6);
  REQUIRE(d.has_value());
  CHECK(d->positions.size() == 4); // the first completed call
}

TEST_CASE("an accepting state that never ends a run does not matter") {
  // drop the root-memory state from the finals: no difference up to length 6
  Wndcma a = compile_term(parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω"),
                          {}, 2, Encoding::RForml);
  Wndcma b = a;
  for (State s = 0; s < b.num_states(); ++s) {
    bool is_control_target = s == b.initial;
    for (const Trans& t : b.trans)
      if (t.dst == s) is_control_target = true;
    if (!is_control_target) b.finals[s] = 0;
  }
  CHECK(!bounded_language_equal(a, b, 6).has_value());
}

TEST_CASE("decoding the worked plays") {
  // two-move play
  TermPtr t = parse_term("()");
  AutomatonFamily fam;
  Wndcma a = compile_term(t, {}, 2, Encoding::RForml, &fam);
  DecodedPlay p0 = decode_word(*fam.arena, fam.alphabet, parse_data_word("q0@0 a0@0", a.letters),
                               Encoding::RForml);
  REQUIRE(p0.ok);
  CHECK(p0.justifier == std::vector<int>{-1, 0});
  CHECK(p0.complete);

  // the four-move play of the cell automaton
  TermPtr cell = parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
  AutomatonFamily fam2;
  Wndcma a2 = compile_term(cell, {}, 2, Encoding::RForml, &fam2);
  DecodedPlay p1 = decode_word(*fam2.arena, fam2.alphabet,
                               parse_data_word("q0@0 a0@0 q1@1(0) a1@1(0)", a2.letters),
                               Encoding::RForml);
  REQUIRE(p1.ok);
  CHECK(p1.justifier == std::vector<int>{-1, 0, 1, 2});

  // the two-thread play: each q2 points at its own thread's a1
  TermPtr big = parse_term("λx:unit. let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
  AutomatonFamily fam3;
  Wndcma a3 = compile_term(big, {}, 2, Encoding::RForml, &fam3);
  DecodedPlay p2 = decode_word(
      *fam3.arena, fam3.alphabet,
      parse_data_word("q0@0 a0@0 q1@1(0) a1@1(0) q1@2(0) a1@2(0) q2@3(1) a2@3(1) q2@4(2) a2@4(2)",
                      a3.letters),
      Encoding::RForml);
  REQUIRE(p2.ok);
  CHECK(p2.justifier[6] == 3); // first q2 -> first thread's a1
  CHECK(p2.justifier[8] == 5); // second q2 -> second thread's a1
  CHECK(p2.complete);
  // malformed: alternation broken
  CHECK_THROWS_AS(decode_word(*fam3.arena, fam3.alphabet,
                              parse_data_word("q0@0 q1@1(0)", a3.letters), Encoding::RForml),
                  MalformedWord);
}
