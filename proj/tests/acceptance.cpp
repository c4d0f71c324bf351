// acceptance -- end-to-end checks of the decision pipeline against the
// hand-transcribed reference automata and the bounded-enumeration oracle.
// Prints one pass/fail line per criterion and exits nonzero on any failure.
#include <chrono>
#include <random>
#include <set>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "rmleq/canonical.hpp"
#include "rmleq/classify.hpp"
#include "rmleq/equiv.hpp"
#include "rmleq/parser.hpp"
#include "rmleq/typecheck.hpp"

using namespace rmleq;

namespace {

int failures = 0;
std::string data_dir = "tests/data";

void report(int idx, const std::string& name, bool ok, const std::string& note = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << idx << ": " << name;
  if (!note.empty()) std::cout << " (" << note << ")";
  std::cout << std::endl;
  if (!ok) failures++;
}

Wndcma load_golden(const std::string& name) {
  std::ifstream in(data_dir + "/" + name);
  if (!in) throw std::runtime_error("cannot open golden file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_wndcma(ss.str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- corpus ------------------------------------------------------------------

struct CorpusTerm {
  const char* src;
  Context ctx;
};

Context ctx_f_uu() { return {{"f", parse_type("unit -> unit")}}; }
Context ctx_r() { return {{"r", RmlType::intref_t()}}; }
Context ctx_v() { return {{"v", RmlType::int_t()}}; }
Context ctx_g2() { return {{"g", parse_type("(unit -> unit) -> unit")}}; }
Context ctx_h() { return {{"h", parse_type("(unit -> unit) -> unit -> unit")}}; }
Context ctx_rv() { return {{"r", RmlType::intref_t()}, {"v", RmlType::int_t()}}; }
Context ctx_p() { return {{"p", parse_type("int ref -> unit -> unit")}}; }

std::vector<CorpusTerm> corpus20() {
  return {
      {"()", {}},
      {"1", {}},
      {"v", ctx_v()},
      {"succ v", ctx_v()},
      {"let w = p mkvar(λu:unit. 1, λv:int. ()) in w ()", ctx_p()},
      {"if v then 0 else 1", ctx_v()},
      {"!r", ctx_r()},
      {"r := 1", ctx_r()},
      {"r := succ (!r)", ctx_r()},
      {"while !r do r := pred (!r)", ctx_r()},
      {"mkvar(λu:unit. !r, λw:int. r := w)", ctx_rv()},
      {"λy:unit. f ()", ctx_f_uu()},
      {"λy:int. if y then f () else ()", ctx_f_uu()},
      {"let t = f () in t", ctx_f_uu()},
      {"let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω", {}},
      {"λx:unit. let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω", {}},
      {"let u = g (λw:unit. w) in u", ctx_g2()},
      {"let x = h (λw:unit. w) in x ()", ctx_h()},
      {"let c = ref 0 in (c := v; !c)", ctx_rv()},
      {"λy:unit. (r := 1; f ())", {{"r", RmlType::intref_t()}, {"f", parse_type("unit -> unit")}}},
  };
}

Encoding encoding_for(const TypeSequent& seq) {
  FragmentClass fc = classify(seq);
  if (fc.in_rforml) return Encoding::RForml;
  if (fc.in_pstrict) return Encoding::PStrict;
  throw std::runtime_error("corpus term outside both fragments");
}

AutomatonFamily compile_family(const CorpusTerm& ct, int k) {
  TermPtr typed = typecheck(parse_term(ct.src), ct.ctx, k);
  TypeSequent seq{ct.ctx, typed->type};
  CanPtr can = canonicalize(typed, ct.ctx);
  return encoding_for(seq) == Encoding::RForml ? compile_rforml(can, seq, k)
                                               : compile_pstrict(can, seq, k);
}

// ---- criteria ----------------------------------------------------------------

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string note;
  try {
    TermPtr t = parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
    Wndcma mine = compile_term(t, {}, 2, Encoding::RForml);
    Wndcma g = load_golden("fig5a.aut");
    auto diff = bounded_language_equal(mine, g, 8);
    ok = !diff.has_value();
    if (diff) note = "difference: " + diff->to_string(mine.letters);
  } catch (const std::exception& e) {
    note = e.what();
  }
  double dt = seconds_since(t0);
  if (dt >= 10.0) { ok = false; note += " overtime"; }
  report(1, "one-cell automaton is language-equal to the reference (<= 8)", ok,
         note.empty() ? std::to_string(dt) + "s" : note);
}

void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string note;
  try {
    TermPtr t = parse_term("λx:unit. let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
    Wndcma mine = compile_term(t, {}, 2, Encoding::RForml);
    Wndcma g = load_golden("fig5b.aut");
    auto diff = bounded_language_equal(mine, g, 10);
    bool lang_equal = !diff.has_value();
    DataWord two = parse_data_word(
        "q0@0 a0@0 q1@1(0) a1@1(0) q1@2(0) a1@2(0) q2@3(1) a2@3(1) q2@4(2) a2@4(2)",
        mine.letters);
    DataWord one =
        parse_data_word("q0@0 a0@0 q1@1(0) a1@1(0) q2@2(1) a2@2(1) q2@3(1) a2@3(1)", mine.letters);
    bool example = accepts(mine, two) && !accepts(mine, one);
    ok = lang_equal && example;
    if (diff) note = "difference: " + diff->to_string(mine.letters);
    if (!example) note += " two-thread behaviour wrong";
  } catch (const std::exception& e) {
    note = e.what();
  }
  double dt = seconds_since(t0);
  if (dt >= 60.0) { ok = false; note += " overtime"; }
  report(2, "two-level automaton matches the reference and the two-thread word fires", ok,
         note.empty() ? std::to_string(dt) + "s" : note);
}

void criterion3() {
  bool ok = true;
  std::string note;
  int members = 0;
  try {
    for (const CorpusTerm& ct : corpus20()) {
      AutomatonFamily fam = compile_family(ct, 2);
      for (auto& [g, m] : fam.members) {
        FamilyCheck c = check_family_member(m, g);
        members++;
        if (!c.all()) {
          ok = false;
          note = std::string(ct.src) + ": " +
                 (!c.no_initial_revisit        ? "initial state revisited"
                  : !c.deterministic           ? "nondeterministic"
                  : !c.level_discipline        ? "level discipline broken"
                  : !c.unique_initial_transition ? "initial transition not unique"
                                                 : "final states not uniform");
        }
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  report(3, "all five construction invariants hold on the 20-term corpus", ok,
         note.empty() ? std::to_string(members) + " members" : note);
}

std::vector<CorpusTerm> pair_corpus() {
  auto c = corpus20();
  // extra members of the sequent groups so the ordered-pair count is realistic
  c.push_back({"succ (pred v)", ctx_v()});
  c.push_back({"if v then succ (pred v) else 0", ctx_v()});
  c.push_back({"0", ctx_v()});
  c.push_back({"!r; !r", ctx_r()});
  c.push_back({"if !r then 1 else !r", ctx_r()});
  c.push_back({"r := 1; r := 1", ctx_r()});
  c.push_back({"r := 1; r := 0; r := 1", ctx_r()});
  c.push_back({"λy:unit. (f (); ())", ctx_f_uu()});
  c.push_back({"λy:unit. Ω", ctx_f_uu()});
  return c;
}

void criterion4() {
  bool ok = true;
  std::string note;
  int agreed = 0, unknowns = 0;
  try {
    auto corpus = pair_corpus();
    // ordered pairs over compatible sequents
    std::vector<std::pair<int, int>> pairs;
    for (size_t i = 0; i < corpus.size(); ++i)
      for (size_t j = 0; j < corpus.size(); ++j) {
        if (i == j) continue;
        TermPtr ti = typecheck(parse_term(corpus[i].src), corpus[i].ctx, 2);
        TermPtr tj = typecheck(parse_term(corpus[j].src), corpus[j].ctx, 2);
        if (!type_equal(ti->type, tj->type)) continue;
        // contexts must match too
        if (corpus[i].ctx.size() != corpus[j].ctx.size()) continue;
        bool same = true;
        for (size_t c = 0; c < corpus[i].ctx.size(); ++c)
          if (corpus[i].ctx[c].first != corpus[j].ctx[c].first ||
              !type_equal(corpus[i].ctx[c].second, corpus[j].ctx[c].second))
            same = false;
        if (same) pairs.emplace_back((int)i, (int)j);
      }
    if (pairs.size() < 40) {
      ok = false;
      note = "only " + std::to_string(pairs.size()) + " pairs";
    }
    DecideOptions opts;
    opts.k = 2;
    for (auto& [i, j] : pairs) {
      const CorpusTerm& a = corpus[i];
      const CorpusTerm& b = corpus[j];
      Verdict v = decide(parse_term(a.src), parse_term(b.src), a.ctx, opts);
      if (v.kind == Verdict::Unknown) {
        unknowns++;
        continue;
      }
      TermPtr ta = typecheck(parse_term(a.src), a.ctx, 2);
      TypeSequent seq{a.ctx, ta->type};
      Encoding enc = encoding_for(seq);
      Wndcma am = compile_term(parse_term(a.src), a.ctx, 2, enc);
      Wndcma bm = compile_term(parse_term(b.src), b.ctx, 2, enc);
      auto diff = bounded_language_equal(am, bm, 8);
      bool agree = v.kind == Verdict::Equivalent ? !diff.has_value() : diff.has_value();
      if (v.kind == Verdict::Inequivalent && v.witness &&
          v.witness->positions.size() <= 8) {
        agree = agree && (accepts(am, *v.witness) != accepts(bm, *v.witness));
      }
      if (!agree) {
        ok = false;
        note = std::string(a.src) + " vs " + b.src;
        break;
      }
      agreed++;
    }
    if (ok)
      note = std::to_string(agreed) + " pairs agree, " + std::to_string(unknowns) + " unknown";
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  report(4, "decide agrees with the bounded oracle on all corpus pairs", ok, note);
}

void criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string note;
  try {
    DecideOptions opts;
    opts.k = 2;
    Context cf = {{"f", parse_type("unit -> unit")}};
    Verdict v1 = decide(parse_term("f ()"), parse_term("f (); ()"), cf, opts);
    if (v1.kind != Verdict::Equivalent) { ok = false; note = "f() vs f();()"; }

    DecideOptions o3;
    o3.k = 3;
    Verdict v2 = decide(parse_term("λx:int. x"), parse_term("λx:int. succ (pred x)"), {}, o3);
    if (v2.kind != Verdict::Equivalent) { ok = false; note = "succ/pred identity"; }

    Verdict v3 = decide(parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω"),
                        parse_term("λy:unit. Ω"), {}, opts);
    if (v3.kind != Verdict::Inequivalent) { ok = false; note = "cell vs divergence"; }

    Context cr = {{"x", RmlType::intref_t()}};
    Verdict v4 = decide(parse_term("!x"), parse_term("!x; !x"), cr, opts);
    if (v4.kind != Verdict::Inequivalent) { ok = false; note = "single vs double read"; }

    // confirm the inequivalence witnesses against the oracle
    for (auto* pv : {&v3, &v4}) {
      if (!pv->witness) { ok = false; note += " missing witness"; }
    }
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  double dt = seconds_since(t0);
  if (dt >= 120.0) { ok = false; note += " overtime"; }
  report(5, "semantic spot checks", ok, note.empty() ? std::to_string(dt) + "s" : note);
}

void criterion6() {
  bool ok = true;
  std::string note;
  try {
    std::mt19937 rng(2024);
    auto random_automaton = [&](int seed) {
      std::mt19937 r(seed);
      Wndcma a;
      a.level = 1;
      a.letters = {"a", "b", "c"};
      int n = 3 + (int)(r() % 2);
      for (int i = 0; i < n; ++i) {
        a.state_names.push_back("s" + std::to_string(i));
        a.finals.push_back(r() % 2);
      }
      a.initial = 0;
      std::set<std::string> used;
      int ntrans = 5 + (int)(r() % 4);
      for (int i = 0; i < ntrans; ++i) {
        Trans t;
        t.src = (State)(r() % n);
        t.letter = (int)(r() % 3);
        int lvl = (int)(r() % 2);
        t.sig.assign(lvl + 1, BOT);
        for (int p = 0; p < lvl; ++p) t.sig[p] = (State)(r() % n);
        if (r() % 2) t.sig[lvl] = (State)(r() % n);
        t.dst = (State)(r() % n);
        for (int p = 0; p <= lvl; ++p) t.upd.push_back((State)(r() % n));
        std::string key = std::to_string(t.src) + "." + std::to_string(t.letter);
        for (State s : t.sig) key += "," + std::to_string(s);
        if (!used.insert(key).second) continue;
        a.trans.push_back(std::move(t));
      }
      return a;
    };
    // exhaustive canonical-word check to length 6
    std::function<void(const Wndcma&, const Wndcma&, const Wndcma&, const Wndcma&, const Wndcma&,
                       DataWord&, int)>
        walk = [&](const Wndcma& a, const Wndcma& b, const Wndcma& i, const Wndcma& u,
                   const Wndcma& na, DataWord& w, int budget) {
          bool ia = accepts(a, w), ib = accepts(b, w);
          if (accepts(i, w) != (ia && ib) || accepts(u, w) != (ia || ib) ||
              accepts(na, w) != !ia) {
            ok = false;
            note = "law broken on " + w.to_string(a.letters);
            return;
          }
          if (budget == 0) return;
          int nvals = (int)w.parent.size();
          for (int letter = 0; letter < 3 && ok; ++letter) {
            for (int choice = -1; choice < 2 * nvals && ok; ++choice) {
              DataWord w2 = w;
              int value;
              if (choice >= 0 && choice < nvals) value = choice;
              else if (choice == -1) {
                value = nvals;
                w2.parent.push_back(-1);
              } else {
                int pv = choice - nvals;
                DataWord probe;
                probe.parent = w.parent;
                if (probe.value_level(pv) + 1 > 1) continue;
                value = nvals;
                w2.parent.push_back(pv);
              }
              w2.positions.push_back({letter, value});
              walk(a, b, i, u, na, w2, budget - 1);
            }
          }
        };
    for (int trial = 0; trial < 10 && ok; ++trial) {
      Wndcma a = random_automaton((int)rng());
      Wndcma b = random_automaton((int)rng());
      b.letters = a.letters;
      Wndcma i = intersect(a, b);
      Wndcma u = unite(a, b);
      Wndcma na = complement(a);
      DataWord w;
      walk(a, b, i, u, na, w, 6);
    }
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  report(6, "boolean closure laws on 10 random automata (exhaustive to length 6)", ok, note);
}

void criterion7() {
  bool ok = true;
  std::string note;
  try {
    struct Item {
      std::string text;
      bool empty;
    };
    std::vector<Item> items;
    auto add = [&](const std::string& text, bool empty) { items.push_back({text, empty}); };
    // reachable final
    add(R"(wndcma
level 0
letters a b
states s0 s1 sf
initial s0
finals sf
s0 --a, (_) -> s1, (s1)
s1 --b, (s1) -> sf, (sf)
)", false);
    // no transition enters the final state
    add(R"(wndcma
level 0
letters a
states s0 s1 sf
initial s0
finals sf
s0 --a, (_) -> s1, (s1)
s1 --a, (s1) -> s1, (s1)
)", true);
    // the accepting state is the initial one
    add(R"(wndcma
level 0
letters a
states s0 s1
initial s0
finals s0
s0 --a, (_) -> s1, (s1)
)", false);
    // two sibling values must rest in state B (the interleaving mechanism)
    add(R"(wndcma
level 1
letters r c u v
states q0 q1 q2 qf A B C
initial q0
finals qf
q0 --r, (_) -> q1, (A)
q1 --c, (A,_) -> q1, (A,B)
q1 --u, (A,B) -> q2, (A,C)
q2 --v, (A,B) -> qf, (A,C)
)", false);
    // same skeleton, but only one value can ever sit in B
    add(R"(wndcma
level 1
letters r c u v
states q0 q1 q2 q3 qf A B C
initial q0
finals qf
q0 --r, (_) -> q1, (A)
q1 --c, (A,_) -> q2, (A,B)
q2 --u, (A,B) -> q3, (A,C)
q3 --v, (A,B) -> qf, (A,C)
)", true);
    // needs a level-1 child under a level-0 value in a specific state
    add(R"(wndcma
level 1
letters a b c
states s0 s1 s2 sf A B
initial s0
finals sf
s0 --a, (_) -> s1, (A)
s1 --b, (A,_) -> s2, (A,B)
s2 --c, (A,B) -> sf, (A,B)
)", false);
    // the guard state is never writable
    add(R"(wndcma
level 1
letters a b
states s0 s1 sf A B
initial s0
finals sf
s0 --a, (_) -> s1, (A)
s1 --b, (B,_) -> sf, (A,B)
)", true);
    // cycles that never reach the final control
    add(R"(wndcma
level 0
letters a b
states s0 s1 s2 sf
initial s0
finals sf
s0 --a, (_) -> s1, (s1)
s1 --a, (s1) -> s2, (s2)
s2 --b, (s2) -> s1, (s1)
)", true);
    // acceptance after revisiting a value
    add(R"(wndcma
level 0
letters a b
states s0 s1 s2 sf
initial s0
finals sf
s0 --a, (_) -> s1, (s1)
s1 --b, (s1) -> s2, (s2)
s2 --b, (s2) -> sf, (sf)
)", false);
    // needs two fresh roots in the same state
    add(R"(wndcma
level 0
letters a b c
states s0 s1 s2 sf R S
initial s0
finals sf
s0 --a, (_) -> s1, (R)
s1 --a, (_) -> s2, (R)
s2 --b, (R) -> sf, (S)
)", false);
    // the same but every root is consumed on creation
    add(R"(wndcma
level 0
letters a b
states s0 s1 sf R S
initial s0
finals sf
s0 --a, (_) -> s1, (S)
s1 --b, (R) -> sf, (S)
)", true);
    // deep chain of two levels... final needs both levels visited
    add(R"(wndcma
level 1
letters a b c
states s0 s1 s2 sf A B
initial s0
finals sf
s0 --a, (_) -> s1, (A)
s1 --b, (A,_) -> s2, (A,B)
s2 --c, (A,B) -> sf, (A,B)
s2 --b, (A,_) -> s2, (A,B)
)", false);
    // final control reachable only through an unsatisfiable signature
    add(R"(wndcma
level 1
letters a b
states s0 s1 sf A B
initial s0
finals sf
s0 --a, (_) -> s1, (A)
s1 --b, (B,B) -> sf, (A,B)
)", true);
    // empty automaton: no transitions, non-final initial
    add(R"(wndcma
level 0
letters a
states s0
initial s0
finals
s0 --a, (s0) -> s0, (s0)
)", true);
    // accepts only the empty word
    add(R"(wndcma
level 0
letters a
states s0
initial s0
finals s0
)", false);

    int idx = 0;
    for (auto& item : items) {
      Wndcma a = parse_wndcma(item.text);
      EmptinessResult r = is_empty(a);
      if (r.verdict == EmptinessResult::Unknown) {
        ok = false;
        note = "unknown verdict on item " + std::to_string(idx);
        break;
      }
      bool empty = r.verdict == EmptinessResult::Empty;
      auto w = find_witness(a, 10);
      if (empty != item.empty || w.has_value() == empty) {
        ok = false;
        note = "item " + std::to_string(idx) + " expected " +
               (item.empty ? "empty" : "nonempty");
        break;
      }
      idx++;
    }
    if (ok) note = std::to_string(idx) + " automata checked";
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  report(7, "emptiness agrees with the bounded witness search on hand-built automata", ok, note);
}

void criterion8() {
  bool ok = true;
  std::string note;
  auto seq = [&](std::vector<std::pair<std::string, std::string>> ctx, const std::string& sub) {
    TypeSequent s;
    for (auto& [n, ty] : ctx) s.context.emplace_back(n, parse_type(ty));
    s.subject = parse_type(sub);
    return s;
  };
  struct Row {
    TypeSequent s;
    enum { PStrictRow, RestrictedRow, Undecidable, UnknownRow } expect;
    const char* name;
  };
  std::vector<Row> rows = {
      // decidable-here rows
      {seq({{"f", "(unit -> int -> unit) -> int"}}, "unit -> int -> unit"), Row::PStrictRow,
       "arity-one second-order context, first-order subject"},
      {seq({{"f", "(unit -> unit) -> (int -> int) -> unit"}}, "unit -> unit -> unit"),
       Row::RestrictedRow, "short-argument context of higher arity"},
      // undecidable rows
      {seq({}, "((unit -> unit) -> unit) -> unit"), Row::Undecidable, "third-order subject"},
      {seq({{"f", "(((unit -> unit) -> unit) -> unit) -> unit"}}, "unit"), Row::Undecidable,
       "fourth-order context"},
      {seq({}, "(unit -> unit) -> unit -> unit"), Row::Undecidable,
       "second-order subject with a non-final first-order argument"},
      {seq({{"f", "((unit -> unit) -> unit -> unit) -> unit"}}, "unit"), Row::Undecidable,
       "context embedding the undecidable second-order type"},
      // unknown rows
      {seq({{"f", "(unit -> unit -> unit) -> (unit -> unit -> unit) -> unit"}},
           "unit -> unit -> unit"),
       Row::UnknownRow, "the full first-order fragment shape"},
      {seq({}, "unit -> (unit -> unit) -> unit"), Row::UnknownRow,
       "final first-order argument"},
      {seq({{"f", "((unit -> unit) -> unit) -> unit"}}, "unit -> unit -> unit"), Row::UnknownRow,
       "third-order context with a short argument"},
  };
  for (auto& row : rows) {
    FragmentClass fc = classify(row.s);
    bool good = false;
    switch (row.expect) {
    case Row::PStrictRow: good = fc.in_pstrict && !fc.in_rforml; break;
    case Row::RestrictedRow: good = fc.in_rforml && !fc.in_pstrict; break;
    case Row::Undecidable: good = fc.undecidable_reason.has_value(); break;
    case Row::UnknownRow: good = fc.unknown && !fc.undecidable_reason; break;
    }
    if (!good) {
      ok = false;
      note = row.name;
      break;
    }
  }
  report(8, "representative sequent rows classify as expected", ok, note);
}

} // namespace

int main(int argc, char** argv) {
  if (argc > 1) data_dir = argv[1];
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures) std::cout << failures << " criteria failed" << std::endl;
  else std::cout << "all criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
