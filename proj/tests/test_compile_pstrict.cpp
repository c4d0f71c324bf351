#include <doctest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "rmleq/canonical.hpp"
#include "rmleq/equiv.hpp"
#include "rmleq/parser.hpp"
#include "rmleq/typecheck.hpp"

using namespace rmleq;

namespace {

AutomatonFamily family_of(const std::string& src, const Context& ctx, int k) {
  TermPtr typed = typecheck(parse_term(src), ctx, k);
  TypeSequent seq{ctx, typed->type};
  return compile_pstrict(canonicalize(typed, ctx), seq, k);
}

} // namespace

TEST_CASE("the unit member is a two-transition chain") {
  AutomatonFamily fam = family_of("()", {}, 2);
  REQUIRE(fam.members.size() == 1);
  const Wndcma& m = fam.members.begin()->second;
  REQUIRE(m.trans.size() == 2);
  CHECK(m.trans[0].src == m.initial);
  CHECK(m.trans[0].sig == std::vector<State>{BOT});
  CHECK(m.is_final(m.trans[1].dst));
  FamilyCheck c = check_family_member(m, fam.members.begin()->first);
  CHECK(c.all());
}

TEST_CASE("assignment writes on a fresh child value") {
  Context ctx = {{"x", RmlType::intref_t()}, {"y", RmlType::int_t()}};
  AutomatonFamily fam = family_of("x := y", ctx, 2);
  REQUIRE(fam.members.size() == 2); // one per value of y
  for (auto& [g, m] : fam.members) {
    REQUIRE(m.trans.size() == 4);
    CHECK(m.trans[1].sig.size() == 2); // write rides a level-1 child
    CHECK(m.trans[1].sig[1] == BOT);
    CHECK(m.trans[2].sig.size() == 2); // ok answers on the same child
    CHECK(m.trans[3].sig.size() == 1); // the result answer rides the root
    CHECK(check_family_member(m, g).all());
    // the write letter carries y's value
    int j = fam.arena->initial_by_payload.count({0}) && g == fam.arena->initial_by_payload[{0}]
                ? 0 : 1;
    CHECK(fam.alphabet.letters[m.trans[1].letter] == "write(" + std::to_string(j) + ")_x");
  }
}

TEST_CASE("merging keeps exactly the per-initial languages") {
  Context ctx = {{"x", RmlType::int_t()}};
  AutomatonFamily fam = family_of("x", ctx, 2);
  Wndcma merged = merge_family(fam);
  CHECK(is_deterministic(merged));
  CHECK(accepts(merged, DataWord{}));
  CHECK(accepts(merged, parse_data_word("q0(0)@0 a0(0)@0", merged.letters)));
  CHECK(accepts(merged, parse_data_word("q0(1)@0 a0(1)@0", merged.letters)));
  CHECK(!accepts(merged, parse_data_word("q0(0)@0 a0(1)@0", merged.letters)));
  CHECK(!accepts(merged, parse_data_word("q0(1)@0 a0(0)@0", merged.letters)));
}

TEST_CASE("merged membership matches the member for the first letter") {
  Context ctx = {{"x", RmlType::int_t()}};
  AutomatonFamily fam = family_of("if x then succ x else 0", ctx, 2);
  Wndcma merged = merge_family(fam);
  for (auto& [g, member] : fam.members) {
    // any word accepted by the member is accepted by the merge
    auto w = find_witness(member, 4);
    REQUIRE(w.has_value());
    CHECK(accepts(merged, *w));
  }
}

TEST_CASE("compiled automaton matches the hand transcription of the figure") {
  std::ifstream in(std::string(TESTDATA) + "/fig5a.aut");
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  Wndcma golden = parse_wndcma(ss.str());
  TermPtr t = parse_term("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
  Wndcma mine = compile_term(t, {}, 2, Encoding::PStrict);
  CHECK(!bounded_language_equal(mine, golden, 8).has_value());
}

TEST_CASE("family invariants hold on a mixed corpus") {
  Context ctx = {{"f", parse_type("(unit -> unit) -> unit")}, {"r", RmlType::intref_t()},
                 {"v", RmlType::int_t()}, {"m", parse_type("int ref -> int")}};
  const char* corpus[] = {
      "()",
      "succ v",
      "!r",
      "r := succ v",
      "λy:int. if y then !r else v",
      "let t = !r in if t then () else r := 1",
      "while !r do r := pred (!r)",
      "let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω",
      "let u = f (λw:unit. w) in u",
      "mkvar(λu:unit. !r, λw:int. r := w)",
      "let w = m mkvar(λu:unit. !r, λv2:int. r := v2) in w",
  };
  for (const char* src : corpus) {
    AutomatonFamily fam = family_of(src, ctx, 2);
    for (auto& [g, m] : fam.members) {
      FamilyCheck c = check_family_member(m, g);
      INFO(src << " :: " << c.detail);
      CHECK(c.no_initial_revisit);
      CHECK(c.deterministic);
      CHECK(c.level_discipline);
      CHECK(c.unique_initial_transition);
      CHECK(c.final_uniformity);
    }
  }
}

TEST_CASE("cleanup preserves membership") {
  Context ctx = {{"r", RmlType::intref_t()}};
  const char* corpus[] = {
      "let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω",
      "λy:int. if y then !r else 0",
      "while !r do r := 0",
  };
  for (const char* src : corpus) {
    AutomatonFamily fam = family_of(src, ctx, 2);
    Wndcma raw = merge_family(fam);
    Wndcma tidy = cleanup(raw);
    CHECK(tidy.num_states() <= raw.num_states());
    CHECK(!bounded_language_equal(raw, tidy, 6).has_value());
  }
}

TEST_CASE("allocation hides the cell's own moves") {
  AutomatonFamily fam =
      family_of("let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω", {}, 2);
  for (auto& [g, m] : fam.members) {
    (void)g;
    CHECK(is_deterministic(m));
    for (const Trans& t : m.trans) {
      const std::string& l = fam.alphabet.letters[t.letter];
      CHECK(l.find("_c") == std::string::npos);
    }
  }
}

TEST_CASE("thread switches happen only after answers") {
  TermPtr t = parse_term("λx:unit. let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω");
  AutomatonFamily fam;
  Wndcma a = compile_term(t, {}, 2, Encoding::PStrict, &fam);
  // enumerate accepted words and check every change of level-1 thread value
  // follows a P-answer
  int checked = 0;
  std::function<void(DataWord&, int)> walk = [&](DataWord& w, int budget) {
    if (accepts(a, w) && w.positions.size() >= 2) {
      int prev_thread = -1;
      for (size_t i = 0; i < w.positions.size(); ++i) {
        int v = w.positions[i].value;
        int thread = v;
        while (w.parent[thread] >= 0 && w.parent[w.parent[thread]] >= 0) thread = w.parent[thread];
        if (w.parent[v] < 0) thread = -1; // root move
        if (i > 0 && thread != prev_thread && thread != -1 && prev_thread != -1) {
          // switch: previous letter must be an answer (a1 or a2)
          const std::string& pl = a.letters[w.positions[i - 1].letter];
          INFO(w.to_string(a.letters));
          CHECK(pl[0] == 'a');
          checked++;
        }
        prev_thread = thread;
      }
    }
    if (budget == 0) return;
    int nvals = (int)w.parent.size();
    for (int letter = 0; letter < (int)a.letters.size(); ++letter) {
      for (int choice = -1; choice < 2 * nvals; ++choice) {
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
          if (probe.value_level(pv) + 1 > a.level) continue;
          value = nvals;
          w2.parent.push_back(pv);
        }
        w2.positions.push_back({letter, value});
        // only explore readable prefixes
        std::vector<Configuration> cs = {{a.initial, std::vector<State>(w2.parent.size(), BOT)}};
        bool alive = true;
        for (auto& p : w2.positions) {
          if (cs.empty()) { alive = false; break; }
          cs = step(a, cs[0], p.letter, p.value, w2.parent);
        }
        if (!alive || cs.empty()) continue;
        walk(w2, budget - 1);
      }
    }
  };
  DataWord start;
  walk(start, 8);
  CHECK(checked > 0);
}
