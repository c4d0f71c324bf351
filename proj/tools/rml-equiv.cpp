// rml-equiv -- command-line front end: parse, classify, canonicalize,
// compile, and decide observational equivalence of finitary RML terms.
#include <deque>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "rmleq/canonical.hpp"
#include "rmleq/equiv.hpp"
#include "rmleq/parser.hpp"
#include "rmleq/typecheck.hpp"

using namespace rmleq;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Context load_ctx(const std::string& path) {
  if (path.empty()) return {};
  return parse_context(slurp(path));
}

Fragment parse_fragment(const std::string& s) {
  if (s == "pstrict") return Fragment::PStrict;
  if (s == "rforml") return Fragment::RForml;
  return Fragment::Auto;
}

Encoding pick_encoding(const TypeSequent& seq, Fragment f) {
  FragmentClass fc = classify(seq);
  if (f == Fragment::PStrict || (f == Fragment::Auto && !fc.in_rforml && fc.in_pstrict)) {
    if (!fc.in_pstrict) throw FragmentViolation("sequent is not in the P-strict fragment");
    return Encoding::PStrict;
  }
  if (!fc.in_rforml) {
    if (fc.in_pstrict) return Encoding::PStrict;
    throw FragmentViolation(fc.undecidable_reason
                                ? "undecidable: " + reason_to_string(*fc.undecidable_reason)
                                : "sequent is outside both decidable fragments");
  }
  return Encoding::RForml;
}

// Accepted canonical words up to a length bound, in search order.
void enumerate_words(const Wndcma& a, int max_len, std::ostream& os) {
  struct Node {
    std::vector<Configuration> cfgs;
    std::vector<int> parent;
    DataWord word;
  };
  std::deque<Node> queue;
  queue.push_back({{{a.initial, {}}}, {}, {}});
  if (a.is_final(a.initial)) os << "(empty word)\n";
  while (!queue.empty()) {
    Node n = queue.front();
    queue.pop_front();
    if ((int)n.word.positions.size() >= max_len) continue;
    int nvals = (int)n.parent.size();
    std::vector<std::pair<int, int>> choices;
    for (int v = 0; v < nvals; ++v) choices.push_back({v, -2});
    choices.push_back({nvals, -1});
    for (int v = 0; v < nvals; ++v) choices.push_back({nvals, v});
    for (int letter = 0; letter < (int)a.letters.size(); ++letter) {
      for (auto [value, par] : choices) {
        std::vector<int> parent = n.parent;
        if (value == nvals) {
          if (par >= 0) {
            DataWord probe;
            probe.parent = n.parent;
            if (probe.value_level(par) + 1 > a.level) continue;
          }
          parent.push_back(par == -2 ? -1 : par);
        }
        std::vector<Configuration> next;
        std::set<std::pair<State, std::vector<State>>> seen;
        for (const Configuration& c : n.cfgs) {
          Configuration cc = c;
          cc.mem.resize(parent.size(), BOT);
          for (Configuration& s : step(a, cc, letter, value, parent))
            if (seen.insert({s.q, s.mem}).second) next.push_back(std::move(s));
        }
        if (next.empty()) continue;
        Node s;
        s.cfgs = std::move(next);
        s.parent = parent;
        s.word = n.word;
        s.word.parent = parent;
        s.word.positions.push_back({letter, value});
        bool fin = false;
        for (const Configuration& c : s.cfgs)
          if (a.is_final(c.q)) fin = true;
        if (fin) os << s.word.to_string(a.letters) << "\n";
        queue.push_back(std::move(s));
      }
    }
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"observational equivalence of finitary RML terms"};
  app.require_subcommand(1);

  std::string term_path, term2_path, ctx_path, type_str, fragment = "auto", emit_path;
  int k = 3;
  uint64_t budget = kDefaultBudget;
  int max_len = 8;
  bool json = false, dump_arena = false, no_cleanup = false;

  auto add_common = [&](CLI::App* cmd, int nterms) {
    if (nterms >= 1) cmd->add_option("term", term_path, "term file")->required(nterms >= 1);
    if (nterms == 0) cmd->add_option("term", term_path, "term file");
    if (nterms == 2) cmd->add_option("term2", term2_path, "second term file")->required();
    cmd->add_option("--ctx", ctx_path, "typing context file");
    cmd->add_option("--int-size", k, "finitary integer modulus (default 3)");
  };

  auto* c_check = app.add_subcommand("check", "parse and type a term");
  add_common(c_check, 1);
  c_check->add_flag("--json", json, "print the typed AST as JSON");
  c_check->add_flag("--dump-arena", dump_arena, "dump the sequent's prearena (graphviz)");

  auto* c_classify = app.add_subcommand("classify", "fragment classification of the sequent");
  add_common(c_classify, 0);
  c_classify->add_option("--type", type_str, "classify a subject type without a term");

  auto* c_canon = app.add_subcommand("canon", "print the canonical form");
  add_common(c_canon, 1);

  auto* c_compile = app.add_subcommand("compile", "compile to an automaton");
  add_common(c_compile, 1);
  c_compile->add_option("--fragment", fragment, "pstrict|rforml|auto");
  c_compile->add_option("--emit-automaton", emit_path, "write the automaton here");
  c_compile->add_flag("--no-cleanup", no_cleanup, "keep dead states and transitions");
  c_compile->add_flag("--dump-arena", dump_arena, "dump the prearena instead");

  auto* c_decide = app.add_subcommand("decide", "decide observational equivalence");
  add_common(c_decide, 2);
  c_decide->add_option("--fragment", fragment, "pstrict|rforml|auto");
  c_decide->add_option("--budget", budget, "coverability budget");

  auto* c_enum = app.add_subcommand("enumerate", "accepted canonical words up to a bound");
  add_common(c_enum, 1);
  c_enum->add_option("--fragment", fragment, "pstrict|rforml|auto");
  c_enum->add_option("--max-len", max_len, "length bound (default 8)");

  auto* c_witness = app.add_subcommand("witness", "shortest accepted word of the automaton");
  add_common(c_witness, 1);
  c_witness->add_option("--fragment", fragment, "pstrict|rforml|auto");
  c_witness->add_option("--max-len", max_len, "length bound (default 8)");
  c_witness->add_option("--budget", budget, "search budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    Context ctx = load_ctx(ctx_path);

    if (c_check->parsed()) {
      TermPtr t = parse_term(slurp(term_path));
      TermPtr typed = typecheck(t, ctx, k);
      if (dump_arena) {
        auto p = prearena_of_sequent({ctx, typed->type}, k);
        std::cout << p->dump_dot();
        return 0;
      }
      if (json) std::cout << term_to_json(typed) << "\n";
      else std::cout << type_to_string(typed->type) << "\n";
      return 0;
    }

    if (c_classify->parsed()) {
      TypeSequent seq;
      seq.context = ctx;
      if (!type_str.empty()) {
        seq.subject = parse_type(type_str);
      } else {
        if (term_path.empty()) {
          std::cerr << "classify needs a term file or --type\n";
          return kExitUsage;
        }
        TermPtr typed = typecheck(parse_term(slurp(term_path)), ctx, k);
        seq.subject = typed->type;
      }
      FragmentClass fc = classify(seq);
      std::cout << sequent_to_string(seq) << "\n";
      if (fc.undecidable_reason)
        std::cout << "undecidable: " << reason_to_string(*fc.undecidable_reason) << "\n";
      else if (fc.unknown)
        std::cout << "unknown: outside both decidable fragments\n";
      else
        std::cout << "p-strict: " << (fc.in_pstrict ? "yes" : "no")
                  << "\nrestricted: " << (fc.in_rforml ? "yes" : "no") << "\n";
      return 0;
    }

    if (c_canon->parsed()) {
      TermPtr typed = typecheck(parse_term(slurp(term_path)), ctx, k);
      CanPtr can = canonicalize(typed, ctx);
      std::cout << canonical_to_string(can) << "\n";
      return 0;
    }

    auto compile_one = [&](const std::string& path, AutomatonFamily* fam_out) {
      TermPtr typed = typecheck(parse_term(slurp(path)), ctx, k);
      TypeSequent seq{ctx, typed->type};
      Encoding enc = pick_encoding(seq, parse_fragment(fragment));
      TermPtr raw = parse_term(slurp(path));
      if (no_cleanup) {
        CanPtr can = canonicalize(typed, ctx);
        AutomatonFamily fam =
            enc == Encoding::RForml ? compile_rforml(can, seq, k) : compile_pstrict(can, seq, k);
        Wndcma merged = merge_family(fam);
        if (fam_out) *fam_out = std::move(fam);
        return merged;
      }
      (void)raw;
      return compile_term(parse_term(slurp(path)), ctx, k, enc, fam_out);
    };

    if (c_compile->parsed()) {
      if (dump_arena) {
        TermPtr typed = typecheck(parse_term(slurp(term_path)), ctx, k);
        auto p = prearena_of_sequent({ctx, typed->type}, k);
        std::cout << p->dump_dot();
        return 0;
      }
      Wndcma a = compile_one(term_path, nullptr);
      std::string text = serialize(a);
      if (emit_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(emit_path);
        out << text;
      }
      return 0;
    }

    if (c_enum->parsed()) {
      Wndcma a = compile_one(term_path, nullptr);
      enumerate_words(a, max_len, std::cout);
      return 0;
    }

    if (c_witness->parsed()) {
      Wndcma a = compile_one(term_path, nullptr);
      auto w = find_witness(a, max_len, budget);
      if (!w) {
        std::cout << "no accepted word of length <= " << max_len << "\n";
        return 1;
      }
      std::cout << (w->positions.empty() ? "(empty word)" : w->to_string(a.letters)) << "\n";
      return 0;
    }

    if (c_decide->parsed()) {
      DecideOptions opts;
      opts.k = k;
      opts.budget = budget;
      opts.fragment = parse_fragment(fragment);
      Verdict v = decide(parse_term(slurp(term_path)), parse_term(slurp(term2_path)), ctx, opts);
      switch (v.kind) {
      case Verdict::Equivalent:
        std::cout << "equivalent\n";
        return 0;
      case Verdict::Inequivalent:
        std::cout << "inequivalent\n";
        if (!v.witness_text.empty()) std::cout << "witness: " << v.witness_text << "\n";
        if (!v.witness_play.empty()) std::cout << "play:\n" << v.witness_play;
        return 1;
      case Verdict::Unknown:
        std::cout << "unknown: " << v.detail << "\n";
        return 2;
      case Verdict::NotDecidableFragment:
        std::cout << "not in a decidable fragment"
                  << (v.reason ? ": " + reason_to_string(*v.reason) : "") << "\n";
        return 3;
      }
    }
  } catch (const SourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FragmentViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
