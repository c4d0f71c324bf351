#include "rmleq/equiv.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <future>
#include <set>
#include <sstream>

#include "rmleq/canonical.hpp"
#include "rmleq/typecheck.hpp"

namespace rmleq {

Wndcma compile_term(const TermPtr& term, const Context& ctx, int k, Encoding enc,
                    AutomatonFamily* family_out) {
  TermPtr typed = typecheck(term, ctx, k);
  TypeSequent seq{ctx, typed->type};
  CanPtr can = canonicalize(typed, ctx);
  AutomatonFamily fam =
      enc == Encoding::RForml ? compile_rforml(can, seq, k) : compile_pstrict(can, seq, k);
  Wndcma merged = cleanup(merge_family(fam));
  if (family_out) *family_out = std::move(fam);
  return merged;
}

// ---- bounded joint exploration ----------------------------------------------

namespace {

struct JointNode {
  Configuration ca, cb;
  bool a_dead = false, b_dead = false;
  std::vector<int> parent;
  DataWord word;
};

std::string abstract_pair_key(const JointNode& n) {
  // canonical forest over pair labels
  size_t nv = n.parent.size();
  std::vector<std::vector<int>> kids(nv);
  std::vector<int> roots;
  for (size_t v = 0; v < nv; ++v)
    if (n.parent[v] >= 0) kids[n.parent[v]].push_back((int)v);
    else roots.push_back((int)v);
  std::function<std::string(int)> render = [&](int v) {
    State sa = n.a_dead ? -3 : (v < (int)n.ca.mem.size() ? n.ca.mem[v] : BOT);
    State sb = n.b_dead ? -3 : (v < (int)n.cb.mem.size() ? n.cb.mem[v] : BOT);
    std::vector<std::string> sub;
    for (int c : kids[v]) sub.push_back(render(c));
    std::sort(sub.begin(), sub.end());
    std::string s = std::to_string(sa) + ":" + std::to_string(sb) + "[";
    for (auto& x : sub) s += x;
    return s + "]";
  };
  std::vector<std::string> top;
  for (int r : roots) top.push_back(render(r));
  std::sort(top.begin(), top.end());
  std::string key = std::to_string(n.a_dead ? -1 : n.ca.q) + "/" +
                    std::to_string(n.b_dead ? -1 : n.cb.q) + "|";
  for (auto& x : top) key += x;
  return key;
}

} // namespace

std::optional<DataWord> bounded_language_equal(const Wndcma& a, const Wndcma& b, int max_len) {
  if (a.letters != b.letters) throw AlphabetMismatch("bounded comparison needs equal alphabets");
  bool det = is_deterministic(a) && is_deterministic(b);

  JointNode root;
  root.ca = {a.initial, {}};
  root.cb = {b.initial, {}};
  auto accepts_now = [&](const JointNode& n) {
    bool ia = !n.a_dead && a.is_final(n.ca.q);
    bool ib = !n.b_dead && b.is_final(n.cb.q);
    return std::make_pair(ia, ib);
  };
  {
    auto [ia, ib] = accepts_now(root);
    if (ia != ib) return DataWord{};
  }

  std::deque<JointNode> queue{root};
  std::set<std::string> visited;
  if (det) visited.insert(abstract_pair_key(root));

  int max_level = std::max(a.level, b.level);
  while (!queue.empty()) {
    JointNode n = queue.front();
    queue.pop_front();
    if ((int)n.word.positions.size() >= max_len) continue;
    int nvals = (int)n.parent.size();
    std::vector<std::pair<int, int>> choices; // (value, parent) with value==nvals for fresh
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
            if (probe.value_level(par) + 1 > max_level) continue;
          }
          parent.push_back(par == -2 ? -1 : par);
        }
        JointNode s;
        s.parent = parent;
        s.word = n.word;
        s.word.parent = parent;
        s.word.positions.push_back({letter, value});
        bool advanced = false;
        if (!n.a_dead) {
          Configuration ca = n.ca;
          ca.mem.resize(parent.size(), BOT);
          auto succ = step(a, ca, letter, value, parent);
          if (succ.empty()) s.a_dead = true;
          else {
            s.ca = succ[0];
            advanced = true;
            if (succ.size() > 1) throw std::logic_error("joint run needs determinism");
          }
        } else {
          s.a_dead = true;
        }
        if (!n.b_dead) {
          Configuration cb = n.cb;
          cb.mem.resize(parent.size(), BOT);
          auto succ = step(b, cb, letter, value, parent);
          if (succ.empty()) s.b_dead = true;
          else {
            s.cb = succ[0];
            advanced = true;
            if (succ.size() > 1) throw std::logic_error("joint run needs determinism");
          }
        } else {
          s.b_dead = true;
        }
        if (s.a_dead && s.b_dead) continue;
        (void)advanced;
        auto [ia, ib] = accepts_now(s);
        if (ia != ib) return s.word;
        if (det) {
          std::string key = abstract_pair_key(s);
          if (!visited.insert(key).second) continue;
        }
        queue.push_back(std::move(s));
      }
    }
  }
  return std::nullopt;
}

// ---- decoding ----------------------------------------------------------------

namespace {

struct MoveRef {
  int move;       // prearena move id
  int tag;        // 0 plain, 1 src, 2 tgt
};

MoveRef resolve_letter(const CompileAlphabet& alpha, int letter) {
  if (letter < (int)alpha.src_of.size()) return {letter, 0};
  for (size_t m = 0; m < alpha.src_of.size(); ++m) {
    if (alpha.src_of[m] == letter) return {(int)m, 1};
    if (alpha.tgt_of[m] == letter) return {(int)m, 2};
  }
  throw MalformedWord("unknown letter id");
}

// mover's view: walk back, jumping over the other player's moves
std::vector<int> view_of(const std::vector<bool>& opp, const std::vector<int>& just, int upto,
                         bool for_opponent) {
  std::vector<int> v;
  int j = upto - 1;
  while (j >= 0) {
    v.push_back(j);
    if (opp[j] != for_opponent) {
      if (just[j] < 0) break;
      j = just[j];
    } else {
      j--;
    }
  }
  std::reverse(v.begin(), v.end());
  return v;
}

} // namespace

static DecodedPlay decode_impl(const Wndcma* probe, const Prearena& p,
                               const CompileAlphabet& alpha, const DataWord& w, Encoding enc) {
  DecodedPlay out;
  size_t n = w.positions.size();
  std::vector<MoveRef> refs;
  for (auto& pos : w.positions) refs.push_back(resolve_letter(alpha, pos.letter));

  std::vector<int> just(n, -1);
  std::vector<bool> opp(n), question(n), answered_flag(n, false);
  std::ostringstream render;

  for (size_t i = 0; i < n; ++i) {
    const Move& m = p.move(refs[i].move);
    opp[i] = m.opp;
    question[i] = m.question;
    int value = w.positions[i].value;
    if (i == 0) {
      if (!m.initial) throw MalformedWord("word does not start with an initial move");
      continue;
    }
    if (m.initial) throw MalformedWord("initial move occurs mid-word");
    auto enables = [&](size_t pidx) {
      const Move& pm = p.move(refs[pidx].move);
      return std::find(m.enablers.begin(), m.enablers.end(), pm.id) != m.enablers.end();
    };
    if (!m.question) {
      // answers close the most recent open question they can answer
      int found = -1;
      for (int j = (int)i - 1; j >= 0; --j) {
        if (question[j] && !answered_flag[j]) {
          if (!enables(j)) throw MalformedWord("answer does not match the pending question");
          found = j;
          break;
        }
      }
      if (found < 0) throw MalformedWord("answer with no pending question");
      bool a_section = m.comp == -1 || m.initial;
      if ((enc == Encoding::PStrict || a_section) && w.positions[found].value != value)
        throw MalformedWord("answer rides a different value than its question");
      just[i] = found;
      answered_flag[found] = true;
      continue;
    }
    // questions
    bool by_value = enc == Encoding::PStrict || m.comp == -1;
    std::vector<int> cands;
    for (int j = 0; j < (int)i; ++j) {
      if (!enables(j)) continue;
      if (by_value) {
        if (w.parent[value] != w.positions[j].value) continue;
      }
      cands.push_back(j);
    }
    if (by_value) {
      // at most the question/answer pair on the parent value can qualify
      if (cands.empty()) throw MalformedWord("question with no justifier on its parent value");
      just[i] = cands.back();
      continue;
    }
    // context question: first-level ones point at the initial move
    bool initial_enabled = std::find(m.enablers.begin(), m.enablers.end(),
                                     p.move(w.positions[0].letter < (int)p.moves.size()
                                                ? refs[0].move
                                                : refs[0].move)
                                         .id) != m.enablers.end();
    if (initial_enabled && cands.size() == 1 && cands[0] == 0) {
      just[i] = 0;
      continue;
    }
    if (refs[i].tag == 2) {
      // the src-marked occurrence is the justifier
      int src_pos = -1;
      for (int j = 0; j < (int)i; ++j)
        if (refs[j].tag == 1 && enables(j)) src_pos = j;
      if (src_pos < 0) throw MalformedWord("target tag without a source");
      just[i] = src_pos;
      continue;
    }
    // visibility: restrict candidates to the mover's view
    std::vector<int> view = view_of(opp, just, (int)i, m.opp);
    std::vector<int> in_view;
    for (int c : cands)
      if (std::find(view.begin(), view.end(), c) != view.end()) in_view.push_back(c);
    if (in_view.size() == 1) {
      just[i] = in_view[0];
      continue;
    }
    if (in_view.empty() && cands.size() == 1) {
      just[i] = cands[0];
      continue;
    }
    const std::vector<int>& pool = in_view.empty() ? cands : in_view;
    if (pool.empty()) throw MalformedWord("question with no candidate justifier");
    if (!probe) throw AmbiguousPointer("pointer not determined by the underlying word");
    // probe tagged variants: exactly one placement must be accepted
    int chosen = -1;
    for (int c : pool) {
      DataWord tagged = w;
      int base_c = refs[c].move;
      int base_i = refs[i].move;
      if (alpha.src_of[base_c] < 0 || alpha.tgt_of[base_i] < 0) continue;
      tagged.positions[c].letter = alpha.src_of[base_c];
      tagged.positions[i].letter = alpha.tgt_of[base_i];
      if (accepts(*probe, tagged)) {
        if (chosen >= 0) throw AmbiguousPointer("several tagged placements accepted");
        chosen = c;
      }
    }
    if (chosen < 0) throw AmbiguousPointer("no tagged placement accepted");
    just[i] = chosen;
  }

  // alternation
  for (size_t i = 1; i < n; ++i)
    if (opp[i] == opp[i - 1]) throw MalformedWord("alternation violated");
  // visibility of the result
  for (size_t i = 1; i < n; ++i) {
    std::vector<int> view = view_of(opp, just, (int)i, opp[i]);
    if (std::find(view.begin(), view.end(), just[i]) == view.end() && just[i] != (int)i - 1)
      throw MalformedWord("visibility violated at position " + std::to_string(i));
  }

  out.ok = true;
  out.justifier = just;
  out.complete = true;
  for (size_t i = 0; i < n; ++i)
    if (question[i] && !answered_flag[i]) out.complete = false;
  for (size_t i = 0; i < n; ++i) {
    const Move& m = p.move(refs[i].move);
    render << i << ": " << m.name << (refs[i].tag == 1 ? "!src" : refs[i].tag == 2 ? "!tgt" : "")
           << " [" << (m.opp ? "O" : "P") << (m.question ? "Q" : "A") << "]"
           << " value=" << w.positions[i].value;
    if (just[i] >= 0) render << " -> " << just[i];
    render << "\n";
  }
  out.rendered = render.str();
  return out;
}

DecodedPlay decode_word(const Prearena& p, const CompileAlphabet& alpha, const DataWord& w,
                        Encoding enc) {
  return decode_impl(nullptr, p, alpha, w, enc);
}

DecodedPlay decode_tagging(const Wndcma& probe, const Prearena& p, const CompileAlphabet& alpha,
                           const DataWord& w, Encoding enc) {
  return decode_impl(&probe, p, alpha, w, enc);
}

// ---- the decision procedure --------------------------------------------------

Verdict decide(const TermPtr& m, const TermPtr& n, const Context& ctx,
               const DecideOptions& opts) {
  Verdict v;
  TermPtr tm = typecheck(m, ctx, opts.k);
  TermPtr tn = typecheck(n, ctx, opts.k);
  if (!type_equal(tm->type, tn->type))
    throw TypeError("the two terms have different types: " + type_to_string(tm->type) + " vs " +
                        type_to_string(tn->type),
                    0, 0);
  TypeSequent seq{ctx, tm->type};
  FragmentClass fc = classify(seq);
  Encoding enc;
  if (opts.fragment == Fragment::PStrict) {
    if (!fc.in_pstrict) {
      v.kind = Verdict::NotDecidableFragment;
      v.reason = fc.undecidable_reason;
      v.detail = "sequent is not in the P-strict fragment";
      return v;
    }
    enc = Encoding::PStrict;
  } else if (opts.fragment == Fragment::RForml) {
    if (!fc.in_rforml) {
      v.kind = Verdict::NotDecidableFragment;
      v.reason = fc.undecidable_reason;
      v.detail = "sequent is not in the restricted fragment";
      return v;
    }
    enc = Encoding::RForml;
  } else if (fc.in_rforml) {
    enc = Encoding::RForml;
  } else if (fc.in_pstrict) {
    enc = Encoding::PStrict;
  } else {
    v.kind = Verdict::NotDecidableFragment;
    v.reason = fc.undecidable_reason;
    v.detail = fc.undecidable_reason
                   ? "undecidable: " + reason_to_string(*fc.undecidable_reason)
                   : "sequent is outside both decidable fragments";
    return v;
  }

  AutomatonFamily fam_m, fam_n;
  Wndcma am = compile_term(m, ctx, opts.k, enc, &fam_m);
  Wndcma an = compile_term(n, ctx, opts.k, enc, &fam_n);

  Wndcma d1 = difference(am, an);
  Wndcma d2 = difference(an, am);
  auto f1 = std::async(std::launch::async, [&] { return is_empty(d1, opts.budget); });
  auto f2 = std::async(std::launch::async, [&] { return is_empty(d2, opts.budget); });
  EmptinessResult e1 = f1.get();
  EmptinessResult e2 = f2.get();

  if (e1.verdict == EmptinessResult::Unknown || e2.verdict == EmptinessResult::Unknown) {
    v.kind = Verdict::Unknown;
    v.detail = "coverability budget exceeded";
    return v;
  }
  if (e1.verdict == EmptinessResult::Empty && e2.verdict == EmptinessResult::Empty) {
    v.kind = Verdict::Equivalent;
    return v;
  }
  const Wndcma& diff = e1.verdict == EmptinessResult::NonEmpty ? d1 : d2;
  v.kind = Verdict::Inequivalent;
  auto w = find_witness(diff, opts.witness_max_len, opts.budget);
  if (w) {
    v.witness = *w;
    for (auto& pos : w->positions) v.witness_letters.push_back(diff.letters[pos.letter]);
    v.witness_text = w->positions.empty() ? "(empty word)" : w->to_string(diff.letters);
    const Wndcma& probe = e1.verdict == EmptinessResult::NonEmpty ? am : an;
    try {
      DecodedPlay play = decode_tagging(probe, *fam_m.arena, fam_m.alphabet, *w,
                                        enc == Encoding::RForml ? Encoding::RForml
                                                                : Encoding::PStrict);
      v.witness_play = play.rendered;
    } catch (const std::exception& e) {
      v.witness_play = std::string("(play decoding failed: ") + e.what() + ")";
    }
  } else {
    v.detail = "languages differ but no witness found within the length bound";
  }
  return v;
}

} // namespace rmleq
