#include "rmleq/classify.hpp"
#include "compile_detail.hpp"

#include <algorithm>

namespace rmleq {

using detail::AutoBuilder;
using detail::clone_states;
using detail::close_finals;
using detail::map_states;
using detail::secondary_of;
using detail::share_outgoing;
using detail::ctx_index;
using detail::payloads_by_initial;
using detail::payload_of;
using detail::rhs_value_letter;
using detail::value_member;
using detail::letter_map_from_moves;

namespace {

class PstrictCompiler {
public:
  explicit PstrictCompiler(int k) : k_(k) {}

  AutomatonFamily compile(const CanPtr& t, const TypeSequent& seq) {
    AutomatonFamily fam;
    fam.arena = prearena_of_sequent(seq, k_);
    fam.alphabet = make_alphabet(*fam.arena, false);
    build(t, seq, fam);
    return fam;
  }

private:
  int k_;

  TypeSequent extend(const TypeSequent& seq, const std::string& n, TypePtr ty) {
    TypeSequent s = seq;
    s.context.emplace_back(n, std::move(ty));
    return s;
  }
  static TypeSequent with_subject(const TypeSequent& seq, TypePtr ty) {
    TypeSequent s = seq;
    s.subject = std::move(ty);
    return s;
  }

  // initial move of a sub-prearena extending the parent context
  int sub_initial(const Prearena& sub, const std::vector<int>& parent_vec,
                  const std::vector<int>& extra) {
    std::vector<int> vec = parent_vec;
    for (int e : extra) vec.push_back(e);
    return sub.initial_by_payload.at(vec);
  }

  void build(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam) {
    const Prearena& P = *fam.arena;
    auto payload_vecs = payloads_by_initial(P);
    switch (t->kind) {
    case CanKind::Unit:
    case CanKind::Lit:
      for (auto& [g, vec] : payload_vecs) {
        (void)vec;
        int v = t->kind == CanKind::Lit ? t->lit : 0;
        fam.members[g] = value_member(fam.alphabet.letters, g, rhs_value_letter(P, v));
      }
      return;
    case CanKind::Var:
    case CanKind::Succ:
    case CanKind::Pred: {
      int ix = ctx_index(seq, t->var);
      for (auto& [g, vec] : payload_vecs) {
        int v = payload_of(P, vec, ix);
        if (t->kind == CanKind::Succ) v = (v + 1) % k_;
        if (t->kind == CanKind::Pred) v = (v - 1 + k_) % k_;
        fam.members[g] = value_member(fam.alphabet.letters, g, rhs_value_letter(P, v));
      }
      return;
    }
    case CanKind::Cond: {
      AutomatonFamily thenf = compile(t->kids[0], seq);
      AutomatonFamily elsef = compile(t->kids[1], seq);
      int ix = ctx_index(seq, t->var);
      for (auto& [g, vec] : payload_vecs)
        fam.members[g] = payload_of(P, vec, ix) != 0 ? thenf.members[g] : elsef.members[g];
      return;
    }
    case CanKind::Assign: {
      int ix = ctx_index(seq, t->var);
      int iy = ctx_index(seq, t->var2);
      const TypeView& xv = *P.ctx_views[ix];
      for (auto& [g, vec] : payload_vecs) {
        int j = payload_of(P, vec, iy);
        AutoBuilder b;
        b.letters = fam.alphabet.letters;
        b.initial = b.add_state("i", true);
        State s2 = b.add_state("s2", false);
        State s3 = b.add_state("s3", false);
        State s4 = b.add_state("s4", false);
        State s5 = b.add_state("s5", true);
        b.add(b.initial, g, {BOT}, s2, {s2});
        b.add(s2, xv.write_q[j], {s2, BOT}, s3, {s2, s3});
        b.add(s3, xv.write_a, {s2, s3}, s4, {s2, s4});
        b.add(s4, rhs_value_letter(P, 0), {s2}, s5, {s5});
        fam.members[g] = b.freeze();
      }
      return;
    }
    case CanKind::Deref: {
      int ix = ctx_index(seq, t->var);
      const TypeView& xv = *P.ctx_views[ix];
      for (auto& [g, vec] : payload_vecs) {
        (void)vec;
        AutoBuilder b;
        b.letters = fam.alphabet.letters;
        b.initial = b.add_state("i", true);
        State s2 = b.add_state("s2", false);
        State s3 = b.add_state("s3", false);
        b.add(b.initial, g, {BOT}, s2, {s2});
        b.add(s2, xv.read_q, {s2, BOT}, s3, {s2, s3});
        for (int j = 0; j < k_; ++j) {
          State s4 = b.add_state("s4." + std::to_string(j), false);
          State s5 = b.add_state("s5." + std::to_string(j), true);
          b.add(s3, xv.read_a[j], {s2, s3}, s4, {s2, s4});
          b.add(s4, rhs_value_letter(P, j), {s2}, s5, {s5});
        }
        fam.members[g] = b.freeze();
      }
      return;
    }
    case CanKind::Lambda:
      build_lambda(t, seq, fam, payload_vecs);
      return;
    case CanKind::Mkvar:
      build_mkvar(t, seq, fam, payload_vecs);
      return;
    case CanKind::While:
      build_while(t, seq, fam, payload_vecs);
      return;
    case CanKind::RefLet:
      build_reflet(t, seq, fam, payload_vecs);
      return;
    case CanKind::LetBase:
      build_let_base(t, seq, fam, payload_vecs);
      return;
    case CanKind::LetAppBase:
      build_let_app_base(t, seq, fam, payload_vecs);
      return;
    case CanKind::LetAppFn:
    case CanKind::LetAppMkvar:
      build_let_app_threaded(t, seq, fam, payload_vecs);
      return;
    }
    throw FragmentViolation("construct outside the P-strict fragment");
  }

  // ---- λx.M: thread interleavings, O switches only at final states --------
  void build_lambda(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                    const std::map<int, std::vector<int>>& payload_vecs) {
    if (!t->binder_type->is_base())
      throw FragmentViolation("lambda binder must be of base type in this fragment");
    const Prearena& P = *fam.arena;
    TypeSequent sub_seq =
        with_subject(extend(seq, t->binder, t->binder_type), t->kids[0]->type);
    AutomatonFamily sub = compile(t->kids[0], sub_seq);
    const Prearena& S = *sub.arena;

    std::vector<int> move_map(S.moves.size(), -1);
    for (size_t i = 0; i < seq.context.size(); ++i)
      map_views(*S.ctx_views[i], *P.ctx_views[i], move_map);
    map_views(*S.rhs_view, *P.rhs_view->rest_view, move_map);
    auto lmap = letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);

    bool x_int = t->binder_type->kind == TypeKind::Int;
    int a0 = P.rhs_view->values[0];

    for (auto& [g, vec] : payload_vecs) {
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", true);
      b.add(b.initial, g, {BOT}, s2, {s2});
      b.add(s2, a0, {s2}, s3, {s3});
      int nvals = x_int ? k_ : 1;
      for (int ix = 0; ix < nvals; ++ix) {
        const Wndcma& m = sub.members.at(sub_initial(S, vec, x_int ? std::vector<int>{ix}
                                                                   : std::vector<int>{}));
        auto smap = clone_states(b, m, "x" + std::to_string(ix) + "/", true);
        State sec = smap[secondary_of(m)];
        b.add(s3, P.rhs_view->arg_questions[ix], {s3, BOT}, sec, {s3, sec});
        for (const Trans& tr : m.trans) {
          if (tr.src == m.initial) continue;
          int L = lmap[tr.letter];
          if (L < 0) throw std::logic_error("unmapped letter in lambda case");
          const Move& mv = S.move(tr.letter);
          if (mv.comp == -1) {
            // RHS move: one level deeper, under the root held at s3
            std::vector<State> sig = {s3};
            for (State s : map_states(tr.sig, smap)) sig.push_back(s);
            std::vector<State> upd = {s3};
            for (State s : map_states(tr.upd, smap)) upd.push_back(s);
            b.add(smap[tr.src], L, sig, smap[tr.dst], upd);
          } else {
            // context move: same level, root slot now held at s3
            std::vector<State> sig = map_states(tr.sig, smap);
            std::vector<State> upd = map_states(tr.upd, smap);
            sig[0] = s3;
            upd[0] = s3;
            b.add(smap[tr.src], L, sig, smap[tr.dst], upd);
          }
        }
      }
      close_finals(b); // realizes the thread-switching rule
      fam.members[g] = b.freeze();
    }
  }

  // ---- mkvar(λu.M1, λv.M2): repeatable read/write accesses -----------------
  void build_mkvar(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                   const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    TypeSequent seq1 = with_subject(extend(seq, t->aux1, RmlType::unit_t()), RmlType::int_t());
    TypeSequent seq2 = with_subject(extend(seq, t->aux2, RmlType::int_t()), RmlType::unit_t());
    AutomatonFamily m1 = compile(t->kids[0], seq1);
    AutomatonFamily m2 = compile(t->kids[1], seq2);

    auto map_for = [&](const AutomatonFamily& sub, bool is_read) {
      std::vector<int> move_map(sub.arena->moves.size(), -1);
      for (size_t i = 0; i < seq.context.size(); ++i)
        map_views(*sub.arena->ctx_views[i], *P.ctx_views[i], move_map);
      // the method's result answers become the cell's read/write answers
      const auto& vals = sub.arena->rhs_view->values;
      if (is_read)
        for (int j = 0; j < k_; ++j) move_map[vals[j]] = P.rhs_view->read_a[j];
      else
        move_map[vals[0]] = P.rhs_view->write_a;
      return letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);
    };
    auto lm1 = map_for(m1, true);
    auto lm2 = map_for(m2, false);

    for (auto& [g, vec] : payload_vecs) {
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", true);
      b.add(b.initial, g, {BOT}, s2, {s2});
      b.add(s2, P.rhs_view->values[0], {s2}, s3, {s3});

      std::vector<std::pair<int, const Wndcma*>> openers; // (letter, member)
      const Wndcma& r = m1.members.at(sub_initial(*m1.arena, vec, {}));
      openers.emplace_back(P.rhs_view->read_q, &r);
      std::vector<const std::vector<int>*> lmaps = {&lm1};
      for (int j = 0; j < k_; ++j) {
        openers.emplace_back(P.rhs_view->write_q[j],
                             &m2.members.at(sub_initial(*m2.arena, vec, {j})));
        lmaps.push_back(&lm2);
      }
      for (size_t oi = 0; oi < openers.size(); ++oi) {
        const Wndcma& m = *openers[oi].second;
        const std::vector<int>& lm = *lmaps[oi];
        const Prearena& S = oi == 0 ? *m1.arena : *m2.arena;
        auto smap = clone_states(b, m, "o" + std::to_string(oi) + "/", true);
        State sec = smap[secondary_of(m)];
        b.add(s3, openers[oi].first, {s3, BOT}, sec, {s3, sec});
        for (const Trans& tr : m.trans) {
          if (tr.src == m.initial) continue;
          int L = lm[tr.letter];
          if (L < 0) throw std::logic_error("unmapped letter in mkvar case");
          const Move& mv = S.move(tr.letter);
          std::vector<State> sig, upd;
          if (mv.comp == -1) {
            sig = {s3};
            for (State s : map_states(tr.sig, smap)) sig.push_back(s);
            upd = {s3};
            for (State s : map_states(tr.upd, smap)) upd.push_back(s);
          } else {
            sig = map_states(tr.sig, smap);
            upd = map_states(tr.upd, smap);
            sig[0] = s3;
            upd[0] = s3;
          }
          b.add(smap[tr.src], L, sig, smap[tr.dst], upd);
        }
      }
      close_finals(b); // repeat accesses from every completion point
      fam.members[g] = b.freeze();
    }
  }

  // ---- while M do N ---------------------------------------------------------
  void build_while(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                   const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    AutomatonFamily mf = compile(t->kids[0], with_subject(seq, RmlType::int_t()));
    AutomatonFamily nf = compile(t->kids[1], with_subject(seq, RmlType::unit_t()));

    auto ctx_map = [&](const AutomatonFamily& sub) {
      std::vector<int> move_map(sub.arena->moves.size(), -1);
      for (size_t i = 0; i < seq.context.size(); ++i)
        map_views(*sub.arena->ctx_views[i], *P.ctx_views[i], move_map);
      return letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);
    };
    auto lm_m = ctx_map(mf);
    auto lm_n = ctx_map(nf);
    const auto& m_results = mf.arena->rhs_view->values; // int answers
    int n_result = nf.arena->rhs_view->values[0];

    for (auto& [g, vec] : payload_vecs) {
      (void)vec;
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      detail::WhileComposeInput in;
      in.m = &mf.members.at(g);
      in.n = &nf.members.at(g);
      in.m_result_payload = [&](int l) {
        for (int j = 0; j < k_; ++j)
          if (m_results[j] == l) return j;
        return -1;
      };
      in.n_is_result = [&](int l) { return l == n_result; };
      in.map_m_letter = [&](int l) { return lm_m[l]; };
      in.map_n_letter = [&](int l) { return lm_n[l]; };
      in.gamma_letter = g;
      in.unit_answer_letter = rhs_value_letter(P, 0);
      detail::while_compose(b, in);
      fam.members[g] = b.freeze();
    }
  }

  // ---- let x = ref 0 in M: good-variable restriction, then hiding ----------
  void build_reflet(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                    const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    TypeSequent sub_seq = extend(seq, t->binder, RmlType::intref_t());
    AutomatonFamily sub = compile(t->kids[0], sub_seq);
    const Prearena& S = *sub.arena;
    int xi = (int)seq.context.size();
    const TypeView& xv = *S.ctx_views[xi];

    std::vector<int> move_map(S.moves.size(), -1);
    for (size_t i = 0; i < seq.context.size(); ++i)
      map_views(*S.ctx_views[i], *P.ctx_views[i], move_map);
    map_views(*S.rhs_view, *P.rhs_view, move_map);
    auto lmap = letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);

    std::set<int> x_questions = {xv.read_q};
    for (int q : xv.write_q) x_questions.insert(q);
    std::set<int> x_letters = x_questions;
    for (int a : xv.read_a) x_letters.insert(a);
    x_letters.insert(xv.write_a);

    for (auto& [g, vec] : payload_vecs) {
      const Wndcma& m = sub.members.at(sub_initial(S, vec, {}));
      fam.members[g] = ref_wrap(m, S, xv, x_questions, x_letters, lmap, g,
                                fam.alphabet.letters);
    }
  }

  Wndcma ref_wrap(const Wndcma& m, const Prearena& S, const TypeView& xv,
                  const std::set<int>& x_questions, const std::set<int>& x_letters,
                  const std::vector<int>& lmap, int gamma,
                  const std::vector<std::string>& parent_letters) {
    // Stage 1: good-variable restriction; every state is paired with the
    // current variable value, stored in both control and the root slot.
    AutoBuilder b;
    b.letters.resize(lmap.size()); // stage-1 transitions keep sub letter ids
    std::map<std::pair<State, int>, State> pmap;
    auto pstate = [&](State base, int val) {
      auto it = pmap.find({base, val});
      if (it != pmap.end()) return it->second;
      State s = b.add_state(m.state_names[base] + "#" + std::to_string(val),
                            m.finals[base] != 0);
      pmap[{base, val}] = s;
      return s;
    };
    b.initial = b.add_state("i", true);

    auto pair_vec = [&](const std::vector<State>& v, const std::vector<int>& vals) {
      std::vector<State> out;
      for (size_t i = 0; i < v.size(); ++i)
        out.push_back(v[i] == BOT ? BOT : pstate(v[i], vals[i]));
      return out;
    };

    for (const Trans& tr : m.trans) {
      if (tr.src == m.initial) {
        b.add(b.initial, tr.letter, {BOT}, pstate(tr.dst, 0), {pstate(tr.upd[0], 0)});
        continue;
      }
      const Move& mv = S.move(tr.letter < (int)S.moves.size() ? tr.letter : 0);
      bool is_tagged = tr.letter >= (int)S.moves.size();
      bool is_write = !is_tagged && x_questions.count(tr.letter) && mv.payload &&
                      xv.write_q[*mv.payload] == tr.letter;
      bool is_read_ans = !is_tagged && x_letters.count(tr.letter) && !x_questions.count(tr.letter) &&
                         tr.letter != xv.write_a;
      bool is_rhs_question = !is_tagged && mv.comp == -1 && mv.question;
      int width = (int)tr.sig.size();

      // enumerate free pairings for the signature slots
      std::vector<int> vals(width, 0);
      std::function<void(int, std::function<void(const std::vector<int>&)>)> enum_vals =
          [&](int pos, std::function<void(const std::vector<int>&)> fn) {
            if (pos == width) {
              fn(vals);
              return;
            }
            if (tr.sig[pos] == BOT) {
              vals[pos] = 0;
              enum_vals(pos + 1, fn);
              return;
            }
            for (int i = 0; i < k_; ++i) {
              vals[pos] = i;
              enum_vals(pos + 1, fn);
            }
          };

      if (is_rhs_question) {
        // control re-syncs with the root pairing; updates refresh to it
        enum_vals(0, [&](const std::vector<int>& sv) {
          int i0 = sv[0];
          std::vector<int> uv(width, i0);
          b.add(pstate(tr.src, i0), tr.letter, pair_vec(tr.sig, sv), pstate(tr.dst, i0),
                pair_vec(tr.upd, uv));
        });
      } else if (is_write) {
        int j = *mv.payload;
        std::vector<int> uv(width, j);
        for (int i1 = 0; i1 < k_; ++i1)
          enum_vals(0, [&](const std::vector<int>& sv) {
            b.add(pstate(tr.src, i1), tr.letter, pair_vec(tr.sig, sv), pstate(tr.dst, j),
                  pair_vec(tr.upd, uv));
          });
      } else if (is_read_ans) {
        int j = *mv.payload;
        std::vector<int> uv(width, j);
        enum_vals(0, [&](const std::vector<int>& sv) {
          b.add(pstate(tr.src, j), tr.letter, pair_vec(tr.sig, sv), pstate(tr.dst, j),
                pair_vec(tr.upd, uv));
        });
      } else {
        for (int i = 0; i < k_; ++i) {
          std::vector<int> uv(width, i);
          enum_vals(0, [&](const std::vector<int>& sv) {
            b.add(pstate(tr.src, i), tr.letter, pair_vec(tr.sig, sv), pstate(tr.dst, i),
                  pair_vec(tr.upd, uv));
          });
        }
      }
    }

    // Stage 2: hiding. The x-dialogue between two real moves is compressed.
    Wndcma c = b.freeze();

    // index transitions of c
    std::map<State, std::vector<const Trans*>> by_src;
    for (const Trans& tr : c.trans) by_src[tr.src].push_back(&tr);

    auto is_x_letter = [&](int l) { return l < (int)S.moves.size() && x_letters.count(l); };
    auto is_x_question_letter = [&](int l) {
      return l < (int)S.moves.size() && x_questions.count(l);
    };

    std::vector<Trans> compressed;
    for (const auto& [s0, edges] : by_src) {
      for (const Trans* e0 : edges) {
        if (!is_x_question_letter(e0->letter)) continue;
        // walk the forced dialogue
        State ctrl = e0->dst;
        State root = e0->upd[0];
        State child = e0->upd[1];
        std::set<std::pair<State, State>> seen;
        bool diverged = false;
        for (;;) {
          // the unique forced answer
          const Trans* ans = nullptr;
          for (const Trans* e : by_src[ctrl])
            if (is_x_letter(e->letter) && !is_x_question_letter(e->letter) &&
                e->sig == std::vector<State>{root, child}) {
              if (ans) throw std::logic_error("ambiguous good-variable answer");
              ans = e;
            }
          if (!ans) { diverged = true; break; }
          ctrl = ans->dst;
          root = ans->upd[0];
          // next question, if the dialogue continues
          const Trans* next = nullptr;
          for (const Trans* e : by_src[ctrl])
            if (is_x_question_letter(e->letter) && e->sig == std::vector<State>{root, BOT}) {
              if (next) throw std::logic_error("ambiguous good-variable question");
              next = e;
            }
          if (!next) break;
          if (!seen.insert({ctrl, root}).second) { diverged = true; break; }
          ctrl = next->dst;
          root = next->upd[0];
          child = next->upd[1];
        }
        if (diverged) continue;
        for (const Trans* e : by_src[ctrl]) {
          if (is_x_letter(e->letter)) continue;
          if (e->sig.empty() || e->sig[0] != root) continue;
          Trans n = *e;
          n.src = s0;
          n.sig[0] = e0->sig[0];
          compressed.push_back(std::move(n));
        }
      }
    }

    // assemble: non-x edges + compressed ones, letters mapped to the parent
    AutoBuilder out;
    out.letters = parent_letters;
    std::vector<State> smap(c.num_states(), -1);
    for (State s = 0; s < c.num_states(); ++s)
      smap[s] = out.add_state(c.state_names[s], c.finals[s] != 0);
    out.initial = smap[c.initial];
    auto add_mapped = [&](const Trans& tr) {
      if (tr.src == c.initial) {
        out.add(smap[tr.src], gamma, {BOT}, smap[tr.dst], map_states(tr.upd, smap));
        return;
      }
      if (is_x_letter(tr.letter)) return;
      int L = lmap[tr.letter];
      if (L < 0) throw std::logic_error("unmapped letter after hiding");
      out.add(smap[tr.src], L, map_states(tr.sig, smap), smap[tr.dst], map_states(tr.upd, smap));
    };
    for (const Trans& tr : c.trans) add_mapped(tr);
    for (const Trans& tr : compressed) add_mapped(tr);
    close_finals(out);
    return cleanup(out.freeze(), 20000);
  }

  // ---- let x = M in N (and let x = z y in N via a small producer) ----------
  void build_let_base(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                      const std::map<int, std::vector<int>>& payload_vecs) {
    AutomatonFamily mf = compile(t->kids[0], with_subject(seq, t->binder_type));
    TypeSequent nseq = extend(seq, t->binder, t->binder_type);
    AutomatonFamily nf = compile(t->kids[1], nseq);
    compose_let(fam, payload_vecs, seq, mf, nf, t->binder_type);
  }

  void build_let_app_base(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                          const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    int iz = ctx_index(seq, t->var);
    int iy = ctx_index(seq, t->var2);
    TypePtr res = t->binder_type;
    if (!res->is_base())
      throw FragmentViolation("context variables have arity one in the P-strict fragment");
    // producer for `z y` over Γ |- res
    TypeSequent pseq = with_subject(seq, res);
    AutomatonFamily producer;
    producer.arena = prearena_of_sequent(pseq, k_);
    producer.alphabet = make_alphabet(*producer.arena, false);
    const Prearena& PP = *producer.arena;
    const TypeView& zv = *PP.ctx_views[iz];
    auto pv = payloads_by_initial(PP);
    for (auto& [g, vec] : pv) {
      int j = payload_of(PP, vec, iy);
      AutoBuilder b;
      b.letters = producer.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", false);
      b.add(b.initial, g, {BOT}, s2, {s2});
      int qz = zv.arg_questions[PP.seq.context[iz].second->dom->kind == TypeKind::Int ? j : 0];
      b.add(s2, qz, {s2, BOT}, s3, {s2, s3});
      const auto& answers = zv.rest_view->values;
      int nvals = res->kind == TypeKind::Int ? k_ : 1;
      for (int v = 0; v < nvals; ++v) {
        State s4 = b.add_state("s4." + std::to_string(v), false);
        State s5 = b.add_state("s5." + std::to_string(v), true);
        b.add(s3, answers[v], {s2, s3}, s4, {s2, s4});
        b.add(s4, rhs_value_letter(PP, v), {s2}, s5, {s5});
      }
      producer.members[g] = b.freeze();
    }
    TypeSequent nseq = extend(seq, t->binder, res);
    AutomatonFamily nf = compile(t->kids[0], nseq);
    compose_let(fam, payload_vecs, seq, producer, nf, res);
    (void)P;
  }

  void compose_let(AutomatonFamily& fam, const std::map<int, std::vector<int>>& payload_vecs,
                   const TypeSequent& seq, const AutomatonFamily& mf, const AutomatonFamily& nf,
                   const TypePtr& xtype) {
    const Prearena& P = *fam.arena;
    auto ctx_map = [&](const AutomatonFamily& sub, bool with_rhs) {
      std::vector<int> move_map(sub.arena->moves.size(), -1);
      for (size_t i = 0; i < seq.context.size(); ++i)
        map_views(*sub.arena->ctx_views[i], *P.ctx_views[i], move_map);
      if (with_rhs) map_views(*sub.arena->rhs_view, *P.rhs_view, move_map);
      return letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);
    };
    auto lm_m = ctx_map(mf, false);
    auto lm_n = ctx_map(nf, true);
    const auto& m_results = mf.arena->rhs_view->values;

    for (auto& [g, vec] : payload_vecs) {
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      detail::LetComposeInput in;
      in.m = &mf.members.at(g);
      in.result_payload = [&](int l) {
        for (size_t j = 0; j < m_results.size(); ++j)
          if (m_results[j] == l) return (int)j;
        return -1;
      };
      in.n_of = [&, vec = vec](int payload) {
        int extra = xtype->kind == TypeKind::Int ? payload : 0;
        (void)extra;
        std::vector<int> xs;
        if (xtype->kind == TypeKind::Int) xs.push_back(payload);
        return &nf.members.at(sub_initial(*nf.arena, vec, xs));
      };
      in.map_m_letter = [&](int l) { return lm_m[l]; };
      in.map_n_letter = [&](int l) { return lm_n[l]; };
      in.gamma_letter = g;
      detail::let_compose(b, in);
      fam.members[g] = b.freeze();
    }
  }

  // ---- let x = z(λy.M) in N and let x = z mkvar(...) in N -------------------
  void build_let_app_threaded(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                              const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    int iz = ctx_index(seq, t->var);
    const TypeView& zv = *P.ctx_views[iz];
    TypePtr ztype = seq.context[iz].second;
    TypePtr res = ztype->cod;
    if (!res->is_base())
      throw FragmentViolation("context variables have arity one in the P-strict fragment");

    // thread families
    struct ThreadKind {
      AutomatonFamily fam;
      std::vector<int> lmap;
      std::vector<int> opener_payloads; // values of the opening question
      std::vector<int> opener_letters;
      bool int_indexed; // member chosen by the opener payload
    };
    std::vector<ThreadKind> kinds;

    auto ctx_and = [&](const AutomatonFamily& sub,
                       const std::function<void(std::vector<int>&)>& extra) {
      std::vector<int> move_map(sub.arena->moves.size(), -1);
      for (size_t i = 0; i < seq.context.size(); ++i)
        map_views(*sub.arena->ctx_views[i], *P.ctx_views[i], move_map);
      extra(move_map);
      return letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);
    };

    const CanPtr& body = t->kind == CanKind::LetAppFn ? t->kids[1] : t->kids[2];
    if (t->kind == CanKind::LetAppFn) {
      TypePtr arg = ztype->dom; // β -> θ1
      TypeSequent mseq = with_subject(extend(seq, t->aux1, arg->dom), arg->cod);
      ThreadKind k1;
      k1.fam = compile(t->kids[0], mseq);
      k1.lmap = ctx_and(k1.fam, [&](std::vector<int>& mm) {
        map_views(*k1.fam.arena->rhs_view, *zv.arg_view->rest_view, mm);
      });
      int n = arg->dom->kind == TypeKind::Int ? k_ : 1;
      for (int j = 0; j < n; ++j) {
        k1.opener_payloads.push_back(j);
        k1.opener_letters.push_back(zv.arg_view->arg_questions[j]);
      }
      k1.int_indexed = arg->dom->kind == TypeKind::Int;
      kinds.push_back(std::move(k1));
    } else {
      TypeSequent rseq = with_subject(extend(seq, t->aux1, RmlType::unit_t()), RmlType::int_t());
      TypeSequent wseq = with_subject(extend(seq, t->aux2, RmlType::int_t()), RmlType::unit_t());
      ThreadKind kr, kw;
      kr.fam = compile(t->kids[0], rseq);
      kr.lmap = ctx_and(kr.fam, [&](std::vector<int>& mm) {
        for (int j = 0; j < k_; ++j)
          mm[kr.fam.arena->rhs_view->values[j]] = zv.arg_view->read_a[j];
      });
      kr.opener_payloads = {0};
      kr.opener_letters = {zv.arg_view->read_q};
      kr.int_indexed = false;
      kinds.push_back(std::move(kr));
      kw.fam = compile(t->kids[1], wseq);
      kw.lmap = ctx_and(kw.fam, [&](std::vector<int>& mm) {
        mm[kw.fam.arena->rhs_view->values[0]] = zv.arg_view->write_a;
      });
      for (int j = 0; j < k_; ++j) {
        kw.opener_payloads.push_back(j);
        kw.opener_letters.push_back(zv.arg_view->write_q[j]);
      }
      kw.int_indexed = true;
      kinds.push_back(std::move(kw));
    }

    TypeSequent nseq = extend(seq, t->binder, res);
    AutomatonFamily nf = compile(body, nseq);
    auto lm_n = ctx_and(nf, [&](std::vector<int>& mm) {
      map_views(*nf.arena->rhs_view, *P.rhs_view, mm);
    });

    int qz = zv.arg_questions[0]; // the function/cell argument question
    const auto& az = zv.rest_view->values;

    for (auto& [g, vec] : payload_vecs) {
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", false);
      b.add(b.initial, g, {BOT}, s2, {s2});
      b.add(s2, qz, {s2, BOT}, s3, {s2, s3});

      // N entry per result value
      int nvals = res->kind == TypeKind::Int ? k_ : 1;
      std::vector<State> m_finals;
      for (int v = 0; v < nvals; ++v) {
        const Wndcma& N = nf.members.at(
            sub_initial(*nf.arena, vec, res->kind == TypeKind::Int ? std::vector<int>{v}
                                                                   : std::vector<int>{}));
        auto nmap = clone_states(b, N, "n" + std::to_string(v) + "/", true);
        State secN = nmap[secondary_of(N)];
        // the question value is dead after this answer; leave it at s3 so it
        // keeps holding level-1 values only
        b.add(s3, az[v], {s2, s3}, secN, {s2, s3});
        for (const Trans& tr : N.trans) {
          if (tr.src == N.initial) continue;
          int L = lm_n[tr.letter];
          if (L < 0) throw std::logic_error("unmapped N letter");
          b.add(nmap[tr.src], L, map_states(tr.sig, nmap), nmap[tr.dst],
                map_states(tr.upd, nmap));
        }
        // the root still holds s2 when the body starts
        detail::rebase_entry_region(b, N, nmap, [&](int l) { return lm_n[l]; }, {s2});
      }

      // thread members, interleaved like the lambda case but two levels down
      for (auto& kind : kinds) {
        for (size_t oi = 0; oi < kind.opener_letters.size(); ++oi) {
          int payload = kind.opener_payloads[oi];
          const Wndcma& M = kind.fam.members.at(
              sub_initial(*kind.fam.arena, vec,
                          kind.int_indexed ? std::vector<int>{payload} : std::vector<int>{}));
          // completion points of a thread are switch points, not accepting
          // states: the z question is still pending there
          auto smap = clone_states(b, M, "t" + std::to_string(oi) + "/", false);
          State secM = smap[secondary_of(M)];
          b.add(s3, kind.opener_letters[oi], {s2, s3, BOT}, secM, {s2, s3, secM});
          for (const Trans& tr : M.trans) {
            if (tr.src == M.initial) continue;
            int L = kind.lmap[tr.letter];
            if (L < 0) throw std::logic_error("unmapped thread letter");
            const Move& mv = kind.fam.arena->move(tr.letter);
            std::vector<State> sig, upd;
            if (mv.comp == -1) {
              sig = {s2, s3};
              for (State s : map_states(tr.sig, smap)) sig.push_back(s);
              upd = {s2, s3};
              for (State s : map_states(tr.upd, smap)) upd.push_back(s);
            } else {
              sig = map_states(tr.sig, smap);
              upd = map_states(tr.upd, smap);
              sig[0] = s2;
              upd[0] = s2;
            }
            b.add(smap[tr.src], L, sig, smap[tr.dst], upd);
          }
          for (State s = 0; s < (State)M.num_states(); ++s)
            if (s != M.initial && M.finals[s]) m_finals.push_back(smap[s]);
        }
      }

      // O may switch threads or answer the z question at any completion point
      std::vector<State> sources = m_finals;
      sources.push_back(s3);
      share_outgoing(b, sources, m_finals);
      close_finals(b);
      fam.members[g] = b.freeze();
    }
  }

};

} // namespace

AutomatonFamily compile_pstrict(const CanPtr& t, const TypeSequent& seq, int k) {
  FragmentClass fc = classify(seq);
  if (!fc.in_pstrict)
    throw FragmentViolation("sequent is not in the P-strict fragment: " + sequent_to_string(seq));
  PstrictCompiler c(k);
  return c.compile(t, seq);
}

} // namespace rmleq
