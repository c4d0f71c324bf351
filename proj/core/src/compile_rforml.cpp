#include "rmleq/classify.hpp"
#include "compile_detail.hpp"

#include <algorithm>

namespace rmleq {

using detail::AutoBuilder;
using detail::clone_states;
using detail::close_finals;
using detail::ctx_index;
using detail::letter_map_from_moves;
using detail::map_states;
using detail::payload_of;
using detail::payloads_by_initial;
using detail::rhs_value_letter;
using detail::secondary_of;
using detail::value_member;

namespace {

// Pair the structure below two views, ignoring their top value moves (used
// when a variable's moves are relabelled into a partial application of z).
void map_view_below(const TypeView& a, const TypeView& b, std::vector<int>& m) {
  if (a.arg_questions.size() != b.arg_questions.size())
    throw std::logic_error("map_view_below: shape mismatch");
  for (size_t i = 0; i < a.arg_questions.size(); ++i) m[a.arg_questions[i]] = b.arg_questions[i];
  if (a.arg_view && b.arg_view) map_views(*a.arg_view, *b.arg_view, m);
  else if (a.arg_view || b.arg_view)
    throw std::logic_error("map_view_below: arg shape mismatch");
  if (a.rest_view && b.rest_view) map_views(*a.rest_view, *b.rest_view, m);
  else if (a.rest_view || b.rest_view)
    throw std::logic_error("map_view_below: rest shape mismatch");
  if (a.read_q >= 0) {
    m[a.read_q] = b.read_q;
    for (size_t j = 0; j < a.write_q.size(); ++j) {
      m[a.write_q[j]] = b.write_q[j];
      m[a.read_a[j]] = b.read_a[j];
    }
    m[a.write_a] = b.write_a;
  }
}

// First-level question moves of a context variable (the only x-moves whose
// pointers become ambiguous after relabelling under z).
std::vector<int> initial_questions(const TypeView& v) {
  std::vector<int> qs = v.arg_questions;
  if (v.read_q >= 0) {
    qs.push_back(v.read_q);
    for (int q : v.write_q) qs.push_back(q);
  }
  return qs;
}

class RformlCompiler {
public:
  explicit RformlCompiler(int k) : k_(k) {}

  AutomatonFamily compile(const CanPtr& t, const TypeSequent& seq) {
    AutomatonFamily fam;
    fam.arena = prearena_of_sequent(seq, k_);
    fam.alphabet = make_alphabet(*fam.arena, true);
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
  int sub_initial(const Prearena& sub, const std::vector<int>& parent_vec,
                  const std::vector<int>& extra) {
    std::vector<int> vec = parent_vec;
    for (int e : extra) vec.push_back(e);
    return sub.initial_by_payload.at(vec);
  }

  std::vector<int> ctx_move_map(const AutomatonFamily& sub, const TypeSequent& seq,
                                const Prearena& P) {
    std::vector<int> mm(sub.arena->moves.size(), -1);
    for (size_t i = 0; i < seq.context.size(); ++i)
      map_views(*sub.arena->ctx_views[i], *P.ctx_views[i], mm);
    return mm;
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
        b.add(s2, xv.write_q[j], {s2}, s3, {s3});
        b.add(s3, xv.write_a, {s3}, s4, {s4});
        b.add(s4, rhs_value_letter(P, 0), {s4}, s5, {s5});
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
        b.add(s2, xv.read_q, {s2}, s3, {s3});
        for (int j = 0; j < k_; ++j) {
          State s4 = b.add_state("s4." + std::to_string(j), false);
          State s5 = b.add_state("s5." + std::to_string(j), true);
          b.add(s3, xv.read_a[j], {s3}, s4, {s4});
          b.add(s4, rhs_value_letter(P, j), {s4}, s5, {s5});
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
    case CanKind::LetAppBase: {
      int iz = ctx_index(seq, t->var);
      TypePtr res = seq.context[iz].second->cod;
      if (res->is_base())
        build_let_app_base(t, seq, fam, payload_vecs);
      else
        build_let_app_relabel(t, seq, fam, payload_vecs);
      return;
    }
    case CanKind::LetAppFn:
    case CanKind::LetAppMkvar:
      build_let_app_threaded(t, seq, fam, payload_vecs);
      return;
    }
    throw FragmentViolation("construct outside the restricted fragment");
  }

  // ---- λx.M: every constituent transition drops one level deeper -----------
  void build_lambda(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                    const std::map<int, std::vector<int>>& payload_vecs) {
    if (!t->binder_type->is_base())
      throw FragmentViolation("lambda binder must be of base type in this fragment");
    const Prearena& P = *fam.arena;
    TypeSequent sub_seq =
        with_subject(extend(seq, t->binder, t->binder_type), t->kids[0]->type);
    AutomatonFamily sub = compile(t->kids[0], sub_seq);
    const Prearena& S = *sub.arena;

    std::vector<int> move_map = ctx_move_map(sub, seq, P);
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
        const Wndcma& m = sub.members.at(
            sub_initial(S, vec, x_int ? std::vector<int>{ix} : std::vector<int>{}));
        auto smap = clone_states(b, m, "x" + std::to_string(ix) + "/", true);
        State sec = smap[secondary_of(m)];
        b.add(s3, P.rhs_view->arg_questions[ix], {s3, BOT}, sec, {s3, sec});
        for (const Trans& tr : m.trans) {
          if (tr.src == m.initial) continue;
          int L = lmap[tr.letter];
          if (L < 0) throw std::logic_error("unmapped letter in lambda case");
          std::vector<State> sig = {s3};
          for (State s : map_states(tr.sig, smap)) sig.push_back(s);
          std::vector<State> upd = {s3};
          for (State s : map_states(tr.upd, smap)) upd.push_back(s);
          b.add(smap[tr.src], L, sig, smap[tr.dst], upd);
        }
      }
      close_finals(b);
      fam.members[g] = b.freeze();
    }
  }

  // ---- mkvar(λu.M1, λv.M2) --------------------------------------------------
  void build_mkvar(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                   const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    TypeSequent seq1 = with_subject(extend(seq, t->aux1, RmlType::unit_t()), RmlType::int_t());
    TypeSequent seq2 = with_subject(extend(seq, t->aux2, RmlType::int_t()), RmlType::unit_t());
    AutomatonFamily m1 = compile(t->kids[0], seq1);
    AutomatonFamily m2 = compile(t->kids[1], seq2);

    auto map_for = [&](const AutomatonFamily& sub, bool is_read) {
      std::vector<int> mm = ctx_move_map(sub, seq, P);
      const auto& vals = sub.arena->rhs_view->values;
      if (is_read)
        for (int j = 0; j < k_; ++j) mm[vals[j]] = P.rhs_view->read_a[j];
      else
        mm[vals[0]] = P.rhs_view->write_a;
      return letter_map_from_moves(sub.alphabet, fam.alphabet, mm);
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

      std::vector<std::tuple<int, const Wndcma*, const std::vector<int>*>> openers;
      openers.emplace_back(P.rhs_view->read_q, &m1.members.at(sub_initial(*m1.arena, vec, {})),
                           &lm1);
      for (int j = 0; j < k_; ++j)
        openers.emplace_back(P.rhs_view->write_q[j],
                             &m2.members.at(sub_initial(*m2.arena, vec, {j})), &lm2);
      int oi = 0;
      for (auto& [open_letter, mp, lmp] : openers) {
        const Wndcma& m = *mp;
        if (m.level != 0) throw std::logic_error("mkvar method automaton is not level-0");
        auto smap = clone_states(b, m, "o" + std::to_string(oi++) + "/", true);
        State sec = smap[secondary_of(m)];
        b.add(s3, open_letter, {s3, BOT}, sec, {s3, sec});
        for (const Trans& tr : m.trans) {
          if (tr.src == m.initial) continue;
          int L = (*lmp)[tr.letter];
          if (L < 0) throw std::logic_error("unmapped letter in mkvar case");
          std::vector<State> sig = {s3, map_states(tr.sig, smap)[0]};
          std::vector<State> upd = {s3, map_states(tr.upd, smap)[0]};
          b.add(smap[tr.src], L, sig, smap[tr.dst], upd);
        }
      }
      close_finals(b);
      fam.members[g] = b.freeze();
    }
  }

  // ---- while M do N ----------------------------------------------------------
  void build_while(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                   const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    AutomatonFamily mf = compile(t->kids[0], with_subject(seq, RmlType::int_t()));
    AutomatonFamily nf = compile(t->kids[1], with_subject(seq, RmlType::unit_t()));
    auto lm_m = letter_map_from_moves(mf.alphabet, fam.alphabet, ctx_move_map(mf, seq, P));
    auto lm_n = letter_map_from_moves(nf.alphabet, fam.alphabet, ctx_move_map(nf, seq, P));
    const auto& m_results = mf.arena->rhs_view->values;
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

  // ---- let x = M in N --------------------------------------------------------
  void build_let_base(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                      const std::map<int, std::vector<int>>& payload_vecs) {
    AutomatonFamily mf = compile(t->kids[0], with_subject(seq, t->binder_type));
    AutomatonFamily nf = compile(t->kids[1], extend(seq, t->binder, t->binder_type));
    compose_let(fam, payload_vecs, seq, mf, nf, t->binder_type);
  }

  void build_let_app_base(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                          const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    (void)P;
    int iz = ctx_index(seq, t->var);
    int iy = ctx_index(seq, t->var2);
    TypePtr res = seq.context[iz].second->cod;
    TypeSequent pseq = with_subject(seq, res);
    AutomatonFamily producer;
    producer.arena = prearena_of_sequent(pseq, k_);
    producer.alphabet = make_alphabet(*producer.arena, true);
    const Prearena& PP = *producer.arena;
    const TypeView& zv = *PP.ctx_views[iz];
    for (auto& [g, vec] : payloads_by_initial(PP)) {
      int j = payload_of(PP, vec, iy);
      AutoBuilder b;
      b.letters = producer.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", false);
      b.add(b.initial, g, {BOT}, s2, {s2});
      int qz = zv.arg_questions[PP.seq.context[iz].second->dom->kind == TypeKind::Int ? j : 0];
      b.add(s2, qz, {s2}, s3, {s3});
      const auto& answers = zv.rest_view->values;
      int nvals = res->kind == TypeKind::Int ? k_ : 1;
      for (int v = 0; v < nvals; ++v) {
        State s4 = b.add_state("s4." + std::to_string(v), false);
        State s5 = b.add_state("s5." + std::to_string(v), true);
        b.add(s3, answers[v], {s3}, s4, {s4});
        b.add(s4, rhs_value_letter(PP, v), {s4}, s5, {s5});
      }
      producer.members[g] = b.freeze();
    }
    AutomatonFamily nf = compile(t->kids[0], extend(seq, t->binder, res));
    compose_let(fam, payload_vecs, seq, producer, nf, res);
  }

  void compose_let(AutomatonFamily& fam, const std::map<int, std::vector<int>>& payload_vecs,
                   const TypeSequent& seq, const AutomatonFamily& mf, const AutomatonFamily& nf,
                   const TypePtr& xtype) {
    const Prearena& P = *fam.arena;
    auto mm_m = ctx_move_map(mf, seq, P);
    auto lm_m = letter_map_from_moves(mf.alphabet, fam.alphabet, mm_m);
    auto mm_n = ctx_move_map(nf, seq, P);
    map_views(*nf.arena->rhs_view, *P.rhs_view, mm_n);
    auto lm_n = letter_map_from_moves(nf.alphabet, fam.alphabet, mm_n);
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

  // ---- let x = z y in N with x of higher type: relabel x into z -------------
  void build_let_app_relabel(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                             const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    int iz = ctx_index(seq, t->var);
    int iy = ctx_index(seq, t->var2);
    TypePtr ztype = seq.context[iz].second;
    TypePtr res = ztype->cod;
    const TypeView& zv = *P.ctx_views[iz];

    TypeSequent nseq = extend(seq, t->binder, res);
    AutomatonFamily sub = compile(t->kids[0], nseq);
    const Prearena& S = *sub.arena;
    int xi = (int)seq.context.size();

    std::vector<int> move_map = ctx_move_map(sub, seq, P);
    map_views(*S.rhs_view, *P.rhs_view, move_map);
    map_view_below(*S.ctx_views[xi], *zv.rest_view, move_map);
    auto lmap = letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);

    std::set<int> x_init_q;
    for (int q : initial_questions(*S.ctx_views[xi])) x_init_q.insert(q);

    int a_z = zv.rest_view->values[0];
    int a_z_src = fam.alphabet.src_of[a_z];
    if (a_z_src < 0) throw std::logic_error("missing src tag for the z answer");

    for (auto& [g, vec] : payload_vecs) {
      const Wndcma& N = sub.members.at(sub_initial(S, vec, {}));
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", false);
      b.add(b.initial, g, {BOT}, s2, {s2});
      int j = payload_of(P, vec, iy);
      int qz = zv.arg_questions[ztype->dom->kind == TypeKind::Int ? j : 0];
      b.add(s2, qz, {s2}, s3, {s3});

      auto plain = clone_states(b, N, "p/", true);
      auto pend = clone_states(b, N, "s/", false); // src seen, target pending
      auto done = clone_states(b, N, "d/", true);  // pointer fully marked
      auto mem = clone_states(b, N, "tm/", false); // shared tagged memory

      State secN = secondary_of(N);
      b.add(s3, a_z, {s3}, plain[secN], {plain[secN]});
      b.add(s3, a_z_src, {s3}, pend[secN], {mem[secN]});

      int n_sub_moves = (int)S.moves.size();
      for (const Trans& tr : N.trans) {
        if (tr.src == N.initial) continue;
        int L = lmap[tr.letter];
        if (L < 0) throw std::logic_error("unmapped letter in relabel case");
        bool sub_tagged = tr.letter >= n_sub_moves;
        bool x_init = !sub_tagged && x_init_q.count(tr.letter) > 0;
        b.add(plain[tr.src], L, map_states(tr.sig, plain), plain[tr.dst],
              map_states(tr.upd, plain));
        if (sub_tagged) continue; // one pointer per word
        b.add(pend[tr.src], L, map_states(tr.sig, mem), pend[tr.dst], map_states(tr.upd, mem));
        b.add(done[tr.src], L, map_states(tr.sig, mem), done[tr.dst], map_states(tr.upd, mem));
        if (x_init) {
          int Lt = fam.alphabet.tgt_of[move_map[tr.letter]];
          if (Lt < 0) throw std::logic_error("missing tgt tag for relabelled question");
          b.add(pend[tr.src], Lt, map_states(tr.sig, mem), done[tr.dst],
                map_states(tr.upd, mem));
        }
      }
      close_finals(b);
      fam.members[g] = b.freeze();
    }
  }

  // ---- let x = z (λy.M) in N and let x = z mkvar(...) in N ------------------
  void build_let_app_threaded(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                              const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    int iz = ctx_index(seq, t->var);
    TypePtr ztype = seq.context[iz].second;
    TypePtr res = ztype->cod;
    const TypeView& zv = *P.ctx_views[iz];
    bool x_base = res->is_base();

    struct ThreadKind {
      AutomatonFamily fam;
      std::vector<int> lmap;
      std::vector<int> opener_letters;
      std::vector<int> opener_payloads;
      bool int_indexed;
    };
    std::vector<ThreadKind> kinds;

    const CanPtr& body = t->kind == CanKind::LetAppFn ? t->kids[1] : t->kids[2];
    if (t->kind == CanKind::LetAppFn) {
      TypePtr arg = ztype->dom;
      TypeSequent mseq = with_subject(extend(seq, t->aux1, arg->dom), arg->cod);
      ThreadKind k1;
      k1.fam = compile(t->kids[0], mseq);
      std::vector<int> mm = ctx_move_map(k1.fam, seq, P);
      const auto& vals = k1.fam.arena->rhs_view->values;
      const auto& closers = zv.arg_view->rest_view->values;
      for (size_t v = 0; v < vals.size(); ++v) mm[vals[v]] = closers[v];
      k1.lmap = letter_map_from_moves(k1.fam.alphabet, fam.alphabet, mm);
      int n = arg->dom->kind == TypeKind::Int ? k_ : 1;
      for (int j = 0; j < n; ++j) {
        k1.opener_letters.push_back(zv.arg_view->arg_questions[j]);
        k1.opener_payloads.push_back(j);
      }
      k1.int_indexed = arg->dom->kind == TypeKind::Int;
      kinds.push_back(std::move(k1));
    } else {
      TypeSequent rseq = with_subject(extend(seq, t->aux1, RmlType::unit_t()), RmlType::int_t());
      TypeSequent wseq = with_subject(extend(seq, t->aux2, RmlType::int_t()), RmlType::unit_t());
      ThreadKind kr, kw;
      kr.fam = compile(t->kids[0], rseq);
      {
        std::vector<int> mm = ctx_move_map(kr.fam, seq, P);
        for (int j = 0; j < k_; ++j)
          mm[kr.fam.arena->rhs_view->values[j]] = zv.arg_view->read_a[j];
        kr.lmap = letter_map_from_moves(kr.fam.alphabet, fam.alphabet, mm);
      }
      kr.opener_letters = {zv.arg_view->read_q};
      kr.opener_payloads = {0};
      kr.int_indexed = false;
      kinds.push_back(std::move(kr));
      kw.fam = compile(t->kids[1], wseq);
      {
        std::vector<int> mm = ctx_move_map(kw.fam, seq, P);
        mm[kw.fam.arena->rhs_view->values[0]] = zv.arg_view->write_a;
        kw.lmap = letter_map_from_moves(kw.fam.alphabet, fam.alphabet, mm);
      }
      for (int j = 0; j < k_; ++j) {
        kw.opener_letters.push_back(zv.write_q.empty() ? zv.arg_view->write_q[j]
                                                       : zv.arg_view->write_q[j]);
        kw.opener_payloads.push_back(j);
      }
      kw.int_indexed = true;
      kinds.push_back(std::move(kw));
    }

    TypeSequent nseq = extend(seq, t->binder, res);
    AutomatonFamily sub = compile(body, nseq);
    const Prearena& S = *sub.arena;
    int xi = (int)seq.context.size();

    std::vector<int> move_map = ctx_move_map(sub, seq, P);
    map_views(*S.rhs_view, *P.rhs_view, move_map);
    if (!x_base) map_view_below(*S.ctx_views[xi], *zv.rest_view, move_map);
    auto lmap = letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);

    std::set<int> x_init_q, x_pq;
    if (!x_base) {
      for (int q : initial_questions(*S.ctx_views[xi])) x_init_q.insert(q);
      for (const Move& mv : S.moves)
        if (mv.comp == xi && mv.question && !mv.opp) x_pq.insert(mv.id);
    }

    int qz = zv.arg_questions[0];
    const auto& az = zv.rest_view->values;

    for (auto& [g, vec] : payload_vecs) {
      const Wndcma& N = sub.members.at(
          sub_initial(S, vec, x_base && res->kind == TypeKind::Int ? std::vector<int>{0}
                                                                   : std::vector<int>{}));
      (void)N;
      AutoBuilder b;
      b.letters = fam.alphabet.letters;
      b.initial = b.add_state("i", true);
      State s2 = b.add_state("s2", false);
      State s3 = b.add_state("s3", false);
      b.add(b.initial, g, {BOT}, s2, {s2});
      b.add(s2, qz, {s2}, s3, {s3});

      // opening points for M-threads: state, chain memory, tagged word?
      struct OpenPoint {
        State s;
        std::vector<State> mem;
        bool tagged;
      };
      std::vector<OpenPoint> open_points;
      open_points.push_back({s3, {s3}, false});

      int nvals = x_base && res->kind == TypeKind::Int ? k_ : 1;
      for (int v = 0; v < nvals; ++v) {
        const Wndcma& Nv = sub.members.at(sub_initial(
            S, vec,
            x_base && res->kind == TypeKind::Int ? std::vector<int>{v} : std::vector<int>{}));
        std::string pfx = "n" + std::to_string(v);
        auto plain = clone_states(b, Nv, pfx + "p/", true);
        State secN = secondary_of(Nv);
        b.add(s3, az[v], {s3}, plain[secN], {plain[secN]});
        std::vector<State> pend, done, mem;
        if (!x_base) {
          pend = clone_states(b, Nv, pfx + "s/", false);
          done = clone_states(b, Nv, pfx + "d/", true);
          mem = clone_states(b, Nv, pfx + "tm/", false);
          int a_src = fam.alphabet.src_of[az[v]];
          if (a_src < 0) throw std::logic_error("missing src tag for the z answer");
          b.add(s3, a_src, {s3}, pend[secN], {mem[secN]});
        }
        int n_sub_moves = (int)S.moves.size();
        for (const Trans& tr : Nv.trans) {
          if (tr.src == Nv.initial) continue;
          int L = lmap[tr.letter];
          if (L < 0) throw std::logic_error("unmapped letter in threaded case");
          bool sub_tagged = tr.letter >= n_sub_moves;
          bool x_init = !sub_tagged && x_init_q.count(tr.letter) > 0;
          bool x_pquestion = !sub_tagged && x_pq.count(tr.letter) > 0;
          b.add(plain[tr.src], L, map_states(tr.sig, plain), plain[tr.dst],
                map_states(tr.upd, plain));
          if (x_pquestion)
            open_points.push_back({plain[tr.dst], map_states(tr.upd, plain), false});
          if (x_base || sub_tagged) continue;
          b.add(pend[tr.src], L, map_states(tr.sig, mem), pend[tr.dst], map_states(tr.upd, mem));
          b.add(done[tr.src], L, map_states(tr.sig, mem), done[tr.dst], map_states(tr.upd, mem));
          if (x_pquestion) {
            open_points.push_back({pend[tr.dst], map_states(tr.upd, mem), true});
            open_points.push_back({done[tr.dst], map_states(tr.upd, mem), true});
          }
          if (x_init) {
            int Lt = fam.alphabet.tgt_of[move_map[tr.letter]];
            if (Lt < 0) throw std::logic_error("missing tgt tag for relabelled question");
            b.add(pend[tr.src], Lt, map_states(tr.sig, mem), done[tr.dst],
                  map_states(tr.upd, mem));
            open_points.push_back({done[tr.dst], map_states(tr.upd, mem), true});
          }
        }
      }

      // M-threads: a thread freezes the chain and tracks its own progress in
      // the current value's slot, paired with the return point.
      std::set<std::string> op_seen;
      auto op_key = [](const OpenPoint& o) {
        std::string k = std::to_string(o.s);
        for (State s : o.mem) k += "," + std::to_string(s);
        return k;
      };
      for (size_t opi = 0; opi < open_points.size(); ++opi) {
        OpenPoint op = open_points[opi];
        if (!op_seen.insert(op_key(op)).second) continue;
        for (size_t ki = 0; ki < kinds.size(); ++ki) {
          ThreadKind& kind = kinds[ki];
          for (size_t oi = 0; oi < kind.opener_letters.size(); ++oi) {
            int payload = kind.opener_payloads[oi];
            const Wndcma& M = kind.fam.members.at(
                sub_initial(*kind.fam.arena, vec,
                            kind.int_indexed ? std::vector<int>{payload} : std::vector<int>{}));
            if (M.level != 0) throw std::logic_error("thread automaton is not level-0");
            // thread controls and paired memory states
            std::string pfx = "th" + std::to_string(opi) + "." + std::to_string(ki) + "." +
                              std::to_string(oi) + "/";
            std::vector<State> tmap(M.num_states(), -1);
            std::map<State, State> pmem; // M-state -> paired memory state
            auto thr = [&](State ms) {
              if (tmap[ms] < 0) tmap[ms] = b.add_state(pfx + M.state_names[ms], false);
              return tmap[ms];
            };
            auto pm = [&](State ms) {
              auto it = pmem.find(ms);
              if (it != pmem.end()) return it->second;
              State s = b.add_state(pfx + "&" + M.state_names[ms], false);
              pmem[ms] = s;
              return s;
            };
            auto paired_mem = [&](State ms) {
              std::vector<State> v = op.mem;
              v.back() = pm(ms);
              return v;
            };
            State secM = secondary_of(M);
            b.add(op.s, kind.opener_letters[oi], op.mem, thr(secM), paired_mem(secM));
            int m_sub_moves = (int)kind.fam.arena->moves.size();
            for (const Trans& tr : M.trans) {
              if (tr.src == M.initial) continue;
              if (op.tagged && tr.letter >= m_sub_moves) continue; // one pointer per word
              int L = kind.lmap[tr.letter];
              if (L < 0) throw std::logic_error("unmapped thread letter");
              if (M.finals[tr.dst]) {
                b.add(thr(tr.src), L, paired_mem(tr.sig[0]), op.s, op.mem);
              } else {
                b.add(thr(tr.src), L, paired_mem(tr.sig[0]), thr(tr.dst),
                      paired_mem(tr.upd[0]));
              }
            }
          }
        }
      }
      close_finals(b);
      fam.members[g] = b.freeze();
    }
  }

  // ---- let x = ref 0 in M ----------------------------------------------------
  void build_reflet(const CanPtr& t, const TypeSequent& seq, AutomatonFamily& fam,
                    const std::map<int, std::vector<int>>& payload_vecs) {
    const Prearena& P = *fam.arena;
    TypeSequent sub_seq = extend(seq, t->binder, RmlType::intref_t());
    AutomatonFamily sub = compile(t->kids[0], sub_seq);
    const Prearena& S = *sub.arena;
    int xi = (int)seq.context.size();
    const TypeView& xv = *S.ctx_views[xi];

    std::vector<int> move_map = ctx_move_map(sub, seq, P);
    map_views(*S.rhs_view, *P.rhs_view, move_map);
    auto lmap = letter_map_from_moves(sub.alphabet, fam.alphabet, move_map);

    for (auto& [g, vec] : payload_vecs) {
      const Wndcma& m = sub.members.at(sub_initial(S, vec, {}));
      fam.members[g] = ref_wrap(m, S, xv, lmap, g, fam.alphabet.letters);
    }
  }

  Wndcma ref_wrap(const Wndcma& m, const Prearena& S, const TypeView& xv,
                  const std::vector<int>& lmap, int gamma,
                  const std::vector<std::string>& parent_letters) {
    std::set<int> x_letters = {xv.read_q, xv.write_a};
    for (int q : xv.write_q) x_letters.insert(q);
    for (int a : xv.read_a) x_letters.insert(a);

    // states that interact with the root value get paired with the variable
    std::set<State> rooty;
    for (const Trans& tr : m.trans) {
      if (tr.sig.size() == 1) {
        if (tr.src != m.initial) rooty.insert(tr.src);
        rooty.insert(tr.dst);
      }
      if (tr.sig[0] != BOT) rooty.insert(tr.sig[0]);
      rooty.insert(tr.upd[0]);
    }
    rooty.erase(m.initial);

    AutoBuilder b;
    b.letters.resize(lmap.size());
    std::map<std::pair<State, int>, State> pmap;
    std::map<State, State> umap;
    b.initial = b.add_state("i", true);
    auto pstate = [&](State s, int val) {
      if (!rooty.count(s)) {
        auto it = umap.find(s);
        if (it != umap.end()) return it->second;
        State n = b.add_state(m.state_names[s], m.finals[s] != 0);
        umap[s] = n;
        return n;
      }
      auto it = pmap.find({s, val});
      if (it != pmap.end()) return it->second;
      State n = b.add_state(m.state_names[s] + "#" + std::to_string(val), m.finals[s] != 0);
      pmap[{s, val}] = n;
      return n;
    };

    for (const Trans& tr : m.trans) {
      if (tr.src == m.initial) {
        b.add(b.initial, tr.letter, {BOT}, pstate(tr.dst, 0), {pstate(tr.upd[0], 0)});
        continue;
      }
      const Move* mv = tr.letter < (int)S.moves.size() ? &S.move(tr.letter) : nullptr;
      bool is_write = mv && std::find(xv.write_q.begin(), xv.write_q.end(), tr.letter) !=
                                xv.write_q.end();
      bool is_read_ans =
          mv && std::find(xv.read_a.begin(), xv.read_a.end(), tr.letter) != xv.read_a.end();
      int width = (int)tr.sig.size();

      for (int i0 = 0; i0 < k_; ++i0) {
        if (is_read_ans && i0 != *mv->payload) continue;
        int i_new = is_write ? *mv->payload : i0;
        std::vector<State> sig(width), upd(width);
        sig[0] = tr.sig[0] == BOT ? BOT : pstate(tr.sig[0], i0);
        upd[0] = pstate(tr.upd[0], i_new);
        for (int p = 1; p < width; ++p) {
          sig[p] = tr.sig[p] == BOT ? BOT : pstate(tr.sig[p], 0);
          upd[p] = pstate(tr.upd[p], 0);
        }
        State src = width == 1 ? pstate(tr.src, i0) : pstate(tr.src, i0);
        State dst = width == 1 ? pstate(tr.dst, i_new) : pstate(tr.dst, i_new);
        b.add(src, tr.letter, sig, dst, upd);
      }
    }

    Wndcma c = b.freeze();

    // hiding: compress the forced x-dialogues
    std::map<State, std::vector<const Trans*>> by_src;
    for (const Trans& tr : c.trans) by_src[tr.src].push_back(&tr);
    auto is_x = [&](int l) { return l < (int)S.moves.size() && x_letters.count(l); };

    std::vector<Trans> compressed;
    for (const auto& [s0, edges] : by_src) {
      std::set<std::string> walked;
      for (const Trans* e0 : edges) {
        if (!is_x(e0->letter)) continue;
        std::string skey;
        for (State s : e0->sig) skey += std::to_string(s) + ",";
        if (!walked.insert(skey).second) continue;
        State ctrl = e0->dst;
        std::vector<State> sig = e0->upd;
        std::set<std::string> seen;
        bool diverged = false;
        for (;;) {
          const Trans* next = nullptr;
          for (const Trans* e : by_src[ctrl])
            if (is_x(e->letter) && e->sig == sig) {
              if (next) throw std::logic_error("ambiguous good-variable dialogue");
              next = e;
            }
          if (!next) break;
          std::string key = std::to_string(ctrl);
          for (State s : sig) key += "," + std::to_string(s);
          if (!seen.insert(key).second) {
            diverged = true;
            break;
          }
          ctrl = next->dst;
          sig = next->upd;
        }
        if (diverged) continue;
        for (const Trans* e : by_src[ctrl]) {
          if (is_x(e->letter)) continue;
          if (e->sig != sig) continue;
          Trans n = *e;
          n.src = s0;
          n.sig = e0->sig;
          compressed.push_back(std::move(n));
        }
      }
    }

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
      if (is_x(tr.letter)) return;
      int L = lmap[tr.letter];
      if (L < 0) throw std::logic_error("unmapped letter after hiding");
      out.add(smap[tr.src], L, map_states(tr.sig, smap), smap[tr.dst], map_states(tr.upd, smap));
    };
    for (const Trans& tr : c.trans) add_mapped(tr);
    for (const Trans& tr : compressed) add_mapped(tr);
    close_finals(out);
    return cleanup(out.freeze(), 20000);
  }
};

} // namespace

AutomatonFamily compile_rforml(const CanPtr& t, const TypeSequent& seq, int k) {
  FragmentClass fc = classify(seq);
  if (!fc.in_rforml)
    throw FragmentViolation("sequent is not in the restricted fragment: " +
                            sequent_to_string(seq));
  RformlCompiler c(k);
  return c.compile(t, seq);
}

} // namespace rmleq
