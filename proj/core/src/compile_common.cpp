#include "compile_detail.hpp"

#include <algorithm>

namespace rmleq {

namespace {

void tag_walk(const TypeView& v, int depth, CompileAlphabet& a, const Prearena& p) {
  if (!v.arg_questions.empty()) {
    if (depth >= 2)
      for (int q : v.arg_questions) {
        a.tgt_of[q] = (int)a.letters.size();
        a.letters.push_back(p.move(q).name + "!tgt");
      }
    if (v.rest_view) {
      bool rest_has_questions =
          !v.rest_view->arg_questions.empty() || v.rest_view->read_q >= 0;
      if (rest_has_questions)
        for (int m : v.rest_view->values) {
          a.src_of[m] = (int)a.letters.size();
          a.letters.push_back(p.move(m).name + "!src");
        }
      tag_walk(*v.rest_view, depth + 1, a, p);
    }
  } else if (v.read_q >= 0 && depth >= 2) {
    auto tag_q = [&](int q) {
      a.tgt_of[q] = (int)a.letters.size();
      a.letters.push_back(p.move(q).name + "!tgt");
    };
    tag_q(v.read_q);
    for (int q : v.write_q) tag_q(q);
  }
}

} // namespace

CompileAlphabet make_alphabet(const Prearena& p, bool with_tags) {
  CompileAlphabet a;
  a.letters = p.letter_names();
  a.src_of.assign(p.moves.size(), -1);
  a.tgt_of.assign(p.moves.size(), -1);
  if (with_tags)
    for (auto& view : p.ctx_views) tag_walk(*view, 1, a, p);
  return a;
}

namespace detail {

std::vector<State> clone_states(AutoBuilder& b, const Wndcma& m, const std::string& prefix,
                                bool keep_finals) {
  std::vector<State> smap(m.num_states(), -1);
  for (State s = 0; s < m.num_states(); ++s) {
    if (s == m.initial) continue;
    smap[s] = b.add_state(prefix + m.state_names[s], keep_finals && m.finals[s]);
  }
  return smap;
}

std::vector<State> map_states(const std::vector<State>& v, const std::vector<State>& smap) {
  std::vector<State> out;
  out.reserve(v.size());
  for (State s : v) {
    if (s == BOT) {
      out.push_back(BOT);
    } else {
      if (smap[s] < 0) throw std::logic_error("mapping a removed state");
      out.push_back(smap[s]);
    }
  }
  return out;
}

void close_finals(AutoBuilder& b) {
  for (;;) {
    // union of outgoing transitions over non-initial finals
    std::vector<std::tuple<int, std::vector<State>, State, std::vector<State>>> uni;
    std::set<std::string> seen;
    auto key = [](int l, const std::vector<State>& sig) {
      std::string k = std::to_string(l);
      for (State s : sig) k += "," + std::to_string(s);
      return k;
    };
    std::map<std::string, std::pair<State, std::vector<State>>> target;
    for (const Trans& t : b.trans) {
      if (t.src == b.initial || !b.finals[t.src]) continue;
      std::string k = key(t.letter, t.sig);
      auto it = target.find(k);
      if (it != target.end()) {
        if (it->second.first != t.dst || it->second.second != t.upd)
          throw std::logic_error("final-state uniformity conflict");
        continue;
      }
      target[k] = {t.dst, t.upd};
      uni.emplace_back(t.letter, t.sig, t.dst, t.upd);
    }
    size_t before = b.trans.size();
    for (State s = 0; s < (State)b.names.size(); ++s) {
      if (s == b.initial || !b.finals[s]) continue;
      for (auto& [l, sig, dst, upd] : uni) b.add(s, l, sig, dst, upd);
    }
    if (b.trans.size() == before) break;
  }
}

bool is_trivial_value_member(const Wndcma& m, int& result_letter) {
  if (m.trans.size() != 2) return false;
  const Trans* init = nullptr;
  const Trans* res = nullptr;
  for (const Trans& t : m.trans) {
    if (t.src == m.initial) init = &t;
    else res = &t;
  }
  if (!init || !res) return false;
  if (res->src != init->dst || !m.finals[res->dst]) return false;
  result_letter = res->letter;
  return true;
}

State secondary_of(const Wndcma& m) {
  for (const Trans& t : m.trans)
    if (t.src == m.initial) return t.dst;
  throw std::logic_error("automaton has no initial transition");
}

void share_outgoing(AutoBuilder& b, const std::vector<State>& sources,
                    const std::vector<State>& receivers) {
  std::map<std::string, std::tuple<int, std::vector<State>, State, std::vector<State>>> uni;
  auto key = [](int l, const std::vector<State>& sig) {
    std::string k = std::to_string(l);
    for (State s : sig) k += "," + std::to_string(s);
    return k;
  };
  std::set<State> src_set(sources.begin(), sources.end());
  for (const Trans& t : b.trans) {
    if (!src_set.count(t.src)) continue;
    std::string k = key(t.letter, t.sig);
    auto it = uni.find(k);
    if (it != uni.end()) {
      if (std::get<2>(it->second) != t.dst || std::get<3>(it->second) != t.upd)
        throw std::logic_error("thread-switch closure conflict");
      continue;
    }
    uni[k] = {t.letter, t.sig, t.dst, t.upd};
  }
  for (State r : receivers)
    for (auto& [k, e] : uni) b.add(r, std::get<0>(e), std::get<1>(e), std::get<2>(e), std::get<3>(e));
}

void let_compose(AutoBuilder& b, const LetComposeInput& in) {
  const Wndcma& M = *in.m;
  int rl = -1;
  if (is_trivial_value_member(M, rl)) {
    int payload = in.result_payload(rl);
    if (payload < 0) throw std::logic_error("trivial producer without a result letter");
    const Wndcma& N = *in.n_of(payload);
    b.initial = b.add_state("i", true);
    auto smap = clone_states(b, N, "", true);
    for (const Trans& t : N.trans) {
      if (t.src == N.initial)
        b.add(b.initial, in.gamma_letter, {BOT}, smap[t.dst], map_states(t.upd, smap));
      else
        b.add(smap[t.src], in.map_n_letter(t.letter), map_states(t.sig, smap), smap[t.dst],
              map_states(t.upd, smap));
    }
    close_finals(b);
    return;
  }

  b.initial = b.add_state("i", true);
  auto mmap = clone_states(b, M, "m/", false);
  std::map<int, std::pair<const Wndcma*, std::vector<State>>> nclones;
  auto ensure_n = [&](int payload) -> std::pair<const Wndcma*, std::vector<State>>& {
    auto it = nclones.find(payload);
    if (it != nclones.end()) return it->second;
    const Wndcma* N = in.n_of(payload);
    auto smap = clone_states(b, *N, "n" + std::to_string(payload) + "/", true);
    for (const Trans& t : N->trans) {
      if (t.src == N->initial) continue;
      b.add(smap[t.src], in.map_n_letter(t.letter), map_states(t.sig, smap), smap[t.dst],
            map_states(t.upd, smap));
    }
    return nclones.emplace(payload, std::make_pair(N, std::move(smap))).first->second;
  };

  State secM = secondary_of(M);
  for (const Trans& t : M.trans) {
    if (t.src == M.initial) {
      b.add(b.initial, in.gamma_letter, {BOT}, mmap[secM], map_states(t.upd, mmap));
      continue;
    }
    int payload = in.result_payload(t.letter);
    bool result_edge = payload >= 0 && M.finals[t.dst];
    if (result_edge) {
      if (t.sig.size() != 1)
        throw std::logic_error("result transition is not level-0");
      auto& [N, nmap] = ensure_n(payload);
      State secN = secondary_of(*N);
      State root = mmap[t.sig[0]];
      for (const Trans& u : N->trans) {
        if (u.src != secN || u.src == N->initial) continue;
        std::vector<State> sig2 = map_states(u.sig, nmap);
        std::vector<State> upd2 = map_states(u.upd, nmap);
        if (sig2.size() == 1) {
          sig2[0] = root; // root enters the body's space here
        } else {
          sig2[0] = root;
          upd2[0] = root;
        }
        b.add(mmap[t.src], in.map_n_letter(u.letter), sig2, nmap[u.dst], upd2);
      }
      rebase_entry_region(b, *N, nmap, in.map_n_letter, {root});
      continue;
    }
    int L = in.map_m_letter(t.letter);
    if (L < 0) throw std::logic_error("erased letter on a non-result transition");
    b.add(mmap[t.src], L, map_states(t.sig, mmap), mmap[t.dst], map_states(t.upd, mmap));
  }
  close_finals(b);
}

void while_compose(AutoBuilder& b, const WhileComposeInput& in) {
  const Wndcma& M = *in.m;
  const Wndcma& N = *in.n;
  b.initial = b.add_state("i", true);
  State done = b.add_state("done", true);
  auto mmap = clone_states(b, M, "m/", false);
  auto nmap = clone_states(b, N, "n/", false);
  State secM = mmap[secondary_of(M)];
  State secN = nmap[secondary_of(N)];

  struct Link {
    State from;
    std::vector<State> sig; // level-0 signature of the erased result edge
    int target;             // 0 = loop into N, 1 = loop back into M
  };
  std::vector<Link> links;

  for (const Trans& t : M.trans) {
    if (t.src == M.initial) {
      b.add(b.initial, in.gamma_letter, {BOT}, secM, map_states(t.upd, mmap));
      continue;
    }
    int payload = in.m_result_payload(t.letter);
    if (payload >= 0 && M.finals[t.dst]) {
      if (t.sig.size() != 1) throw std::logic_error("guard result is not level-0");
      if (payload == 0)
        b.add(mmap[t.src], in.unit_answer_letter, map_states(t.sig, mmap), done, {done});
      else
        links.push_back({mmap[t.src], map_states(t.sig, mmap), 0});
      continue;
    }
    int L = in.map_m_letter(t.letter);
    if (L < 0) throw std::logic_error("erased letter on a non-result guard transition");
    b.add(mmap[t.src], L, map_states(t.sig, mmap), mmap[t.dst], map_states(t.upd, mmap));
  }
  for (const Trans& t : N.trans) {
    if (t.src == N.initial) continue;
    if (in.n_is_result(t.letter) && N.finals[t.dst]) {
      if (t.sig.size() != 1) throw std::logic_error("body result is not level-0");
      links.push_back({nmap[t.src], map_states(t.sig, nmap), 1});
      continue;
    }
    int L = in.map_n_letter(t.letter);
    if (L < 0) throw std::logic_error("erased letter on a non-result body transition");
    b.add(nmap[t.src], L, map_states(t.sig, nmap), nmap[t.dst], map_states(t.upd, nmap));
  }

  // Resolve the erased result edges: continuations of a secondary are its
  // root-keyed edges; silent loops (e.g. while 1 do ()) resolve to nothing.
  State secs[2] = {secN, secM};
  auto continuations = [&](int target, State root,
                           std::vector<std::tuple<int, std::vector<State>, State, std::vector<State>>>& out,
                           std::set<int>& visited) {
    auto rec = [&](auto&& self, int tgt) -> void {
      if (!visited.insert(tgt).second) return;
      State sec = secs[tgt];
      for (const Trans& t : b.trans) {
        if (t.src != sec) continue;
        if (t.sig.size() == 1 && t.sig[0] == sec) {
          out.emplace_back(t.letter, std::vector<State>{root}, t.dst, t.upd);
        } else if (t.sig.size() == 2 && t.sig[0] == sec && t.sig[1] == BOT) {
          std::vector<State> upd = t.upd;
          upd[0] = root;
          out.emplace_back(t.letter, std::vector<State>{root, BOT}, t.dst, upd);
        }
      }
      for (const Link& l : links)
        if (l.from == sec && l.sig.size() == 1 && l.sig[0] == sec) self(self, l.target);
    };
    rec(rec, target);
  };

  for (const Link& l : links) {
    std::vector<std::tuple<int, std::vector<State>, State, std::vector<State>>> cont;
    std::set<int> visited;
    continuations(l.target, l.sig[0], cont, visited);
    for (auto& [letter, sig, dst, upd] : cont) b.add(l.from, letter, sig, dst, upd);
  }
  std::vector<State> loop_roots;
  for (const Link& l : links) loop_roots.push_back(l.sig[0]);
  if (!loop_roots.empty()) {
    rebase_entry_region(b, M, mmap, in.map_m_letter, loop_roots);
    rebase_entry_region(b, N, nmap, in.map_n_letter, loop_roots);
  }
  close_finals(b);
}


// Shared helpers over a compiled family's prearena.

int ctx_index(const TypeSequent& seq, const std::string& name) {
  for (size_t i = 0; i < seq.context.size(); ++i)
    if (seq.context[i].first == name) return (int)i;
  throw FragmentViolation("unbound variable in canonical term: " + name);
}

std::map<int, std::vector<int>> payloads_by_initial(const Prearena& p) {
  std::map<int, std::vector<int>> out;
  for (auto& [vec, id] : p.initial_by_payload) out[id] = vec;
  return out;
}

int int_slot(const Prearena& p, int ctx_idx) {
  int slot = 0;
  for (int i = 0; i < ctx_idx; ++i)
    if (p.seq.context[i].second->kind == TypeKind::Int) slot++;
  return slot;
}

int payload_of(const Prearena& p, const std::vector<int>& vec, int ctx_idx) {
  if (p.seq.context[ctx_idx].second->kind != TypeKind::Int)
    return 0; // unit component: single value
  return vec[int_slot(p, ctx_idx)];
}

int rhs_value_letter(const Prearena& p, int payload) {
  const auto& vals = p.rhs_view->values;
  if (p.seq.subject->kind == TypeKind::Int) return vals[payload];
  return vals[0];
}

// A member whose complete plays are {eps, gamma . value}.
Wndcma value_member(const std::vector<std::string>& letters, int gamma, int value_letter) {
  AutoBuilder b;
  b.letters = letters;
  b.initial = b.add_state("i", true);
  State s2 = b.add_state("s2", false);
  State s3 = b.add_state("s3", true);
  b.add(b.initial, gamma, {BOT}, s2, {s2});
  b.add(s2, value_letter, {s2}, s3, {s3});
  return b.freeze();
}

void rebase_entry_region(AutoBuilder& b, const Wndcma& n, const std::vector<State>& nmap,
                         const std::function<int(int)>& map_letter,
                         const std::vector<State>& roots) {
  State sec = secondary_of(n);
  std::set<State> region = {sec};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const Trans& t : n.trans) {
      if (t.src == n.initial || !region.count(t.src)) continue;
      if (t.sig.size() >= 2 && region.insert(t.dst).second) grew = true;
    }
  }
  for (const Trans& t : n.trans) {
    if (t.src == n.initial || !region.count(t.src)) continue;
    int L = map_letter(t.letter);
    if (L < 0) continue; // erased result letters are handled by the caller
    for (State r : roots) {
      std::vector<State> sig = map_states(t.sig, nmap);
      std::vector<State> upd = map_states(t.upd, nmap);
      if (sig.size() == 1) {
        sig[0] = r; // the update moves the root into the clone's space
      } else {
        sig[0] = r;
        upd[0] = r;
      }
      b.add(nmap[t.src], L, sig, nmap[t.dst], upd);
    }
  }
}

// Letter map between two alphabets given a move correspondence.
std::vector<int> letter_map_from_moves(const CompileAlphabet& sub, const CompileAlphabet& par,
                                       const std::vector<int>& move_map) {
  std::vector<int> lm(sub.letters.size(), -1);
  for (size_t m = 0; m < move_map.size(); ++m) {
    if (move_map[m] < 0) continue;
    lm[m] = move_map[m];
    if (sub.src_of[m] >= 0) {
      if (par.src_of[move_map[m]] < 0) throw std::logic_error("missing src tag in parent alphabet");
      lm[sub.src_of[m]] = par.src_of[move_map[m]];
    }
    if (sub.tgt_of[m] >= 0) {
      if (par.tgt_of[move_map[m]] < 0) throw std::logic_error("missing tgt tag in parent alphabet");
      lm[sub.tgt_of[m]] = par.tgt_of[move_map[m]];
    }
  }
  return lm;
}

} // namespace detail

Wndcma merge_family(const AutomatonFamily& fam) {
  detail::AutoBuilder b;
  b.letters = fam.alphabet.letters;
  b.initial = b.add_state("i", true);
  for (auto& [gamma, m] : fam.members) {
    std::string prefix = fam.arena->move(gamma).name + "/";
    auto smap = detail::clone_states(b, m, prefix, true);
    for (const Trans& t : m.trans) {
      if (t.src == m.initial)
        b.add(b.initial, t.letter, {BOT}, smap[t.dst], detail::map_states(t.upd, smap));
      else
        b.add(smap[t.src], t.letter, detail::map_states(t.sig, smap), smap[t.dst],
              detail::map_states(t.upd, smap));
    }
    if (b.level < m.level) b.level = m.level;
  }
  return b.freeze();
}

Wndcma cleanup(const Wndcma& a, uint64_t budget) {
  std::vector<char> keep_trans(a.trans.size(), 1);

  for (int round = 0; round < 8; ++round) {
    // forward: a transition can fire only if its source control is reachable
    // and its signature states have been written before
    std::vector<char> reach(a.num_states(), 0), writable(a.num_states(), 0);
    reach[a.initial] = 1;
    bool changed = true;
    std::vector<char> usable(a.trans.size(), 0);
    while (changed) {
      changed = false;
      for (size_t i = 0; i < a.trans.size(); ++i) {
        if (usable[i] || !keep_trans[i]) continue;
        const Trans& t = a.trans[i];
        if (!reach[t.src]) continue;
        bool ok = true;
        for (State s : t.sig)
          if (s != BOT && !writable[s]) ok = false;
        if (!ok) continue;
        usable[i] = 1;
        changed = true;
        if (!reach[t.dst]) reach[t.dst] = 1;
        for (State s : t.upd)
          if (!writable[s]) writable[s] = 1;
      }
    }
    bool any_drop = false;
    for (size_t i = 0; i < a.trans.size(); ++i)
      if (keep_trans[i] && !usable[i]) {
        keep_trans[i] = 0;
        any_drop = true;
      }

    // backward: states from which no final control state is coverable
    Wndcma pruned = a;
    pruned.trans.clear();
    for (size_t i = 0; i < a.trans.size(); ++i)
      if (keep_trans[i]) pruned.trans.push_back(a.trans[i]);
    auto basis = backward_basis(pruned, budget);
    if (basis) {
      std::vector<char> live(a.num_states(), 0);
      for (auto& bb : *basis) live[bb.q] = 1;
      for (size_t i = 0; i < a.trans.size(); ++i) {
        if (!keep_trans[i]) continue;
        if (!live[a.trans[i].src] || !live[a.trans[i].dst]) {
          keep_trans[i] = 0;
          any_drop = true;
        }
      }
    }
    if (!any_drop) break;
  }

  // states that can never hold control may drop their finality
  std::vector<char> control(a.num_states(), 0);
  control[a.initial] = 1;
  for (size_t i = 0; i < a.trans.size(); ++i)
    if (keep_trans[i]) control[a.trans[i].dst] = 1;

  // renumber states actually used
  std::vector<State> smap(a.num_states(), -1);
  Wndcma r;
  r.level = 0;
  r.letters = a.letters;
  auto want = [&](State s) {
    if (smap[s] < 0) {
      smap[s] = (State)r.state_names.size();
      r.state_names.push_back(a.state_names[s]);
      r.finals.push_back(a.finals[s] && control[s]);
    }
    return smap[s];
  };
  r.initial = want(a.initial);
  for (size_t i = 0; i < a.trans.size(); ++i) {
    if (!keep_trans[i]) continue;
    const Trans& t = a.trans[i];
    Trans u;
    u.src = want(t.src);
    u.letter = t.letter;
    for (State s : t.sig) u.sig.push_back(s == BOT ? BOT : want(s));
    u.dst = want(t.dst);
    for (State s : t.upd) u.upd.push_back(want(s));
    if ((int)u.sig.size() - 1 > r.level) r.level = (int)u.sig.size() - 1;
    r.trans.push_back(std::move(u));
  }
  return r;
}

FamilyCheck check_family_member(const Wndcma& a, int gamma_letter) {
  FamilyCheck c;
  c.no_initial_revisit = true;
  for (const Trans& t : a.trans) {
    if (t.dst == a.initial) c.no_initial_revisit = false;
    for (State s : t.upd)
      if (s == a.initial) c.no_initial_revisit = false;
  }
  c.deterministic = is_deterministic(a);
  c.level_discipline = check_level_discipline(a).ok;

  int init_count = 0;
  bool init_ok = true;
  int bot_sig_count = 0;
  for (const Trans& t : a.trans) {
    if (t.src == a.initial) {
      init_count++;
      if (t.sig != std::vector<State>{BOT} || t.letter != gamma_letter) init_ok = false;
    }
    if (t.sig == std::vector<State>{BOT}) bot_sig_count++;
  }
  c.unique_initial_transition = init_count == 1 && init_ok && bot_sig_count == 1;

  c.final_uniformity = true;
  std::vector<std::set<std::string>> outs(a.num_states());
  auto key = [](const Trans& t) {
    std::string k = std::to_string(t.letter);
    for (State s : t.sig) k += "," + std::to_string(s);
    return k;
  };
  for (const Trans& t : a.trans)
    if (t.src != a.initial && a.finals[t.src]) outs[t.src].insert(key(t));
  std::set<std::string>* ref = nullptr;
  for (State s = 0; s < a.num_states(); ++s) {
    if (s == a.initial || !a.finals[s]) continue;
    if (!ref) ref = &outs[s];
    else if (*ref != outs[s]) {
      c.final_uniformity = false;
      c.detail = "final states " + a.state_names[s] + " and earlier differ";
    }
  }
  return c;
}

} // namespace rmleq
