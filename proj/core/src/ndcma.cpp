#include "rmleq/ndcma.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rmleq {

namespace {

std::string sig_key(State src, int letter, const std::vector<State>& sig) {
  std::string k = std::to_string(src) + "|" + std::to_string(letter);
  for (State s : sig) k += "," + std::to_string(s);
  return k;
}

// chain of value v, root first: (pred^i(v), ..., v)
std::vector<int> value_chain(int v, const std::vector<int>& parent) {
  std::vector<int> chain;
  for (int x = v; x >= 0; x = parent[x]) chain.push_back(x);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

} // namespace

bool DataWord::canonical() const {
  int seen = 0;
  for (const Pos& p : positions) {
    if (p.value > seen) return false;
    if (p.value == seen) {
      if (parent[p.value] >= seen) return false; // parent must have occurred
      seen++;
    }
  }
  return seen == (int)parent.size();
}

std::string DataWord::to_string(const std::vector<std::string>& letters) const {
  std::string out;
  for (size_t i = 0; i < positions.size(); ++i) {
    if (i) out += " ";
    out += letters[positions[i].letter] + "@" + std::to_string(positions[i].value);
    if (parent[positions[i].value] >= 0)
      out += "(" + std::to_string(parent[positions[i].value]) + ")";
  }
  return out;
}

DataWord parse_data_word(const std::string& text, const std::vector<std::string>& letters) {
  DataWord w;
  std::istringstream is(text);
  std::string tok;
  auto letter_id = [&](const std::string& n) {
    for (size_t i = 0; i < letters.size(); ++i)
      if (letters[i] == n) return (int)i;
    throw std::runtime_error("unknown letter '" + n + "'");
  };
  while (is >> tok) {
    auto at = tok.rfind('@');
    if (at == std::string::npos) throw std::runtime_error("bad data word position '" + tok + "'");
    std::string rest = tok.substr(at + 1);
    int parent = -1;
    auto lp = rest.find('(');
    int value;
    if (lp != std::string::npos) {
      value = std::stoi(rest.substr(0, lp));
      parent = std::stoi(rest.substr(lp + 1, rest.size() - lp - 2));
    } else {
      value = std::stoi(rest);
    }
    while ((int)w.parent.size() <= value) w.parent.push_back(-1);
    if (parent >= 0) w.parent[value] = parent;
    w.positions.push_back({letter_id(tok.substr(0, at)), value});
  }
  if (!w.canonical()) throw std::runtime_error("data word is not in canonical form");
  return w;
}

void Wndcma::build_index() const {
  idx_.clear();
  by_sll_.clear();
  for (size_t i = 0; i < trans.size(); ++i) {
    const Trans& t = trans[i];
    idx_[sig_key(t.src, t.letter, t.sig)].push_back((int)i);
    by_sll_[{t.src, t.letter, (int)t.sig.size() - 1}].push_back((int)i);
  }
  indexed_ = true;
}

void Wndcma::invalidate_index() const { indexed_ = false; }

const std::vector<int>* Wndcma::lookup(State src, int letter, const std::vector<State>& sig) const {
  if (!indexed_) build_index();
  auto it = idx_.find(sig_key(src, letter, sig));
  return it == idx_.end() ? nullptr : &it->second;
}

const std::vector<int>& Wndcma::by_src_letter_level(State src, int letter, int lvl) const {
  if (!indexed_) build_index();
  static const std::vector<int> empty;
  auto it = by_sll_.find({src, letter, lvl});
  return it == by_sll_.end() ? empty : it->second;
}

std::vector<Configuration> step(const Wndcma& a, const Configuration& c, int letter, int value,
                                const std::vector<int>& parent) {
  std::vector<Configuration> out;
  if (letter < 0 || letter >= (int)a.letters.size()) return out;
  std::vector<int> chain = value_chain(value, parent);
  if ((int)chain.size() - 1 > a.level) return out;
  std::vector<State> sig;
  for (int v : chain) sig.push_back(v < (int)c.mem.size() ? c.mem[v] : BOT);
  const std::vector<int>* hits = a.lookup(c.q, letter, sig);
  if (!hits) return out;
  for (int ti : *hits) {
    const Trans& t = a.trans[ti];
    Configuration n = c;
    if ((int)n.mem.size() <= chain.back()) n.mem.resize(chain.back() + 1, BOT);
    n.q = t.dst;
    for (size_t j = 0; j < chain.size(); ++j) n.mem[chain[j]] = t.upd[j];
    out.push_back(std::move(n));
  }
  return out;
}

bool accepts(const Wndcma& a, const DataWord& w) {
  std::vector<Configuration> cfgs = {{a.initial, std::vector<State>(w.parent.size(), BOT)}};
  for (const DataWord::Pos& p : w.positions) {
    std::vector<Configuration> next;
    std::set<std::pair<State, std::vector<State>>> seen;
    for (const Configuration& c : cfgs)
      for (Configuration& n : step(a, c, p.letter, p.value, w.parent))
        if (seen.insert({n.q, n.mem}).second) next.push_back(std::move(n));
    cfgs = std::move(next);
    if (cfgs.empty()) return false;
  }
  for (const Configuration& c : cfgs)
    if (a.is_final(c.q)) return true;
  return false;
}

bool is_deterministic(const Wndcma& a) {
  std::set<std::string> keys;
  for (const Trans& t : a.trans)
    if (!keys.insert(sig_key(t.src, t.letter, t.sig)).second) return false;
  return true;
}

namespace {

// All signature tuples over states 0..n-1 with a BOT suffix, length len.
void enumerate_sigs(int n, int len, std::vector<std::vector<State>>& out) {
  std::vector<State> cur(len, BOT);
  std::function<void(int)> rec = [&](int pos) {
    if (pos == len) {
      out.push_back(cur);
      return;
    }
    // all BOT from here on
    for (int i = pos; i < len; ++i) cur[i] = BOT;
    out.push_back(cur);
    for (State s = 0; s < n; ++s) {
      cur[pos] = s;
      rec(pos + 1);
    }
    cur[pos] = BOT;
  };
  // non-empty prefixes handled by rec; avoid double-adding the all-BOT tuple
  out.clear();
  std::function<void(int)> rec2 = [&](int pos) {
    if (pos == len) {
      out.push_back(cur);
      return;
    }
    for (int i = pos; i < len; ++i) cur[i] = BOT;
    out.push_back(cur);
    for (State s = 0; s < n; ++s) {
      cur[pos] = s;
      rec2(pos + 1);
    }
    cur[pos] = BOT;
  };
  rec2(0);
}

Wndcma complete_impl(const Wndcma& a) {
  Wndcma r = a;
  State sink = r.num_states();
  r.state_names.push_back("sink");
  r.finals.push_back(0);
  uint64_t est = 0;
  for (int lvl = 0; lvl <= r.level; ++lvl) {
    uint64_t sigs = 0, p = 1;
    for (int i = 0; i <= lvl; ++i) {
      p *= (uint64_t)r.num_states();
      sigs += p;
    }
    est += (sigs + 1) * (uint64_t)r.num_states() * r.letters.size();
  }
  if (est > 8'000'000ULL)
    throw std::runtime_error("explicit completion too large; use difference() instead");
  r.invalidate_index();
  for (int lvl = 0; lvl <= r.level; ++lvl) {
    std::vector<std::vector<State>> sigs;
    enumerate_sigs(r.num_states(), lvl + 1, sigs);
    for (State q = 0; q < r.num_states(); ++q) {
      for (int letter = 0; letter < (int)r.letters.size(); ++letter) {
        for (const auto& sig : sigs) {
          if (q != sink && a.lookup(q, letter, sig)) continue;
          Trans t;
          t.src = q;
          t.letter = letter;
          t.sig = sig;
          t.dst = sink;
          t.upd.assign(lvl + 1, sink);
          r.trans.push_back(std::move(t));
        }
      }
    }
  }
  r.invalidate_index();
  return r;
}

} // namespace

Wndcma complete(const Wndcma& a) {
  if (!is_deterministic(a)) throw NotDeterministic("complete() requires a deterministic automaton");
  return complete_impl(a);
}

Wndcma complement(const Wndcma& a) {
  if (!is_deterministic(a))
    throw NotDeterministic("complement() requires a deterministic automaton");
  Wndcma r = complete_impl(a);
  for (auto& f : r.finals) f = !f;
  return r;
}

namespace {

void require_same_alphabet(const Wndcma& a, const Wndcma& b) {
  if (a.letters != b.letters) throw AlphabetMismatch("automata have different alphabets");
}

constexpr State DEAD = -2;

struct PairKey {
  State a, b;
  bool operator<(const PairKey& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
};

// Product over the reachable pairings of memory states. In Difference mode
// the right side may fall off its transition table and is then tracked as
// DEAD, which realizes the completion of b without materializing it.
Wndcma product(const Wndcma& a, const Wndcma& b, bool diff_mode,
               const std::function<bool(State, State)>& final_pred) {
  require_same_alphabet(a, b);
  Wndcma r;
  r.level = std::max(a.level, b.level);
  r.letters = a.letters;

  std::map<PairKey, State> states;
  std::set<std::pair<State, State>> labels; // discovered memory pairings
  auto state_name = [&](State qa, State qb) {
    return a.state_names[qa] + "|" + (qb == DEAD ? std::string("+") : b.state_names[qb]);
  };
  auto get_state = [&](State qa, State qb) {
    auto it = states.find({qa, qb});
    if (it != states.end()) return it->second;
    State s = (State)r.state_names.size();
    states[{qa, qb}] = s;
    r.state_names.push_back(state_name(qa, qb));
    r.finals.push_back(final_pred(qa, qb) ? 1 : 0);
    return s;
  };
  r.initial = get_state(a.initial, b.initial);

  std::set<std::string> emitted;
  auto emit = [&](State src, int letter, const std::vector<State>& siga,
                  const std::vector<State>& sigb, State qa2, State qb2,
                  const std::vector<State>& upda, const std::vector<State>& updb) {
    Trans t;
    t.src = src;
    t.letter = letter;
    for (size_t i = 0; i < siga.size(); ++i) {
      if (siga[i] == BOT) {
        t.sig.push_back(BOT);
      } else {
        auto it = states.find({siga[i], sigb[i]});
        // memory labels share the state space with control states
        State s = it != states.end() ? it->second : get_state(siga[i], sigb[i]);
        t.sig.push_back(s);
      }
    }
    t.dst = get_state(qa2, qb2);
    for (size_t i = 0; i < upda.size(); ++i) t.upd.push_back(get_state(upda[i], updb[i]));
    std::string key = sig_key(t.src, t.letter, t.sig) + ">" + std::to_string(t.dst);
    for (State u : t.upd) key += ";" + std::to_string(u);
    if (emitted.insert(key).second) {
      for (size_t i = 0; i < upda.size(); ++i) labels.insert({upda[i], updb[i]});
      r.trans.push_back(std::move(t));
    }
  };

  // Saturate: new labels can enable further pairings.
  bool changed = true;
  int guard = 0;
  while (changed) {
    if (++guard > 10000) throw std::logic_error("product saturation did not converge");
    changed = false;
    size_t ntrans = r.trans.size();
    size_t nstates = r.state_names.size();
    std::vector<PairKey> snapshot;
    for (auto& [pk, s] : states) snapshot.push_back(pk);
    for (const PairKey& pk : snapshot) {
      for (int letter = 0; letter < (int)r.letters.size(); ++letter) {
        for (int lvl = 0; lvl <= r.level; ++lvl) {
          for (int ia : a.by_src_letter_level(pk.a, letter, lvl)) {
            const Trans& ta = a.trans[ia];
            if (pk.b == DEAD) {
              // b is already dead: pair every slot with any recorded partner
              std::vector<std::vector<State>> opts(ta.sig.size());
              bool feasible = true;
              for (size_t i = 0; i < ta.sig.size() && feasible; ++i) {
                if (ta.sig[i] == BOT) {
                  opts[i] = {BOT};
                  continue;
                }
                for (auto& [la, lb] : labels)
                  if (la == ta.sig[i]) opts[i].push_back(lb);
                if (opts[i].empty()) feasible = false;
              }
              if (!feasible) continue;
              std::vector<State> sigb(ta.sig.size(), BOT);
              std::function<void(size_t)> rec = [&](size_t i) {
                if (i == ta.sig.size()) {
                  std::vector<State> updb(ta.upd.size(), DEAD);
                  emit(states[{pk.a, pk.b}], letter, ta.sig, sigb, ta.dst, DEAD, ta.upd, updb);
                  return;
                }
                for (State o : opts[i]) {
                  sigb[i] = o;
                  rec(i + 1);
                }
              };
              rec(0);
              continue;
            }
            // live b: joint steps
            for (int ib : b.by_src_letter_level(pk.b, letter, lvl)) {
              const Trans& tb = b.trans[ib];
              bool ok = true;
              for (size_t i = 0; i < ta.sig.size() && ok; ++i) {
                if ((ta.sig[i] == BOT) != (tb.sig[i] == BOT)) ok = false;
                else if (ta.sig[i] != BOT && !labels.count({ta.sig[i], tb.sig[i]})) ok = false;
              }
              if (ok)
                emit(states[{pk.a, pk.b}], letter, ta.sig, tb.sig, ta.dst, tb.dst, ta.upd, tb.upd);
            }
            if (diff_mode) {
              // b death: enumerate candidate b-signatures with no matching entry
              std::vector<std::vector<State>> opts(ta.sig.size());
              bool feasible = true;
              for (size_t i = 0; i < ta.sig.size() && feasible; ++i) {
                if (ta.sig[i] == BOT) {
                  opts[i] = {BOT};
                  continue;
                }
                for (auto& [la, lb] : labels)
                  if (la == ta.sig[i] && lb != DEAD) opts[i].push_back(lb);
                if (opts[i].empty()) feasible = false;
              }
              if (!feasible) continue;
              std::vector<State> sigb(ta.sig.size(), BOT);
              std::function<void(size_t)> rec = [&](size_t i) {
                if (i == ta.sig.size()) {
                  if (lvl <= b.level) {
                    const std::vector<int>* hit = b.lookup(pk.b, letter, sigb);
                    if (hit && !hit->empty()) return; // b survives this step
                  }
                  std::vector<State> updb(ta.upd.size(), DEAD);
                  emit(states[{pk.a, pk.b}], letter, ta.sig, sigb, ta.dst, DEAD, ta.upd, updb);
                  return;
                }
                for (State o : opts[i]) {
                  sigb[i] = o;
                  rec(i + 1);
                }
              };
              rec(0);
            }
          }
        }
      }
    }
    if (r.trans.size() != ntrans || r.state_names.size() != nstates) changed = true;
  }
  r.invalidate_index();
  return r;
}

} // namespace

Wndcma intersect(const Wndcma& a, const Wndcma& b) {
  return product(a, b, false,
                 [&](State qa, State qb) { return a.is_final(qa) && b.is_final(qb); });
}

Wndcma unite(const Wndcma& a, const Wndcma& b) {
  Wndcma ca = complete_impl(a);
  Wndcma cb = complete_impl(b);
  if (ca.level < cb.level) ca.level = cb.level;
  if (cb.level < ca.level) cb.level = ca.level;
  return product(ca, cb, false,
                 [&](State qa, State qb) { return ca.is_final(qa) || cb.is_final(qb); });
}

Wndcma difference(const Wndcma& a, const Wndcma& b) {
  if (!is_deterministic(b))
    throw NotDeterministic("difference() complements its right argument, which must be deterministic");
  return product(a, b, true, [&](State qa, State qb) {
    return a.is_final(qa) && (qb == DEAD || !b.is_final(qb));
  });
}

LevelReport check_level_discipline(const Wndcma& a) {
  LevelReport rep;
  std::map<State, std::set<int>> occ;
  for (const Trans& t : a.trans) {
    for (size_t i = 0; i < t.sig.size(); ++i)
      if (t.sig[i] != BOT) occ[t.sig[i]].insert((int)i);
    for (size_t i = 0; i < t.upd.size(); ++i) occ[t.upd[i]].insert((int)i);
  }
  for (auto& [s, lv] : occ) {
    rep.levels[s] = std::vector<int>(lv.begin(), lv.end());
    if (lv.size() > 1) rep.ok = false;
  }
  return rep;
}

std::string serialize(const Wndcma& a) {
  std::ostringstream os;
  os << "wndcma\nlevel " << a.level << "\nletters";
  for (auto& l : a.letters) os << " " << l;
  os << "\nstates";
  for (auto& s : a.state_names) os << " " << s;
  os << "\ninitial " << a.state_names[a.initial] << "\nfinals";
  for (size_t i = 0; i < a.finals.size(); ++i)
    if (a.finals[i]) os << " " << a.state_names[i];
  os << "\n";
  auto render_vec = [&](const std::vector<State>& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += v[i] == BOT ? "_" : a.state_names[v[i]];
    }
    return s + ")";
  };
  for (const Trans& t : a.trans)
    os << a.state_names[t.src] << " --" << a.letters[t.letter] << ", " << render_vec(t.sig)
       << " -> " << a.state_names[t.dst] << ", " << render_vec(t.upd) << "\n";
  return os.str();
}

Wndcma parse_wndcma(const std::string& text) {
  Wndcma a;
  std::istringstream is(text);
  std::string line;
  std::map<std::string, State> state_of;
  std::map<std::string, int> letter_of;
  auto split_ws = [](const std::string& s) {
    std::istringstream iss(s);
    std::vector<std::string> out;
    std::string t;
    while (iss >> t) out.push_back(t);
    return out;
  };
  auto state_id = [&](const std::string& n) {
    auto it = state_of.find(n);
    if (it == state_of.end()) throw std::runtime_error("unknown state '" + n + "'");
    return it->second;
  };
  auto parse_vec = [&](const std::string& s) {
    std::vector<State> v;
    std::string inner = s.substr(1, s.size() - 2);
    std::string cur;
    for (size_t i = 0; i <= inner.size(); ++i) {
      if (i == inner.size() || inner[i] == ',') {
        if (!cur.empty()) v.push_back(cur == "_" ? BOT : state_id(cur));
        cur.clear();
      } else {
        cur += inner[i];
      }
    }
    return v;
  };
  bool header_done = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto words = split_ws(line);
    if (words.empty()) continue;
    if (!header_done) {
      if (words[0] == "wndcma") continue;
      if (words[0] == "level") { a.level = std::stoi(words[1]); continue; }
      if (words[0] == "letters") {
        for (size_t i = 1; i < words.size(); ++i) {
          letter_of[words[i]] = (int)a.letters.size();
          a.letters.push_back(words[i]);
        }
        continue;
      }
      if (words[0] == "states") {
        for (size_t i = 1; i < words.size(); ++i) {
          state_of[words[i]] = (State)a.state_names.size();
          a.state_names.push_back(words[i]);
          a.finals.push_back(0);
        }
        continue;
      }
      if (words[0] == "initial") { a.initial = state_id(words[1]); continue; }
      if (words[0] == "finals") {
        for (size_t i = 1; i < words.size(); ++i) a.finals[state_id(words[i])] = 1;
        header_done = true;
        continue;
      }
    }
    // S --LETTER, (SIG) -> T, (UPD)
    auto arrow1 = line.find(" --");
    auto arrow2 = line.find(" -> ");
    if (arrow1 == std::string::npos || arrow2 == std::string::npos)
      throw std::runtime_error("bad transition line: " + line);
    std::string src = line.substr(0, arrow1);
    std::string mid = line.substr(arrow1 + 3, arrow2 - arrow1 - 3);
    std::string rest = line.substr(arrow2 + 4);
    auto comma1 = mid.rfind(", (");
    std::string letter = mid.substr(0, comma1);
    std::string sig = mid.substr(comma1 + 2);
    auto comma2 = rest.rfind(", (");
    std::string dst = rest.substr(0, comma2);
    std::string upd = rest.substr(comma2 + 2);
    Trans t;
    t.src = state_id(src);
    auto lit = letter_of.find(letter);
    if (lit == letter_of.end()) throw std::runtime_error("unknown letter '" + letter + "'");
    t.letter = lit->second;
    t.sig = parse_vec(sig);
    t.dst = state_id(dst);
    t.upd = parse_vec(upd);
    if (t.sig.size() != t.upd.size() || (int)t.sig.size() > a.level + 1)
      throw std::runtime_error("bad transition arity: " + line);
    a.trans.push_back(std::move(t));
  }
  return a;
}

} // namespace rmleq
