// compile_detail.hpp -- shared machinery for the two fragment compilers.
#pragma once

#include <functional>
#include <set>

#include "rmleq/compile.hpp"

namespace rmleq::detail {

class AutoBuilder {
public:
  int level = 0;
  std::vector<std::string> letters;
  std::vector<std::string> names;
  std::vector<char> finals;
  State initial = -1;
  std::vector<Trans> trans;

  State add_state(const std::string& name, bool fin) {
    names.push_back(name);
    finals.push_back(fin ? 1 : 0);
    return (State)names.size() - 1;
  }
  void set_final(State s, bool f) { finals[s] = f ? 1 : 0; }

  void add(State src, int letter, std::vector<State> sig, State dst, std::vector<State> upd) {
    if ((int)sig.size() - 1 > level) level = (int)sig.size() - 1;
    Trans t;
    t.src = src;
    t.letter = letter;
    t.sig = std::move(sig);
    t.dst = dst;
    t.upd = std::move(upd);
    std::string key = tkey(t);
    if (dedup_.insert(key).second) trans.push_back(std::move(t));
  }

  bool has_edge(State src, int letter, const std::vector<State>& sig) const {
    for (const Trans& t : trans)
      if (t.src == src && t.letter == letter && t.sig == sig) return true;
    return false;
  }

  Wndcma freeze() const {
    Wndcma a;
    a.level = level;
    a.letters = letters;
    a.state_names = names;
    a.initial = initial;
    a.finals = finals;
    a.trans = trans;
    return a;
  }

private:
  static std::string tkey(const Trans& t) {
    std::string k = std::to_string(t.src) + "|" + std::to_string(t.letter) + "|";
    for (State s : t.sig) k += std::to_string(s) + ",";
    k += ">" + std::to_string(t.dst) + "|";
    for (State s : t.upd) k += std::to_string(s) + ",";
    return k;
  }
  std::set<std::string> dedup_;
};

// Copy a member's non-initial states into the builder. Returns the state map
// (initial maps to -1).
std::vector<State> clone_states(AutoBuilder& b, const Wndcma& m, const std::string& prefix,
                                bool keep_finals);

// Map sub-automaton transition vectors through state/letter maps.
std::vector<State> map_states(const std::vector<State>& v, const std::vector<State>& smap);

// Final-state uniformity: all non-initial final states share their outgoing
// transitions. Throws on a determinism conflict.
void close_finals(AutoBuilder& b);

// Copy the union of outgoing transitions of `sources` onto each state in
// `receivers` (the thread-switching closure of the let-application cases).
void share_outgoing(AutoBuilder& b, const std::vector<State>& sources,
                    const std::vector<State>& receivers);

State secondary_of(const Wndcma& m);

int ctx_index(const TypeSequent& seq, const std::string& name);
std::map<int, std::vector<int>> payloads_by_initial(const Prearena& p);
int payload_of(const Prearena& p, const std::vector<int>& payload_vec, int ctx_idx);
int rhs_value_letter(const Prearena& p, int payload);

// A member whose complete plays are {eps, gamma . value}.
Wndcma value_member(const std::vector<std::string>& letters, int gamma, int value_letter);

// Duplicate the entry region of a cloned automaton (states reachable from its
// secondary through level>=1 transitions only) so that it can also run while
// the composite root still holds one of `roots`. Level>=1 copies pin the root
// to r; the first level-0 transition moves the root into the clone's space.
void rebase_entry_region(AutoBuilder& b, const Wndcma& n, const std::vector<State>& nmap,
                         const std::function<int(int)>& map_letter,
                         const std::vector<State>& roots);

// Letter map between two alphabets given a move correspondence (tags follow
// their base moves).
std::vector<int> letter_map_from_moves(const CompileAlphabet& sub, const CompileAlphabet& par,
                                       const std::vector<int>& move_map);

// The four-state producer shape s1 -γ-> s2 -...-> result used to detect the
// trivial value automaton of the let rule.
bool is_trivial_value_member(const Wndcma& m, int& result_letter);

// let x = M in N composition (concatenation on M's result); N keyed by the
// result payload. result_letter_of maps M's result letters to payloads.
struct LetComposeInput {
  const Wndcma* m;
  std::function<int(int)> result_payload; // M-letter -> payload, or -1
  std::function<const Wndcma*(int)> n_of; // payload -> N member
  std::function<int(int)> map_m_letter;   // M-letter -> composite letter (-1 erases)
  std::function<int(int)> map_n_letter;   // N-letter -> composite letter
  int gamma_letter;
};
void let_compose(AutoBuilder& b, const LetComposeInput& in);

// while M do N composition; M's zero result answers the composite, nonzero
// results loop into N, N's results loop back into M.
struct WhileComposeInput {
  const Wndcma* m;
  const Wndcma* n;
  std::function<int(int)> m_result_payload;
  std::function<bool(int)> n_is_result;
  std::function<int(int)> map_m_letter;
  std::function<int(int)> map_n_letter;
  int gamma_letter;
  int unit_answer_letter;
};
void while_compose(AutoBuilder& b, const WhileComposeInput& in);

} // namespace rmleq::detail
