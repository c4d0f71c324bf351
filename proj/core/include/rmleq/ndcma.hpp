// ndcma.hpp -- weak nested data class memory automata.
//
// A level-l automaton reads (letter, value) pairs where values live in a
// forest of depth <= l. A level-i transition reads the states last stored
// for the value and each of its ancestors (the signature, root first) and
// rewrites that whole chain (the update). Acceptance is by final control
// state only. BOT (-1) marks values not seen yet; valid signatures have
// their BOT entries as a suffix of the chain.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rmleq {

using State = int32_t;
constexpr State BOT = -1;

struct NotDeterministic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AlphabetMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Trans {
  State src = 0;
  int letter = 0;
  std::vector<State> sig; // size level+1, root first
  State dst = 0;
  std::vector<State> upd; // size level+1, no BOT entries
};

struct DataWord {
  struct Pos {
    int letter;
    int value;
  };
  std::vector<Pos> positions;
  std::vector<int> parent; // per value id; -1 for roots

  int value_level(int v) const {
    int lv = 0;
    while (parent[v] >= 0) {
      v = parent[v];
      lv++;
    }
    return lv;
  }
  bool canonical() const;
  std::string to_string(const std::vector<std::string>& letters) const;
};

DataWord parse_data_word(const std::string& text, const std::vector<std::string>& letters);

struct Configuration {
  State q = 0;
  std::vector<State> mem; // per value id, BOT if absent
};

class Wndcma {
public:
  int level = 0;
  std::vector<std::string> letters;
  std::vector<std::string> state_names;
  State initial = 0;
  std::vector<char> finals; // per state
  std::vector<Trans> trans;

  int num_states() const { return (int)state_names.size(); }
  bool is_final(State q) const { return q >= 0 && q < (int)finals.size() && finals[q]; }

  // (src, letter, sig) -> transition indices; built on first use.
  const std::vector<int>* lookup(State src, int letter, const std::vector<State>& sig) const;
  const std::vector<int>& by_src_letter_level(State src, int letter, int lvl) const;

  void invalidate_index() const;

private:
  mutable bool indexed_ = false;
  mutable std::unordered_map<std::string, std::vector<int>> idx_;
  mutable std::map<std::tuple<State, int, int>, std::vector<int>> by_sll_;
  void build_index() const;
};

std::vector<Configuration> step(const Wndcma& a, const Configuration& c, int letter, int value,
                                const std::vector<int>& parent);
bool accepts(const Wndcma& a, const DataWord& w);
bool is_deterministic(const Wndcma& a);

Wndcma complete(const Wndcma& a);
Wndcma complement(const Wndcma& a);
Wndcma intersect(const Wndcma& a, const Wndcma& b);
Wndcma unite(const Wndcma& a, const Wndcma& b);
// L(a) \ L(b); computes intersect(a, complement(b)) with the completion of b
// applied lazily so only reachable signature pairings are materialized.
Wndcma difference(const Wndcma& a, const Wndcma& b);

struct LevelReport {
  bool ok = true;
  std::map<State, std::vector<int>> levels; // state -> slot levels it occupies
};
LevelReport check_level_discipline(const Wndcma& a);

std::string serialize(const Wndcma& a);
Wndcma parse_wndcma(const std::string& text);

} // namespace rmleq
