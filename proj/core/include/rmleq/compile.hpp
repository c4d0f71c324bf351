// compile.hpp -- strategy-to-automaton compilation for the two decidable
// fragments. Each compiler produces a family of deterministic WNDCMA, one
// per initial move of the prearena, over a shared alphabet.
#pragma once

#include <map>

#include "rmleq/arena.hpp"
#include "rmleq/canonical.hpp"
#include "rmleq/coverability.hpp"
#include "rmleq/ndcma.hpp"

namespace rmleq {

struct FragmentViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Prearena moves plus, where pointer tagging applies, marked variants
// m!src (on the justifying answer) and m!tgt (on the pointing question).
struct CompileAlphabet {
  std::vector<std::string> letters; // move id == letter id for untagged moves
  std::vector<int> src_of, tgt_of;  // per move id; -1 when absent
};

CompileAlphabet make_alphabet(const Prearena& p, bool with_tags);

struct AutomatonFamily {
  std::shared_ptr<Prearena> arena;
  CompileAlphabet alphabet;
  std::map<int, Wndcma> members; // initial move id -> automaton
};

AutomatonFamily compile_pstrict(const CanPtr& t, const TypeSequent& seq, int k);
AutomatonFamily compile_rforml(const CanPtr& t, const TypeSequent& seq, int k);

Wndcma merge_family(const AutomatonFamily& fam);

// Removes transitions that can never fire and states from which no final
// control state is coverable; language-preserving.
Wndcma cleanup(const Wndcma& a, uint64_t budget = kDefaultBudget);

struct FamilyCheck {
  bool no_initial_revisit = false;
  bool deterministic = false;
  bool level_discipline = false;
  bool unique_initial_transition = false;
  bool final_uniformity = false;
  std::string detail;
  bool all() const {
    return no_initial_revisit && deterministic && level_discipline &&
           unique_initial_transition && final_uniformity;
  }
};

FamilyCheck check_family_member(const Wndcma& a, int gamma_letter);

} // namespace rmleq
