// equiv.hpp -- the observational-equivalence decision procedure and its
// bounded-enumeration oracle.
#pragma once

#include "rmleq/classify.hpp"
#include "rmleq/compile.hpp"

namespace rmleq {

enum class Fragment { Auto, PStrict, RForml };
enum class Encoding { PStrict, RForml };

struct DecideOptions {
  int k = 3;
  uint64_t budget = kDefaultBudget;
  Fragment fragment = Fragment::Auto;
  int witness_max_len = 20;
};

struct Verdict {
  enum Kind { Equivalent, Inequivalent, Unknown, NotDecidableFragment } kind = Unknown;
  std::optional<DataWord> witness;
  std::vector<std::string> witness_letters; // letter names of the witness
  std::string witness_text;                 // printable data word
  std::string witness_play;                 // rendered play with pointers
  std::optional<UndecidableReason> reason;
  std::string detail;
};

Verdict decide(const TermPtr& m, const TermPtr& n, const Context& ctx, const DecideOptions& opts);

// First canonical data word of length <= max_len on which acceptance
// differs; enumeration explores fresh values in first-occurrence order.
std::optional<DataWord> bounded_language_equal(const Wndcma& a, const Wndcma& b, int max_len);

struct DecodedPlay {
  bool ok = false;
  std::string error;
  std::vector<int> justifier; // per position; -1 for the initial move
  bool complete = false;
  std::string rendered;
};

struct MalformedWord : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AmbiguousPointer : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reconstruct the pointers of an encoded play. Section-B pointers that the
// word leaves ambiguous raise AmbiguousPointer unless a probe automaton is
// supplied (decode_tagging) to query tagged variants.
DecodedPlay decode_word(const Prearena& p, const CompileAlphabet& alpha, const DataWord& w,
                        Encoding enc);
DecodedPlay decode_tagging(const Wndcma& probe, const Prearena& p, const CompileAlphabet& alpha,
                           const DataWord& w, Encoding enc);

// Compile + merge + cleanup for one term under the chosen encoding.
Wndcma compile_term(const TermPtr& term, const Context& ctx, int k, Encoding enc,
                    AutomatonFamily* family_out = nullptr);

} // namespace rmleq
