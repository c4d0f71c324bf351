// canonical.hpp -- conversion of typed terms into canonical form.
//
// Canonical terms follow the grammar (β ∈ {unit, int}):
//
//   C ::= () | i | x | succ x | pred x | if x then C else C | x := y | !x
//       | λx:θ. C | mkvar(λu:unit. C, λv:int. C) | let x = ref 0 in C
//       | while C do C | let x:β = C in C
//       | let x = z y in C | let x = z mkvar(λu.C, λv.C) in C
//       | let x = z (λy:θ. C) in C
//
// Guards and the operands of succ/pred/:=/! are variables, never compound
// terms. Conversion names every intermediate base value with a let,
// beta-reduces internal higher-type redexes, eta-expands bare higher-type
// variables, and turns `ref M` into `let x = ref 0 in x := v; ...`.
#pragma once

#include "rmleq/ast.hpp"
#include "rmleq/typecheck.hpp"

namespace rmleq {

enum class CanKind {
  Unit, Lit, Var, Succ, Pred,
  Cond,        // guard var; kids: then, else
  Assign,      // var := var2
  Deref,       // !var
  Lambda,      // binder:binder_type; kids: body
  Mkvar,       // binders aux1 (unit), aux2 (int); kids: read body, write body
  RefLet,      // binder; kids: body         -- let binder = ref 0 in body
  While,       // kids: guard, body
  LetBase,     // binder:binder_type (base); kids: bound, body
  LetAppBase,  // binder = var var2; kids: body        -- let x = z y in C
  LetAppMkvar, // binder = var mkvar(λaux1.k0, λaux2.k1); kids: read, write, body
  LetAppFn,    // binder = var (λaux1:binder_type. k0); kids: fn body, let body
};

struct CanTerm;
using CanPtr = std::shared_ptr<const CanTerm>;

struct CanTerm {
  CanKind kind = CanKind::Unit;
  int lit = 0;
  std::string var, var2; // variable operands (x, y/z per kind)
  std::string binder, aux1, aux2;
  TypePtr binder_type;
  std::vector<CanPtr> kids;
  TypePtr type;
};

struct UnsupportedConstruct : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// t must be the output of typecheck (fully annotated, sugar removed).
CanPtr canonicalize(const TermPtr& t, const Context& ctx);

// Shape check against the canonical grammar for raw parsed-and-sugared
// terms (let-forms as Let nodes); used for validating external input.
bool validate_canonical(const TermPtr& t, const Context& ctx);

// Embedding back into the term language (produces Let/App sugar forms).
TermPtr embed_canonical(const CanPtr& c);

std::string canonical_to_string(const CanPtr& c);

} // namespace rmleq
