// ast.hpp -- RML abstract syntax, shared by the parser and the type checker.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmleq/types.hpp"

namespace rmleq {

enum class TermKind {
  Unit,
  Lit,
  Var,
  Succ,
  Pred,
  Cond,   // kids: guard, then, else
  Deref,  // kids: ref term
  Assign, // kids: ref term, int term
  Ref,    // kids: initializer
  App,    // kids: fn, arg
  Lambda, // binder, binder_type; kids: body
  While,  // kids: guard, body
  Mkvar,  // kids: read fn, write fn
  Omega,
  // Sugar, removed by the type checker:
  Let,   // binder; kids: bound, body
  Seq,   // kids: first, second
  IntEq, // kids: lhs, rhs
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind = TermKind::Unit;
  int lit = 0;
  std::string name;    // Var ref name, Lambda/Let binder
  TypePtr binder_type; // Lambda annotation
  std::vector<TermPtr> kids;
  TypePtr type; // filled in by the type checker
  int line = 0, col = 0;
};

TermPtr mk_term(TermKind k, std::vector<TermPtr> kids = {});

struct SourceError : std::runtime_error {
  int line, col;
  SourceError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
        line(line), col(col) {}
};

struct SyntaxError : SourceError {
  using SourceError::SourceError;
};
struct TypeError : SourceError {
  using SourceError::SourceError;
};

std::string term_to_string(const TermPtr& t);

// JSON rendering of a (typed) AST, for tooling.
std::string term_to_json(const TermPtr& t);

} // namespace rmleq
