// parser.hpp -- concrete syntax for terms, types, and typing contexts.
//
// Term grammar (ML-ish, annotations mandatory on lambda binders):
//
//   term  ::= seq
//   seq   ::= asg (';' seq)?
//   asg   ::= eq (':=' asg)?
//   eq    ::= app ('=' app)?
//   app   ::= pre pre*
//   pre   ::= ('!' | 'succ' | 'pred' | 'ref') pre | atom
//   atom  ::= '(' term ')' | '()' | INT | IDENT | 'Ω' | 'omega'
//           | λ IDENT ':' type '.' term          (λ may be written '\' or 'fun')
//           | 'let' IDENT '=' term 'in' term
//           | 'if' term 'then' term 'else' term
//           | 'while' term 'do' term
//           | 'mkvar' '(' term ',' term ')'
//   type  ::= tatom ('->' type)?
//   tatom ::= 'unit' | 'int' ('ref')? | '(' type ')'
//
// Comments are (* ... *). A typing context is a comma- or newline-separated
// list of `name : type` entries.
#pragma once

#include "rmleq/ast.hpp"

namespace rmleq {

TermPtr parse_term(const std::string& source);
TypePtr parse_type(const std::string& source);
std::vector<std::pair<std::string, TypePtr>> parse_context(const std::string& source);

} // namespace rmleq
