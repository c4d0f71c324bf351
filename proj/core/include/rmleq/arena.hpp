// arena.hpp -- arenas and prearenas for type sequents.
//
// Move naming: the right-hand side uses a0/q1/a1/... along the type spine
// (payloads in parens, e.g. a0(1)); context-variable moves carry a _name
// suffix (q1_z, a1_z(0)); descending into a function argument prefixes the
// spine position (q1.q1(0)_z); int ref cells expose read / write(j) /
// val(j) / ok. The initial move is q0 with the int-typed context values as
// payload, e.g. q0(1,0).
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmleq/types.hpp"

namespace rmleq {

struct Move {
  int id = -1;
  std::string name;
  bool opp = false;      // belongs to Opponent
  bool question = false; // question move
  bool initial = false;
  int comp = -1;               // -2 initial tuple, -1 RHS, >= 0 context index
  int level = 0;               // nesting level of the value this move rides in the
                               // P-strict encoding (answers share their question's level)
  std::optional<int> payload;  // int value carried, if any
  std::vector<int> enablers;   // ids of enabling moves
};

// Move structure of one value occurrence of a type.
struct TypeView {
  TypePtr type;
  std::vector<int> values; // value moves; empty for context roots (merged into q0)
  // arrow:
  std::vector<int> arg_questions;
  std::shared_ptr<TypeView> arg_view;  // set when the argument is fn/intref
  std::shared_ptr<TypeView> rest_view; // rest of the arrow after one argument
  // intref:
  int read_q = -1;
  std::vector<int> write_q, read_a;
  int write_a = -1;
};

struct Arena {
  std::vector<Move> moves;
  std::vector<int> initials;
};

struct Prearena {
  TypeSequent seq;
  int k = 2;
  std::vector<Move> moves;
  std::vector<int> initials;
  std::map<std::vector<int>, int> initial_by_payload; // int ctx values -> move id
  std::vector<std::shared_ptr<TypeView>> ctx_views;
  std::shared_ptr<TypeView> rhs_view;

  const Move& move(int id) const { return moves[id]; }
  std::vector<std::string> letter_names() const;
  std::string dump_dot() const;
};

Arena arena_of_type(const TypePtr& t, int k);
std::shared_ptr<Prearena> prearena_of_sequent(const TypeSequent& seq, int k);

bool is_pstrict(const Prearena& p);
int question_depth(const Prearena& p);

// Pair up the moves of two structurally equal views: fills m[sub-move] = parent-move.
void map_views(const TypeView& a, const TypeView& b, std::vector<int>& m);

} // namespace rmleq
