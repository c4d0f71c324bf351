// typecheck.hpp -- typing and desugaring for finitary RML.
//
// The checker annotates every node with its type and removes the sugar
// forms: `let x = M in N` becomes (λx.N) M, `M; N` becomes (λ_.N) M with a
// fresh binder, `M = N` on ints becomes a finite case split over {0..k-1},
// and Ω becomes a divergent while loop (at type unit) or such a loop
// followed by 0 (at type int). Ω is only admitted at base types; with no
// expected type from the context it defaults to unit.
#pragma once

#include "rmleq/ast.hpp"
#include "rmleq/types.hpp"

namespace rmleq {

using Context = std::vector<std::pair<std::string, TypePtr>>;

// k is the finitary integer modulus; succ/pred wrap mod k.
TermPtr typecheck(const TermPtr& t, const Context& ctx, int k);

} // namespace rmleq
