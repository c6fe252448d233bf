#pragma once

#include "oraclelab/machine.hpp"

namespace olab {

// Turns a mod-finite reduction into a use-bounded-from-below one. On input n
// the derived functional simulates the base functional against hypothetical
// completions of the oracle's first n bits, forking a simulation branch only
// when a bit below n is actually consulted, and never issuing real queries
// below n while branches still agree. If the halted branches disagree it
// queries the real bits n-1, n-2, ... in decreasing order, discarding
// branches contradicted by each answer, and halts as soon as the survivors
// agree on an output.
Functional mf_to_ubfb(const Functional& f);

// Turns a use-bounded-from-below reduction into a cofinite one: the wrapped
// functional may only halt once every query it issued has resolved. A query
// outside the oracle's domain therefore suspends the computation for good.
Functional ubfb_to_cf(const Functional& f);

}  // namespace olab
