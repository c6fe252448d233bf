#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "oraclelab/machine.hpp"
#include "oraclelab/oracles.hpp"

namespace olab {

// A finite partial oracle: finitely many position -> bit assignments.
struct FinitePartialOracle {
  std::map<std::uint64_t, int> assignments;

  std::string id() const;  // canonical "p:b,p:b,..." (empty oracle: "e")
  static FinitePartialOracle parse(const std::string& id);
  PartialOracle as_oracle() const;
  FinitePartialOracle extended(std::uint64_t pos, int bit) const;  // 1-extension

  bool operator<(const FinitePartialOracle& o) const { return assignments < o.assignments; }
  bool operator==(const FinitePartialOracle& o) const { return assignments == o.assignments; }
};

// Deduced facts: sigma forces the functional's output at n to be i.
struct Fact {
  FinitePartialOracle sigma;
  std::uint64_t input = 0;
  int value = 0;

  auto key() const { return std::tuple(sigma.assignments, input, value); }
  bool operator<(const Fact& o) const { return key() < o.key(); }
  bool operator==(const Fact& o) const { return key() == o.key(); }
};

using FactSet = std::set<Fact>;

// "Infinitely many 1-extensions" is not decidable, so the engine offers a
// threshold surrogate (>= t extensions with positions below P, an
// approximation by construction) and an exact mode for counting-search
// programs, where all but finitely many 1-extensions fall into a single
// class whose behaviour is position- and value-independent.
struct DeductionMode {
  enum class Kind { threshold, exact_counting };
  Kind kind = Kind::threshold;
  std::uint64_t t = 2;
  std::uint64_t position_bound = 16;  // P
  std::uint64_t budget = 256;
  std::uint64_t max_rank = 6;
  // Extension candidates examined per fact, in increasing position order
  // (two per position). 0 means every candidate below P. Ranks certified
  // within the window are exact; witnesses beyond it are not searched, which
  // is what keeps rank queries polynomial.
  std::uint64_t scan_cap = 32;

  static DeductionMode threshold(std::uint64_t t, std::uint64_t p, std::uint64_t budget,
                                 std::uint64_t max_rank = 6);
  static DeductionMode exact_counting(std::uint64_t budget = 256);
  nlohmann::json to_json() const;
};

// One application of the closure operator over the explicitly enumerable
// universe of partial oracles with domain inside [0, P): keeps X, adds every
// direct convergence, and adds facts justified by the extension clause.
// Requires P small enough to enumerate (3^P assignments).
FactSet gamma_step(const Functional& f, const FactSet& x, const DeductionMode& mode,
                   const std::vector<std::uint64_t>& inputs);

struct DeductionEntry {
  int value = 0;
  std::uint64_t rank = 0;
};

struct DeductionTable {
  // (sigma id, input) -> deduced value with minimal rank
  std::map<std::pair<std::string, std::uint64_t>, DeductionEntry> entries;
  DeductionMode mode;
  bool closed = false;

  nlohmann::json to_json() const;
  std::map<std::uint64_t, std::uint64_t> rank_histogram() const;
};

// Minimal closure ranks for the given oracles. Threshold mode evaluates the
// closure stage of each fact lazily (memoized over extensions), which agrees
// with iterating gamma_step but does not require enumerating 3^P oracles;
// exact mode applies the counting-search closed form.
DeductionTable deduction_closure(const Functional& f, const std::vector<std::uint64_t>& inputs,
                                 const DeductionMode& mode,
                                 const std::vector<FinitePartialOracle>& sigmas);

// Whole-universe variant: iterates gamma_step to its fixpoint over every
// oracle below the position bound (P <= 8) and tabulates each fact at the
// first stage that contains it.
DeductionTable deduction_closure(const Functional& f, const std::vector<std::uint64_t>& inputs,
                                 const DeductionMode& mode);

// Closed form for counting-search with required count c and d relevant bits
// already assigned: rank max(0, c - d). A finite relevant set admits no
// deduction beyond direct convergence (no infinite extension class).
std::optional<std::uint64_t> exact_rank_counting(std::uint64_t c, std::uint64_t d,
                                                 bool relevant_infinite = true);

}  // namespace olab
