#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "oraclelab/rational.hpp"
#include "oraclelab/sequences.hpp"

namespace olab {

struct OracleEntry {
  int bit = 0;
  std::uint64_t delay = 0;  // ticks until the answer resolves
};

// A partial 0/1 function with per-position resolution delays. Entries are
// total functions of the position (at most one entry per position), and a
// partial oracle built *for* a sequence never disagrees with it on its
// domain. Instances are immutable and safe to query concurrently.
class PartialOracle {
 public:
  PartialOracle() = default;

  std::optional<OracleEntry> entry(std::uint64_t pos) const {
    return impl_ ? impl_->lookup(pos) : std::nullopt;
  }
  const std::string& domain_descriptor() const;

  static PartialOracle total(BitSequence seq);
  static PartialOracle from_map(std::map<std::uint64_t, OracleEntry> entries);
  // Restriction of seq to the positions where defined_delay yields a value;
  // the value doubles as the resolution delay.
  static PartialOracle view(BitSequence seq,
                            std::function<std::optional<std::uint64_t>(std::uint64_t)> defined_delay,
                            std::string domain_descriptor);
  // Generic derived oracle (used by coding lifts and 1-reduction transfer).
  static PartialOracle derived(std::function<std::optional<OracleEntry>(std::uint64_t)> lookup,
                               std::string domain_descriptor);

 private:
  struct Impl {
    std::function<std::optional<OracleEntry>(std::uint64_t)> lookup;
    std::string domain_descriptor;
  };
  std::shared_ptr<const Impl> impl_;
};

enum class QueryResult { resolved0, resolved1, pending };

// Resolves iff an entry exists at pos with delay <= ticks_available.
// Absence of an entry is the pending case, never an error.
QueryResult oracle_query(const PartialOracle& oracle, std::uint64_t pos,
                         std::uint64_t ticks_available);

// How an oracle deviates from a reference sequence. A spec either corrupts
// values (yielding a total sequence) or restricts the domain (yielding a
// partial oracle), never both.
//
// kinds and parameters:
//   finite-error        {positions: [..]}
//   finite-drop         {positions: [..]}
//   cofinite-domain     {dropped: [..]}
//   density1-domain     {keep: "p/q", from: k}        per dyadic block
//   density-error       {fraction: "p/q", placement: "random"|"leading",
//                        blocks: [..] (optional restriction)}
//   eventually-periodic-difference {set: "pattern[:transient]"}
//   infinite-sparse-domain {positions: [..]}
//   delay-profile       {rule: {kind: "constant"|"linear", a, b}}
struct CorruptionSpec {
  std::string kind;
  nlohmann::json parameters;
  std::uint64_t seed = 0;

  bool value_corrupting() const;
  bool domain_restricting() const;

  nlohmann::json to_json() const;
  static CorruptionSpec from_json(const nlohmann::json& j);

  static CorruptionSpec finite_error(std::vector<std::uint64_t> positions);
  static CorruptionSpec finite_drop(std::vector<std::uint64_t> positions);
  static CorruptionSpec cofinite_domain(std::vector<std::uint64_t> dropped);
  static CorruptionSpec density1_domain(Ratio keep, std::uint64_t from, std::uint64_t seed);
  static CorruptionSpec density_error(Ratio fraction, std::string placement, std::uint64_t seed,
                                      std::vector<std::uint64_t> blocks = {});
  static CorruptionSpec periodic_difference(const EventuallyPeriodicSet& set);
  static CorruptionSpec sparse_domain(std::vector<std::uint64_t> positions);
  static CorruptionSpec delay_profile(std::string rule_kind, std::uint64_t a, std::uint64_t b);
};

using CorruptedOracle = std::variant<BitSequence, PartialOracle>;

CorruptedOracle oracle_for(const BitSequence& seq, const CorruptionSpec& spec);

// Uniform machine-facing view: total sequences become delay-0 total oracles.
PartialOracle as_oracle(const CorruptedOracle& view);
bool is_total(const CorruptedOracle& view);
const BitSequence& total_view(const CorruptedOracle& view);  // throws if partial

}  // namespace olab
