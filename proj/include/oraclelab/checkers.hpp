#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oraclelab/machine.hpp"
#include "oraclelab/oracles.hpp"
#include "oraclelab/rational.hpp"

namespace olab {

// Finite renderings of the quantifiers in the reducibility definitions.
// "Total" means halts within budget; "cofinite" means beyond some n0 <=
// cofinite_slack inside the window; "density 1" means the defined/agreement
// fraction over the window tail is at least density_floor.
struct CheckParams {
  std::uint64_t input_window = 64;    // N_in
  std::uint64_t oracle_window = 4096; // N_or, must be >= N_in
  std::uint64_t budget = 10000;
  std::vector<CorruptionSpec> corruption_family;
  std::optional<std::uint64_t> cofinite_slack;  // default N_in / 4
  Ratio density_floor{7, 8};
  std::uint64_t period_cap = 16;
  std::vector<std::uint64_t> ubfb_floor_targets;
  bool use_issued_positions = false;  // ubfb: count issued instead of used
  std::string density_scope = "tail"; // "tail" or "blocks"

  std::uint64_t slack() const { return cofinite_slack ? *cofinite_slack : input_window / 4; }

  nlohmann::json to_json() const;
  static CheckParams from_json(const nlohmann::json& j);
};

struct Witness {
  std::size_t spec_index = 0;          // position in corruption_family
  nlohmann::json spec;                 // embedded verbatim for replay
  std::uint64_t input = 0;
  std::string expected;
  std::string got;                     // "0" / "1" / "pending"
  std::string detail;
  std::string trace_jsonl;

  nlohmann::json to_json() const;
};

struct CheckReport {
  bool pass = false;
  std::string reducibility;
  std::string functional;
  std::vector<Witness> witnesses;      // sorted by spec order then input
  nlohmann::json statistics;
  nlohmann::json params_echo;

  nlohmann::json to_json() const;
};

CheckReport check_modfinite(const Functional& f, const BitSequence& a, const BitSequence& b,
                            const CheckParams& params);
CheckReport check_cofinite(const Functional& f, const BitSequence& a, const BitSequence& b,
                           const CheckParams& params);
CheckReport check_generic(const Functional& f, const BitSequence& a, const BitSequence& b,
                          const CheckParams& params);
CheckReport check_coarse(const Functional& f, const BitSequence& a, const BitSequence& b,
                         const CheckParams& params);
CheckReport check_modrecursive(const Functional& f, const BitSequence& a, const BitSequence& b,
                               const CheckParams& params);
// The corruption family is read as a strictly increasing chain of sparse
// domains; the produced-output count must grow strictly along it.
CheckReport check_ii(const Functional& f, const BitSequence& a, const BitSequence& b,
                     const CheckParams& params);
CheckReport check_ubfb(const Functional& f, const BitSequence& a, const BitSequence& b,
                       const CheckParams& params);

// Dispatch by tag: mf | cf | g | cor | mr | ii | ubfb.
CheckReport run_check(const std::string& reducibility, const Functional& f, const BitSequence& a,
                      const BitSequence& b, const CheckParams& params);

}  // namespace olab
