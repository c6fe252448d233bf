#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "oraclelab/oracles.hpp"
#include "oraclelab/sequences.hpp"

namespace olab {

// One event delivered to a functional's state machine. Each tick carries
// exactly one event: a resolved oracle answer when one is due, a bare tick
// otherwise.
struct Event {
  enum class Kind { tick, resolved };
  Kind kind = Kind::tick;
  std::uint64_t position = 0;
  int bit = 0;
};

// What a state machine emits in response to one event. Queries issued in the
// same event share the issue tick.
struct Actions {
  std::vector<std::uint64_t> queries;
  std::optional<int> halt;
  void clear() {
    queries.clear();
    halt.reset();
  }
};

// Description of counting-search programs, exposed so the deduction engine
// can apply its exact mode. relevant positions are those >= from when
// explicit_positions is empty, otherwise exactly the listed ones.
struct CountingSearchInfo {
  std::uint64_t required = 1;
  std::uint64_t from = 0;
  std::vector<std::uint64_t> explicit_positions;  // empty = cofinite pattern
  bool relevant_infinite() const { return explicit_positions.empty(); }
  bool is_relevant(std::uint64_t pos) const;
};

class ProgramState {
 public:
  virtual ~ProgramState() = default;
  virtual void on_event(const Event& event, Actions& out) = 0;
  // May return true only when every future bare tick would produce no
  // actions and no state change; lets the run loop skip dead waiting time.
  virtual bool tick_inert() const { return false; }
  virtual std::unique_ptr<ProgramState> clone() const = 0;
};

// Immutable program description. start() yields a fresh deterministic state
// machine for one input.
class Program {
 public:
  virtual ~Program() = default;
  virtual std::string id() const = 0;
  virtual std::unique_ptr<ProgramState> start(std::uint64_t input) const = 0;
  virtual const CountingSearchInfo* counting_info() const { return nullptr; }
};

class Functional {
 public:
  Functional() = default;
  explicit Functional(std::shared_ptr<const Program> program) : program_(std::move(program)) {}

  const Program& program() const { return *program_; }
  std::string id() const { return program_ ? program_->id() : std::string(); }
  bool valid() const { return program_ != nullptr; }

 private:
  std::shared_ptr<const Program> program_;
};

struct TraceStep {
  enum class Kind { issued, resolved, halted };
  std::uint64_t tick = 0;
  Kind kind = Kind::issued;
  std::uint64_t position = 0;
  int bit = 0;
  std::uint64_t issue_tick = 0;  // resolved steps: when the query was issued
};

struct Trace {
  std::vector<TraceStep> steps;
  // Positions whose answers were actually delivered to the program.
  std::optional<std::uint64_t> min_used;
  std::optional<std::uint64_t> max_used;
  std::optional<std::uint64_t> min_issued;

  std::string to_jsonl() const;  // one JSON record per step
};

struct RunOutcome {
  enum class Status { halted, exhausted };
  Status status = Status::exhausted;
  int output = 0;  // meaningful only when halted
  std::uint64_t ticks_used = 0;
  Trace trace;
  std::vector<std::uint64_t> pending;  // issued but never resolved, sorted

  bool halted() const { return status == Status::halted; }
};

// Deterministic simulation of one functional run: at most budget ticks,
// single clock for computation steps and oracle delays, complete trace.
// record_trace = false skips the step log (outcome and used-position bounds
// are unaffected); bulk callers like the deduction engine use it.
RunOutcome run(const Functional& f, const PartialOracle& oracle, std::uint64_t input,
               std::uint64_t budget, bool record_trace = true);
RunOutcome run(const Functional& f, const BitSequence& oracle, std::uint64_t input,
               std::uint64_t budget);
RunOutcome run(const Functional& f, const CorruptedOracle& oracle, std::uint64_t input,
               std::uint64_t budget);

// Built-in catalog, all referable by term strings (parse_functional):
//   identity            C(n)
//   bit-flip            1 - C(n)
//   proj:a:b            C(a*n + b)
//   xor-pair            C(2n) xor C(2n+1)
//   and-next            C(n) * C(n+1)
//   block-search        first resolved answer in the dyadic block of n
//   block-vote          majority vote over the dyadic block of n
//   odd-search          first resolved answer among 2^n * odd
//   r-encode            power-of-two coding of the oracle, input as position
//   counting-search:c[:from:<r>|:list:<p,..>][:horizon:<h>]
//   bit-gate:p          halt 1 iff C(p) = 1, else run forever
//   after:k:b           halt with b after k ticks, no queries
//   diverge             never halts
//   half-even           C(m/2) for even m, diverge on odd
//   half-odd            C((m-1)/2) for odd m, diverge on even
// combinators: patch(f,{n:b,..})  flip-on(f,<epset>)  race(f,g)
//              column-search(f)  mf-to-ubfb(f)  ubfb-to-cf(f)
Functional parse_functional(const std::string& term);

Functional patch_finite(const Functional& f, const std::map<std::uint64_t, int>& patch);
Functional flip_on_set(const Functional& f, const EventuallyPeriodicSet& flip_set);
// Lockstep interleaving against the even/odd halves of the oracle: f sees
// {n : 2n in S}, g sees {n : 2n+1 in S}; one tick each, f first; first halt
// wins.
Functional race(const Functional& f, const Functional& g);

}  // namespace olab
