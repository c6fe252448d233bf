#include "oraclelab/machine.hpp"

#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace olab {

namespace {

struct Due {
  std::uint64_t resolve_at;
  std::uint64_t sequence;  // issue order, breaks ties deterministically
  std::uint64_t position;
  int bit;
  std::uint64_t issue_tick;
};

struct DueLater {
  bool operator()(const Due& a, const Due& b) const {
    if (a.resolve_at != b.resolve_at) return a.resolve_at > b.resolve_at;
    return a.sequence > b.sequence;
  }
};

}  // namespace

bool CountingSearchInfo::is_relevant(std::uint64_t pos) const {
  if (explicit_positions.empty()) return pos >= from;
  for (std::uint64_t p : explicit_positions)
    if (p == pos) return true;
  return false;
}

std::string Trace::to_jsonl() const {
  std::ostringstream out;
  for (const TraceStep& s : steps) {
    nlohmann::json j;
    j["tick"] = s.tick;
    switch (s.kind) {
      case TraceStep::Kind::issued:
        j["action"] = "issued";
        j["position"] = s.position;
        break;
      case TraceStep::Kind::resolved:
        j["action"] = "resolved";
        j["position"] = s.position;
        j["bit"] = s.bit;
        j["issued_at"] = s.issue_tick;
        break;
      case TraceStep::Kind::halted:
        j["action"] = "halted";
        j["bit"] = s.bit;
        break;
    }
    out << j.dump() << "\n";
  }
  return out.str();
}

RunOutcome run(const Functional& f, const PartialOracle& oracle, std::uint64_t input,
               std::uint64_t budget, bool record_trace) {
  if (!f.valid()) throw std::invalid_argument("invalid functional");
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");

  RunOutcome outcome;
  std::unique_ptr<ProgramState> state = f.program().start(input);
  std::priority_queue<Due, std::vector<Due>, DueLater> due;
  std::map<std::uint64_t, std::uint64_t> outstanding;  // position -> open issue count
  std::uint64_t sequence = 0;
  Actions actions;

  auto note_used = [&outcome](std::uint64_t pos) {
    if (!outcome.trace.min_used || pos < *outcome.trace.min_used) outcome.trace.min_used = pos;
    if (!outcome.trace.max_used || pos > *outcome.trace.max_used) outcome.trace.max_used = pos;
  };

  for (std::uint64_t tick = 1; tick <= budget; ++tick) {
    Event event;
    if (!due.empty() && due.top().resolve_at <= tick) {
      const Due d = due.top();
      due.pop();
      event = Event{Event::Kind::resolved, d.position, d.bit};
      if (record_trace)
        outcome.trace.steps.push_back(
            {tick, TraceStep::Kind::resolved, d.position, d.bit, d.issue_tick});
      note_used(d.position);
      auto it = outstanding.find(d.position);
      if (it != outstanding.end() && --it->second == 0) outstanding.erase(it);
    } else {
      event = Event{Event::Kind::tick, 0, 0};
    }

    actions.clear();
    state->on_event(event, actions);

    for (std::uint64_t pos : actions.queries) {
      if (record_trace) outcome.trace.steps.push_back({tick, TraceStep::Kind::issued, pos, 0, 0});
      if (!outcome.trace.min_issued || pos < *outcome.trace.min_issued)
        outcome.trace.min_issued = pos;
      std::optional<OracleEntry> entry = oracle.entry(pos);
      if (entry) {
        due.push(Due{tick + entry->delay, sequence++, pos, entry->bit, tick});
        ++outstanding[pos];
      } else {
        // No entry: the query can never resolve; it stays pending forever.
        outcome.pending.push_back(pos);
      }
    }

    if (actions.halt) {
      outcome.status = RunOutcome::Status::halted;
      outcome.output = *actions.halt;
      outcome.ticks_used = tick;
      if (record_trace)
        outcome.trace.steps.push_back({tick, TraceStep::Kind::halted, 0, *actions.halt, 0});
      for (const auto& [pos, count] : outstanding)
        for (std::uint64_t i = 0; i < count; ++i) outcome.pending.push_back(pos);
      std::sort(outcome.pending.begin(), outcome.pending.end());
      outcome.pending.erase(std::unique(outcome.pending.begin(), outcome.pending.end()),
                            outcome.pending.end());
      return outcome;
    }

    // Dead waiting time: nothing will ever resolve and the program ignores
    // bare ticks, so the remaining budget cannot change the outcome.
    if (due.empty() && state->tick_inert()) break;
  }

  outcome.status = RunOutcome::Status::exhausted;
  outcome.ticks_used = budget;
  while (!due.empty()) {
    outcome.pending.push_back(due.top().position);
    due.pop();
  }
  std::sort(outcome.pending.begin(), outcome.pending.end());
  outcome.pending.erase(std::unique(outcome.pending.begin(), outcome.pending.end()),
                        outcome.pending.end());
  return outcome;
}

RunOutcome run(const Functional& f, const BitSequence& oracle, std::uint64_t input,
               std::uint64_t budget) {
  return run(f, PartialOracle::total(oracle), input, budget);
}

RunOutcome run(const Functional& f, const CorruptedOracle& oracle, std::uint64_t input,
               std::uint64_t budget) {
  return run(f, as_oracle(oracle), input, budget);
}

}  // namespace olab
