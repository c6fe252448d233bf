#include "oraclelab/transformers.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <vector>

namespace olab {

namespace {

// Live branches are capped to keep degenerate compositions from exploding;
// a capped input is reported as exhausted, never answered wrongly.
constexpr std::size_t kBranchCap = 4096;

// Simulates the base functional against hypothetical completions of the low
// oracle bits. A branch forks only when the simulation actually consults an
// undetermined bit below the input, so inputs whose computation never looks
// below n cost a single branch. Queries at or above n are issued for real
// and shared between branches.
class UbfbState final : public ProgramState {
 public:
  UbfbState(const Functional& base, std::uint64_t input) : base_(base), input_(input) {
    branches_.push_back(Branch{base.program().start(input), {}, {}, {}, false, 0});
  }

  UbfbState(const UbfbState& o)
      : base_(o.base_), input_(o.input_), real_answers_(o.real_answers_),
        real_outstanding_(o.real_outstanding_), phase_(o.phase_), next_low_(o.next_low_),
        failed_(o.failed_), rr_(o.rr_) {
    branches_.reserve(o.branches_.size());
    for (const Branch& b : o.branches_)
      branches_.push_back(Branch{b.state->clone(), b.hypothesis, b.inbox, b.awaiting, b.halted,
                                 b.output});
  }

  void on_event(const Event& e, Actions& out) override {
    if (failed_) return;

    if (e.kind == Event::Kind::resolved) {
      real_answers_[e.position] = e.bit;
      real_outstanding_.erase(e.position);
      if (phase_ == 2 && static_cast<std::int64_t>(e.position) == next_low_) {
        eliminate_and_continue(e.position, e.bit, out);
        return;
      }
      for (Branch& b : branches_) {
        auto it = std::find(b.awaiting.begin(), b.awaiting.end(), e.position);
        if (it != b.awaiting.end()) {
          b.awaiting.erase(it);
          b.inbox.push_back({e.position, e.bit});
        }
      }
    }

    if (phase_ != 1) return;
    advance_one_branch(out);
    if (out.halt) return;

    if (!branches_.empty() && all_halted()) {
      if (outputs_agree()) {
        out.halt = branches_.front().output;
      } else {
        // survivors disagree: start consulting real bits below the input,
        // highest first
        phase_ = 2;
        next_low_ = static_cast<std::int64_t>(input_) - 1;
        out.queries.push_back(static_cast<std::uint64_t>(next_low_));
      }
    }
  }

  bool tick_inert() const override {
    if (failed_ || phase_ == 2) return true;
    for (const Branch& b : branches_) {
      if (b.halted) continue;
      if (!b.inbox.empty() || !b.state->tick_inert()) return false;
    }
    return true;
  }

  std::unique_ptr<ProgramState> clone() const override { return std::make_unique<UbfbState>(*this); }

 private:
  struct Branch {
    std::unique_ptr<ProgramState> state;
    std::map<std::uint64_t, int> hypothesis;
    std::deque<std::pair<std::uint64_t, int>> inbox;
    std::vector<std::uint64_t> awaiting;
    bool halted = false;
    int output = 0;
  };

  bool all_halted() const {
    return std::all_of(branches_.begin(), branches_.end(),
                       [](const Branch& b) { return b.halted; });
  }

  bool outputs_agree() const {
    for (const Branch& b : branches_)
      if (b.output != branches_.front().output) return false;
    return true;
  }

  bool runnable(const Branch& b) const {
    return !b.halted && (!b.inbox.empty() || !b.state->tick_inert());
  }

  void advance_one_branch(Actions& out) {
    if (branches_.empty()) return;
    std::size_t count = branches_.size();
    std::size_t idx = rr_ % count;
    bool found = false;
    for (std::size_t step = 0; step < count; ++step) {
      if (runnable(branches_[(idx + step) % count])) {
        idx = (idx + step) % count;
        found = true;
        break;
      }
    }
    if (!found) return;

    Branch& b = branches_[idx];
    Event inner_event{Event::Kind::tick, 0, 0};
    if (!b.inbox.empty()) {
      auto [pos, bit] = b.inbox.front();
      b.inbox.pop_front();
      inner_event = Event{Event::Kind::resolved, pos, bit};
    }
    inner_actions_.clear();
    b.state->on_event(inner_event, inner_actions_);

    if (inner_actions_.halt) {
      b.halted = true;
      b.output = *inner_actions_.halt;
      rr_ = idx + 1;
      return;
    }

    std::vector<std::uint64_t> fork_positions;
    for (std::uint64_t q : inner_actions_.queries) {
      if (q < input_) {
        auto it = b.hypothesis.find(q);
        if (it != b.hypothesis.end()) {
          b.inbox.push_back({q, it->second});
        } else if (std::find(fork_positions.begin(), fork_positions.end(), q) ==
                   fork_positions.end()) {
          fork_positions.push_back(q);
        }
      } else {
        auto it = real_answers_.find(q);
        if (it != real_answers_.end()) {
          b.inbox.push_back({q, it->second});
        } else {
          b.awaiting.push_back(q);
          if (!real_outstanding_.count(q)) {
            real_outstanding_.insert(q);
            out.queries.push_back(q);
          }
        }
      }
    }

    if (fork_positions.empty()) {
      rr_ = idx + 1;
      return;
    }

    // One child per completion of the newly consulted bits; the child with
    // all-zero hypothesis keeps the original slot order.
    std::size_t fan = std::size_t(1) << fork_positions.size();
    if (branches_.size() + fan - 1 > kBranchCap) {
      failed_ = true;
      return;
    }
    std::vector<Branch> children;
    children.reserve(fan);
    for (std::size_t mask = 0; mask < fan; ++mask) {
      Branch child{b.state->clone(), b.hypothesis, b.inbox, b.awaiting, false, 0};
      for (std::size_t k = 0; k < fork_positions.size(); ++k) {
        int bit = (mask >> k) & 1;
        child.hypothesis[fork_positions[k]] = bit;
        child.inbox.push_back({fork_positions[k], bit});
      }
      children.push_back(std::move(child));
    }
    branches_.erase(branches_.begin() + idx);
    branches_.insert(branches_.begin() + idx, std::make_move_iterator(children.begin()),
                     std::make_move_iterator(children.end()));
    rr_ = idx + fan;
  }

  void eliminate_and_continue(std::uint64_t pos, int bit, Actions& out) {
    std::vector<Branch> kept;
    kept.reserve(branches_.size());
    for (Branch& b : branches_) {
      auto it = b.hypothesis.find(pos);
      if (it == b.hypothesis.end() || it->second == bit) kept.push_back(std::move(b));
    }
    branches_ = std::move(kept);
    if (branches_.empty()) {
      failed_ = true;
      return;
    }
    if (outputs_agree()) {
      out.halt = branches_.front().output;
      return;
    }
    if (next_low_ == 0) {
      failed_ = true;  // cannot happen: all forks are separated by some low bit
      return;
    }
    --next_low_;
    out.queries.push_back(static_cast<std::uint64_t>(next_low_));
  }

  const Functional base_;
  std::uint64_t input_;
  std::vector<Branch> branches_;
  std::map<std::uint64_t, int> real_answers_;
  std::set<std::uint64_t> real_outstanding_;
  int phase_ = 1;
  std::int64_t next_low_ = -1;
  bool failed_ = false;
  std::size_t rr_ = 0;
  Actions inner_actions_;
};

class UbfbProgram final : public Program {
 public:
  explicit UbfbProgram(Functional base) : base_(std::move(base)) {}
  std::string id() const override { return "mf-to-ubfb(" + base_.id() + ")"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<UbfbState>(base_, input);
  }

 private:
  Functional base_;
};

// Holds the inner halt until every issued query has resolved; a query the
// oracle never answers therefore pins the computation in place.
class CfWrapState final : public ProgramState {
 public:
  explicit CfWrapState(std::unique_ptr<ProgramState> inner) : inner_(std::move(inner)) {}

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved) {
      auto it = outstanding_.find(e.position);
      if (it != outstanding_.end()) outstanding_.erase(it);
    }
    if (!held_) {
      inner_actions_.clear();
      inner_->on_event(e, inner_actions_);
      for (std::uint64_t q : inner_actions_.queries) {
        outstanding_.insert(q);
        out.queries.push_back(q);
      }
      if (inner_actions_.halt) held_ = inner_actions_.halt;
    }
    if (held_ && outstanding_.empty()) out.halt = *held_;
  }

  bool tick_inert() const override { return held_.has_value() || inner_->tick_inert(); }

  std::unique_ptr<ProgramState> clone() const override {
    auto c = std::make_unique<CfWrapState>(inner_->clone());
    c->outstanding_ = outstanding_;
    c->held_ = held_;
    return c;
  }

 private:
  std::unique_ptr<ProgramState> inner_;
  std::multiset<std::uint64_t> outstanding_;
  std::optional<int> held_;
  Actions inner_actions_;
};

class CfWrapProgram final : public Program {
 public:
  explicit CfWrapProgram(Functional base) : base_(std::move(base)) {}
  std::string id() const override { return "ubfb-to-cf(" + base_.id() + ")"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<CfWrapState>(base_.program().start(input));
  }

 private:
  Functional base_;
};

}  // namespace

Functional mf_to_ubfb(const Functional& f) { return Functional(std::make_shared<UbfbProgram>(f)); }

Functional ubfb_to_cf(const Functional& f) { return Functional(std::make_shared<CfWrapProgram>(f)); }

}  // namespace olab
