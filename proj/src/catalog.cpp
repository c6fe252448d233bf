#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "oraclelab/machine.hpp"

namespace olab {

namespace {

constexpr std::uint64_t kIssueBatch = 64;     // dovetailed searches per event
constexpr std::uint64_t kPositionCap = 1ULL << 60;

std::uint64_t pow2_checked(std::uint64_t n) {
  if (n >= 62) throw std::domain_error("dyadic block index too large: " + std::to_string(n));
  return 1ULL << n;
}

// ---- simple one-query programs --------------------------------------------

class HaltNowState final : public ProgramState {
 public:
  explicit HaltNowState(int bit) : bit_(bit) {}
  void on_event(const Event&, Actions& out) override { out.halt = bit_; }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<HaltNowState>(bit_);
  }

 private:
  int bit_;
};

class DivergeState final : public ProgramState {
 public:
  void on_event(const Event&, Actions&) override {}
  bool tick_inert() const override { return true; }
  std::unique_ptr<ProgramState> clone() const override { return std::make_unique<DivergeState>(); }
};

// Queries one position, then maps the answer through out0/out1.
class OneQueryState final : public ProgramState {
 public:
  OneQueryState(std::uint64_t pos, int out0, int out1) : pos_(pos), out0_(out0), out1_(out1) {}

  void on_event(const Event& e, Actions& out) override {
    if (!issued_) {
      issued_ = true;
      out.queries.push_back(pos_);
      return;
    }
    if (e.kind == Event::Kind::resolved && e.position == pos_) {
      out.halt = e.bit ? out1_ : out0_;
    }
  }
  bool tick_inert() const override { return issued_; }
  std::unique_ptr<ProgramState> clone() const override {
    auto c = std::make_unique<OneQueryState>(pos_, out0_, out1_);
    c->issued_ = issued_;
    return c;
  }

 private:
  std::uint64_t pos_;
  int out0_, out1_;
  bool issued_ = false;
};

class ProjProgram final : public Program {
 public:
  ProjProgram(std::uint64_t a, std::uint64_t b, bool flip, std::string id)
      : a_(a), b_(b), flip_(flip), id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    std::uint64_t pos = a_ * input + b_;
    return std::make_unique<OneQueryState>(pos, flip_ ? 1 : 0, flip_ ? 0 : 1);
  }

 private:
  std::uint64_t a_, b_;
  bool flip_;
  std::string id_;
};

// ---- two-query programs (xor-pair, and-next) ------------------------------

class PairState final : public ProgramState {
 public:
  enum class Op { xor_op, and_op };
  PairState(std::uint64_t p, std::uint64_t q, Op op) : p_(p), q_(q), op_(op) {}

  void on_event(const Event& e, Actions& out) override {
    if (!issued_) {
      issued_ = true;
      out.queries.push_back(p_);
      out.queries.push_back(q_);
      return;
    }
    if (e.kind != Event::Kind::resolved) return;
    if (e.position == p_ && !have_p_) {
      have_p_ = true;
      bit_p_ = e.bit;
    } else if (e.position == q_ && !have_q_) {
      have_q_ = true;
      bit_q_ = e.bit;
    }
    if (have_p_ && have_q_)
      out.halt = op_ == Op::xor_op ? (bit_p_ ^ bit_q_) : (bit_p_ & bit_q_);
  }
  bool tick_inert() const override { return issued_; }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<PairState>(*this);
  }

 private:
  std::uint64_t p_, q_;
  Op op_;
  bool issued_ = false;
  bool have_p_ = false, have_q_ = false;
  int bit_p_ = 0, bit_q_ = 0;
};

class PairProgram final : public Program {
 public:
  PairProgram(PairState::Op op, std::string id) : op_(op), id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    if (op_ == PairState::Op::xor_op)
      return std::make_unique<PairState>(2 * input, 2 * input + 1, op_);
    return std::make_unique<PairState>(input, input + 1, op_);
  }

 private:
  PairState::Op op_;
  std::string id_;
};

// ---- searches över dyadic blocks and odd multiples ------------------------

// First resolved answer wins. Issues the whole block ahead of the answers
// (batched), since holes in the domain must not stall the search.
class BlockSearchState final : public ProgramState {
 public:
  explicit BlockSearchState(std::uint64_t n) {
    next_ = pow2_checked(n);
    end_ = next_ * 2;
  }

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved) {
      out.halt = e.bit;
      return;
    }
    for (std::uint64_t i = 0; i < kIssueBatch && next_ < end_; ++i) out.queries.push_back(next_++);
  }
  bool tick_inert() const override { return next_ >= end_; }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<BlockSearchState>(*this);
  }

 private:
  std::uint64_t next_ = 0, end_ = 0;
};

class BlockSearchProgram final : public Program {
 public:
  std::string id() const override { return "block-search"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<BlockSearchState>(input);
  }
};

// Strictly sequential scan of the block in increasing order: ask, wait,
// tally, move on. Halts once either answer value reaches 2^{n-1}; the block
// of size one (n = 0) just reports its single answer.
class BlockVoteState final : public ProgramState {
 public:
  explicit BlockVoteState(std::uint64_t n) {
    std::uint64_t size = pow2_checked(n);
    next_ = size;
    end_ = size * 2;
    threshold_ = n == 0 ? 1 : size / 2;
  }

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved) {
      waiting_ = false;
      ++count_[e.bit ? 1 : 0];
      if (count_[e.bit ? 1 : 0] >= threshold_) {
        out.halt = e.bit;
        return;
      }
    }
    if (!waiting_ && next_ < end_) {
      out.queries.push_back(next_++);
      waiting_ = true;
    }
  }
  bool tick_inert() const override { return waiting_ || next_ >= end_; }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<BlockVoteState>(*this);
  }

 private:
  std::uint64_t next_ = 0, end_ = 0, threshold_ = 0;
  std::uint64_t count_[2] = {0, 0};
  bool waiting_ = false;
};

class BlockVoteProgram final : public Program {
 public:
  std::string id() const override { return "block-vote"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<BlockVoteState>(input);
  }
};

class OddSearchState final : public ProgramState {
 public:
  explicit OddSearchState(std::uint64_t n) : scale_(pow2_checked(n)) {}

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved) {
      out.halt = e.bit;
      return;
    }
    for (std::uint64_t i = 0; i < 16; ++i) {
      if (m_ > kPositionCap / scale_) {
        done_ = true;
        break;
      }
      out.queries.push_back(scale_ * m_);
      m_ += 2;
    }
  }
  bool tick_inert() const override { return done_; }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<OddSearchState>(*this);
  }

 private:
  std::uint64_t scale_;
  std::uint64_t m_ = 1;
  bool done_ = false;
};

class OddSearchProgram final : public Program {
 public:
  std::string id() const override { return "odd-search"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<OddSearchState>(input);
  }
};

// Reads the oracle as a set S and reports membership of the input in the
// divisor coding of S: query the 2-adic valuation of the input.
class REncodeProgram final : public Program {
 public:
  std::string id() const override { return "r-encode"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    if (input == 0) return std::make_unique<HaltNowState>(0);
    std::uint64_t n = static_cast<std::uint64_t>(__builtin_ctzll(input));
    return std::make_unique<OneQueryState>(n, 0, 1);
  }
};

// ---- counting-search -------------------------------------------------------

class CountingSearchState final : public ProgramState {
 public:
  CountingSearchState(const CountingSearchInfo& info, std::uint64_t horizon)
      : info_(&info), horizon_(horizon), next_(info.from) {}

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved) {
      ++seen_;
      if (seen_ >= info_->required) {
        out.halt = 1;
        return;
      }
    }
    if (info_->explicit_positions.empty()) {
      for (std::uint64_t i = 0; i < kIssueBatch && next_ < horizon_; ++i)
        out.queries.push_back(next_++);
    } else {
      for (std::uint64_t i = 0; i < kIssueBatch && list_at_ < info_->explicit_positions.size(); ++i)
        out.queries.push_back(info_->explicit_positions[list_at_++]);
    }
  }
  bool tick_inert() const override {
    if (info_->explicit_positions.empty()) return next_ >= horizon_;
    return list_at_ >= info_->explicit_positions.size();
  }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<CountingSearchState>(*this);
  }

 private:
  const CountingSearchInfo* info_;
  std::uint64_t horizon_;
  std::uint64_t next_ = 0;
  std::size_t list_at_ = 0;
  std::uint64_t seen_ = 0;
};

class CountingSearchProgram final : public Program {
 public:
  CountingSearchProgram(CountingSearchInfo info, std::uint64_t horizon)
      : info_(std::move(info)), horizon_(horizon) {}

  std::string id() const override {
    std::string s = "counting-search:" + std::to_string(info_.required);
    if (!info_.explicit_positions.empty()) {
      s += ":list:";
      for (std::size_t i = 0; i < info_.explicit_positions.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(info_.explicit_positions[i]);
      }
    } else if (info_.from != 0) {
      s += ":from:" + std::to_string(info_.from);
    }
    if (horizon_ != 1024) s += ":horizon:" + std::to_string(horizon_);
    return s;
  }
  std::unique_ptr<ProgramState> start(std::uint64_t) const override {
    return std::make_unique<CountingSearchState>(info_, horizon_);
  }
  const CountingSearchInfo* counting_info() const override { return &info_; }

 private:
  CountingSearchInfo info_;
  std::uint64_t horizon_;
};

// ---- misc test substrate ---------------------------------------------------

class BitGateState final : public ProgramState {
 public:
  explicit BitGateState(std::uint64_t pos) : pos_(pos) {}
  void on_event(const Event& e, Actions& out) override {
    if (!issued_) {
      issued_ = true;
      out.queries.push_back(pos_);
      return;
    }
    if (e.kind == Event::Kind::resolved && e.position == pos_ && e.bit == 1) out.halt = 1;
    // a 0 answer leaves the program spinning forever
  }
  bool tick_inert() const override { return issued_; }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<BitGateState>(*this);
  }

 private:
  std::uint64_t pos_;
  bool issued_ = false;
};

class BitGateProgram final : public Program {
 public:
  explicit BitGateProgram(std::uint64_t pos) : pos_(pos) {}
  std::string id() const override { return "bit-gate:" + std::to_string(pos_); }
  std::unique_ptr<ProgramState> start(std::uint64_t) const override {
    return std::make_unique<BitGateState>(pos_);
  }

 private:
  std::uint64_t pos_;
};

class AfterState final : public ProgramState {
 public:
  AfterState(std::uint64_t ticks, int bit) : left_(ticks), bit_(bit) {}
  void on_event(const Event&, Actions& out) override {
    if (left_ == 0) {
      out.halt = bit_;
      return;
    }
    --left_;
  }
  std::unique_ptr<ProgramState> clone() const override { return std::make_unique<AfterState>(*this); }

 private:
  std::uint64_t left_;
  int bit_;
};

class AfterProgram final : public Program {
 public:
  AfterProgram(std::uint64_t ticks, int bit) : ticks_(ticks), bit_(bit) {}
  std::string id() const override {
    return "after:" + std::to_string(ticks_) + ":" + std::to_string(bit_);
  }
  std::unique_ptr<ProgramState> start(std::uint64_t) const override {
    return std::make_unique<AfterState>(ticks_, bit_);
  }

 private:
  std::uint64_t ticks_;
  int bit_;
};

class DivergeProgram final : public Program {
 public:
  std::string id() const override { return "diverge"; }
  std::unique_ptr<ProgramState> start(std::uint64_t) const override {
    return std::make_unique<DivergeState>();
  }
};

class HalfProgram final : public Program {
 public:
  explicit HalfProgram(bool odd_side) : odd_(odd_side) {}
  std::string id() const override { return odd_ ? "half-odd" : "half-even"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    if ((input % 2 == 1) != odd_) return std::make_unique<DivergeState>();
    return std::make_unique<OneQueryState>(odd_ ? (input - 1) / 2 : input / 2, 0, 1);
  }

 private:
  bool odd_;
};

// ---- combinators -----------------------------------------------------------

class PatchProgram final : public Program {
 public:
  PatchProgram(Functional inner, std::map<std::uint64_t, int> patch)
      : inner_(std::move(inner)), patch_(std::move(patch)) {}

  std::string id() const override {
    std::string s = "patch(" + inner_.id() + ",{";
    bool first = true;
    for (const auto& [n, b] : patch_) {
      if (!first) s += ",";
      first = false;
      s += std::to_string(n) + ":" + std::to_string(b);
    }
    return s + "})";
  }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    auto it = patch_.find(input);
    if (it != patch_.end()) return std::make_unique<HaltNowState>(it->second);
    return inner_.program().start(input);
  }

 private:
  Functional inner_;
  std::map<std::uint64_t, int> patch_;
};

class FlipOnState final : public ProgramState {
 public:
  FlipOnState(std::unique_ptr<ProgramState> inner, bool flip)
      : inner_(std::move(inner)), flip_(flip) {}
  void on_event(const Event& e, Actions& out) override {
    inner_->on_event(e, out);
    if (out.halt && flip_) out.halt = 1 - *out.halt;
  }
  bool tick_inert() const override { return inner_->tick_inert(); }
  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<FlipOnState>(inner_->clone(), flip_);
  }

 private:
  std::unique_ptr<ProgramState> inner_;
  bool flip_;
};

class FlipOnProgram final : public Program {
 public:
  FlipOnProgram(Functional inner, EventuallyPeriodicSet set)
      : inner_(std::move(inner)), set_(std::move(set)) {}
  std::string id() const override { return "flip-on(" + inner_.id() + "," + set_.to_string() + ")"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<FlipOnState>(inner_.program().start(input), set_.at(input) == 1);
  }

 private:
  Functional inner_;
  EventuallyPeriodicSet set_;
};

// Lockstep interleaving of two programs over the two halves of the oracle.
// Each outer event advances exactly one side by one inner event, alternating
// with the even side first, so "halts first" is well defined.
class RaceState final : public ProgramState {
 public:
  RaceState(std::unique_ptr<ProgramState> even, std::unique_ptr<ProgramState> odd) {
    side_[0].state = std::move(even);
    side_[1].state = std::move(odd);
  }

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved) {
      int s = e.position % 2 == 0 ? 0 : 1;
      side_[s].inbox.push_back({e.position / 2, e.bit});
    }
    Side& active = side_[turn_];
    turn_ = 1 - turn_;
    Event inner_event{Event::Kind::tick, 0, 0};
    if (!active.inbox.empty()) {
      auto [pos, bit] = active.inbox.front();
      active.inbox.pop_front();
      inner_event = Event{Event::Kind::resolved, pos, bit};
    }
    inner_actions_.clear();
    active.state->on_event(inner_event, inner_actions_);
    for (std::uint64_t q : inner_actions_.queries)
      out.queries.push_back(&active == &side_[0] ? 2 * q : 2 * q + 1);
    if (inner_actions_.halt) out.halt = inner_actions_.halt;
  }

  bool tick_inert() const override {
    return side_[0].inbox.empty() && side_[1].inbox.empty() && side_[0].state->tick_inert() &&
           side_[1].state->tick_inert();
  }

  std::unique_ptr<ProgramState> clone() const override {
    auto c = std::make_unique<RaceState>(side_[0].state->clone(), side_[1].state->clone());
    c->side_[0].inbox = side_[0].inbox;
    c->side_[1].inbox = side_[1].inbox;
    c->turn_ = turn_;
    return c;
  }

 private:
  struct Side {
    std::unique_ptr<ProgramState> state;
    std::deque<std::pair<std::uint64_t, int>> inbox;
  };
  Side side_[2];
  int turn_ = 0;
  Actions inner_actions_;
};

class RaceProgram final : public Program {
 public:
  RaceProgram(Functional even, Functional odd) : even_(std::move(even)), odd_(std::move(odd)) {}
  std::string id() const override { return "race(" + even_.id() + "," + odd_.id() + ")"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<RaceState>(even_.program().start(input), odd_.program().start(input));
  }

 private:
  Functional even_, odd_;
};

// Dovetailed search over the embedded copies of the oracle: on input k,
// sub-simulations of the base functional run against columns l = k+1, k+2,
// ... (column l reads outer position 2^p * (2l+1) for inner p), one inner
// event per outer event round-robin, a fresh column joining every other
// event. The first halting column answers.
class ColumnSearchState final : public ProgramState {
 public:
  ColumnSearchState(const Functional& base, std::uint64_t input) : base_(&base), k_(input) {}

  ColumnSearchState(const ColumnSearchState& o)
      : base_(o.base_), k_(o.k_), clock_(o.clock_), rr_(o.rr_) {
    sims_.reserve(o.sims_.size());
    for (const Sim& s : o.sims_) sims_.push_back(Sim{s.state->clone(), s.inbox, s.dead});
  }

  void on_event(const Event& e, Actions& out) override {
    if (e.kind == Event::Kind::resolved && e.position != 0) {
      std::uint64_t p = static_cast<std::uint64_t>(__builtin_ctzll(e.position));
      std::uint64_t l = ((e.position >> p) - 1) / 2;
      if (l > k_ && l - k_ - 1 < sims_.size())
        sims_[l - k_ - 1].inbox.push_back({p, e.bit});
    }
    if (clock_++ % 2 == 0 && sims_.size() < kColumnCap)
      sims_.push_back(Sim{base_->program().start(k_), {}, false});

    std::size_t count = sims_.size();
    for (std::size_t step = 0; step < count; ++step) {
      Sim& sim = sims_[(rr_ + step) % count];
      if (sim.dead || (sim.inbox.empty() && sim.state->tick_inert())) continue;
      std::uint64_t l = k_ + 1 + (rr_ + step) % count;
      rr_ = (rr_ + step + 1) % count;

      Event inner{Event::Kind::tick, 0, 0};
      if (!sim.inbox.empty()) {
        auto [pos, bit] = sim.inbox.front();
        sim.inbox.pop_front();
        inner = Event{Event::Kind::resolved, pos, bit};
      }
      inner_actions_.clear();
      sim.state->on_event(inner, inner_actions_);
      for (std::uint64_t p : inner_actions_.queries) {
        if (p >= 62 || (2 * l + 1) > (kPositionCap >> p)) {
          sim.dead = true;  // out of the addressable range; this copy stalls
          break;
        }
        out.queries.push_back((1ULL << p) * (2 * l + 1));
      }
      if (inner_actions_.halt) out.halt = inner_actions_.halt;
      return;
    }
  }

  bool tick_inert() const override {
    if (sims_.size() < kColumnCap) return false;  // still spawning columns
    for (const Sim& s : sims_)
      if (!s.dead && (!s.inbox.empty() || !s.state->tick_inert())) return false;
    return true;
  }

  std::unique_ptr<ProgramState> clone() const override {
    return std::make_unique<ColumnSearchState>(*this);
  }

 private:
  static constexpr std::size_t kColumnCap = 512;
  struct Sim {
    std::unique_ptr<ProgramState> state;
    std::deque<std::pair<std::uint64_t, int>> inbox;
    bool dead = false;
  };
  const Functional* base_;
  std::uint64_t k_;
  std::vector<Sim> sims_;
  std::uint64_t clock_ = 0;
  std::size_t rr_ = 0;
  Actions inner_actions_;
};

class ColumnSearchProgram final : public Program {
 public:
  explicit ColumnSearchProgram(Functional base) : base_(std::move(base)) {}
  std::string id() const override { return "column-search(" + base_.id() + ")"; }
  std::unique_ptr<ProgramState> start(std::uint64_t input) const override {
    return std::make_unique<ColumnSearchState>(base_, input);
  }

 private:
  Functional base_;
};

// ---- term parsing ----------------------------------------------------------

std::vector<std::string> split_params(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = s.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, colon - start));
    start = colon + 1;
  }
  return parts;
}

std::uint64_t parse_u64(const std::string& s) {
  try {
    return std::stoull(s);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("number expected in functional term: " + s);
  }
}

// Splits "head(args)" combinator syntax; args split on top-level commas.
bool split_call(const std::string& term, std::string& head, std::vector<std::string>& args) {
  std::size_t open = term.find('(');
  if (open == std::string::npos || term.back() != ')') return false;
  head = term.substr(0, open);
  int depth = 0;
  std::size_t start = open + 1;
  for (std::size_t i = open + 1; i + 1 < term.size(); ++i) {
    char c = term[i];
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      args.push_back(term.substr(start, i - start));
      start = i + 1;
    }
  }
  args.push_back(term.substr(start, term.size() - 1 - start));
  return true;
}

std::map<std::uint64_t, int> parse_patch_map(const std::string& text) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    throw std::invalid_argument("patch map must look like {n:b,...}: " + text);
  std::map<std::uint64_t, int> patch;
  std::string body = text.substr(1, text.size() - 2);
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t comma = body.find(',', start);
    std::string item = body.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("patch entry needs n:b: " + item);
    int bit = static_cast<int>(parse_u64(item.substr(colon + 1)));
    if (bit != 0 && bit != 1) throw std::invalid_argument("patch bit must be 0/1");
    patch[parse_u64(item.substr(0, colon))] = bit;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return patch;
}

Functional parse_counting_search(const std::vector<std::string>& parts) {
  if (parts.size() < 2) throw std::invalid_argument("counting-search needs a count");
  CountingSearchInfo info;
  info.required = parse_u64(parts[1]);
  if (info.required == 0) throw std::invalid_argument("counting-search count must be positive");
  std::uint64_t horizon = 1024;
  std::size_t i = 2;
  while (i < parts.size()) {
    if (parts[i] == "from" && i + 1 < parts.size()) {
      info.from = parse_u64(parts[i + 1]);
      i += 2;
    } else if (parts[i] == "list" && i + 1 < parts.size()) {
      std::size_t start = 0;
      const std::string& csv = parts[i + 1];
      while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        info.explicit_positions.push_back(
            parse_u64(csv.substr(start, comma == std::string::npos ? comma : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      std::sort(info.explicit_positions.begin(), info.explicit_positions.end());
      i += 2;
    } else if (parts[i] == "horizon" && i + 1 < parts.size()) {
      horizon = parse_u64(parts[i + 1]);
      i += 2;
    } else {
      throw std::invalid_argument("bad counting-search parameter: " + parts[i]);
    }
  }
  return Functional(std::make_shared<CountingSearchProgram>(std::move(info), horizon));
}

}  // namespace

Functional patch_finite(const Functional& f, const std::map<std::uint64_t, int>& patch) {
  return Functional(std::make_shared<PatchProgram>(f, patch));
}

Functional flip_on_set(const Functional& f, const EventuallyPeriodicSet& flip_set) {
  return Functional(std::make_shared<FlipOnProgram>(f, flip_set));
}

Functional race(const Functional& f, const Functional& g) {
  return Functional(std::make_shared<RaceProgram>(f, g));
}

Functional mf_to_ubfb(const Functional& f);  // transformers.cpp
Functional ubfb_to_cf(const Functional& f);

Functional parse_functional(const std::string& term) {
  if (term.empty()) throw std::invalid_argument("empty functional term");

  std::string head;
  std::vector<std::string> args;
  if (split_call(term, head, args)) {
    if (head == "patch" && args.size() == 2)
      return patch_finite(parse_functional(args[0]), parse_patch_map(args[1]));
    if (head == "flip-on" && args.size() == 2)
      return flip_on_set(parse_functional(args[0]), EventuallyPeriodicSet::parse(args[1]));
    if (head == "race" && args.size() == 2)
      return race(parse_functional(args[0]), parse_functional(args[1]));
    if (head == "column-search" && args.size() == 1)
      return Functional(std::make_shared<ColumnSearchProgram>(parse_functional(args[0])));
    if (head == "mf-to-ubfb" && args.size() == 1) return mf_to_ubfb(parse_functional(args[0]));
    if (head == "ubfb-to-cf" && args.size() == 1) return ubfb_to_cf(parse_functional(args[0]));
    throw std::invalid_argument("unknown functional combinator: " + term);
  }

  std::vector<std::string> parts = split_params(term);
  const std::string& name = parts[0];
  if (name == "identity") return Functional(std::make_shared<ProjProgram>(1, 0, false, "identity"));
  if (name == "bit-flip") return Functional(std::make_shared<ProjProgram>(1, 0, true, "bit-flip"));
  if (name == "proj") {
    if (parts.size() != 3) throw std::invalid_argument("proj needs a and b: " + term);
    return Functional(
        std::make_shared<ProjProgram>(parse_u64(parts[1]), parse_u64(parts[2]), false, term));
  }
  if (name == "xor-pair")
    return Functional(std::make_shared<PairProgram>(PairState::Op::xor_op, "xor-pair"));
  if (name == "and-next")
    return Functional(std::make_shared<PairProgram>(PairState::Op::and_op, "and-next"));
  if (name == "block-search") return Functional(std::make_shared<BlockSearchProgram>());
  if (name == "block-vote") return Functional(std::make_shared<BlockVoteProgram>());
  if (name == "odd-search") return Functional(std::make_shared<OddSearchProgram>());
  if (name == "r-encode") return Functional(std::make_shared<REncodeProgram>());
  if (name == "counting-search") return parse_counting_search(parts);
  if (name == "bit-gate") {
    if (parts.size() != 2) throw std::invalid_argument("bit-gate needs a position: " + term);
    return Functional(std::make_shared<BitGateProgram>(parse_u64(parts[1])));
  }
  if (name == "after") {
    if (parts.size() != 3) throw std::invalid_argument("after needs ticks and bit: " + term);
    return Functional(std::make_shared<AfterProgram>(parse_u64(parts[1]),
                                                     static_cast<int>(parse_u64(parts[2]))));
  }
  if (name == "diverge") return Functional(std::make_shared<DivergeProgram>());
  if (name == "half-even") return Functional(std::make_shared<HalfProgram>(false));
  if (name == "half-odd") return Functional(std::make_shared<HalfProgram>(true));

  throw std::invalid_argument("unknown functional: " + term);
}

}  // namespace olab
