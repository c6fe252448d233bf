#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "oraclelab/rational.hpp"

namespace olab {

// A set that is explicitly periodic after a finite transient. This is the
// project's stand-in for "decidable set": it is closed under complement and
// finite modification, and membership in it can be recognized from a finite
// window.
struct EventuallyPeriodicSet {
  std::vector<int> transient;
  std::vector<int> pattern;  // period = pattern.size(), always >= 1

  EventuallyPeriodicSet() : pattern{0} {}
  EventuallyPeriodicSet(std::vector<int> transient_bits, std::vector<int> pattern_bits);

  int at(std::uint64_t n) const;
  std::uint64_t period() const { return pattern.size(); }
  bool pattern_empty() const;           // no 1s anywhere beyond the transient
  bool is_finite() const;               // only finitely many members
  Ratio limit_density() const;          // ones-in-pattern / period
  EventuallyPeriodicSet complement() const;

  // "pattern[:transient]" with 0/1 strings, e.g. "10" = evens, "01:1" =
  // odds with position 0 forced in.
  static EventuallyPeriodicSet parse(const std::string& text);
  std::string to_string() const;

  // Brute-force recognition over a finite window: smallest period first,
  // then smallest transient. Returns the matched description rebuilt from
  // the window bits.
  static std::optional<EventuallyPeriodicSet> detect(std::span<const int> bits,
                                                     std::uint64_t period_cap,
                                                     std::uint64_t transient_cap);
};

// A total 0/1 sequence given intensionally: a deterministic rule plus a memo.
// Values are immutable; the memo fill is idempotent and mutex-protected so
// instances can be shared across concurrent checker runs.
class BitSequence {
 public:
  BitSequence() : BitSequence(zeros()) {}

  int at(std::uint64_t pos) const;
  const std::string& descriptor() const { return impl_->descriptor; }
  std::string prefix_string(std::size_t n = 64) const;
  std::uint64_t popcount_below(std::uint64_t n) const;

  nlohmann::json to_json() const;  // {descriptor, parameters, prefix}

  static BitSequence zeros();
  static BitSequence ones();
  static BitSequence alternating();
  static BitSequence from_prefix(std::vector<int> bits, int default_bit = 0);
  static BitSequence periodic(const EventuallyPeriodicSet& set);
  static BitSequence random_prefix(std::uint64_t seed, std::size_t length = 64);
  // Derived view with an arbitrary rule; memoized. Positions touched by the
  // rule must be finite for every evaluation.
  static BitSequence derived(std::string descriptor, std::function<int(std::uint64_t)> rule,
                             bool memoize = true);

  // Descriptor grammar (see README): zeros | ones | alternating |
  // periodic:<pattern>[:<transient>] | prefix:<bits>[:<default>] |
  // random:<seed>[:<len>] | complement(<d>) | flipat:<p,...>(<d>) |
  // join(<d>,<d>) | r(<d>) | rtilde(<d>) | column:<k>(<d>) |
  // apply:<functional-term>(<d>).
  static BitSequence parse(const std::string& descriptor);

 private:
  struct Impl {
    std::string descriptor;
    std::function<int(std::uint64_t)> rule;
    bool memoize = false;
    mutable std::mutex lock;
    mutable std::map<std::uint64_t, int> memo;
  };
  explicit BitSequence(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  static BitSequence make(std::string descriptor, std::function<int(std::uint64_t)> rule,
                          bool memoize);

  std::shared_ptr<Impl> impl_;
};

// Exact initial-segment densities |A cap n| / n for n in [from, to).
struct DensityProfile {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  std::vector<Ratio> values;
  Ratio min_value{0};
  Ratio max_value{0};

  nlohmann::json to_json() const;
};

Ratio density_at(const BitSequence& seq, std::uint64_t n);
DensityProfile tail_density_window(const BitSequence& seq, std::uint64_t from, std::uint64_t to);

// Defined-fraction of each dyadic block [2^j, 2^{j+1}) intersecting
// [2^jmin, 2^{jmax+1}); the block-relative alternative to prefix densities.
std::vector<std::pair<std::uint64_t, Ratio>> block_density_profile(const BitSequence& seq,
                                                                   std::uint64_t jmin,
                                                                   std::uint64_t jmax);

std::vector<std::uint64_t> symmetric_difference_view(const BitSequence& a, const BitSequence& b,
                                                     std::uint64_t lo, std::uint64_t hi);

}  // namespace olab
