#include "oraclelab/sequences.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "oraclelab/rng.hpp"

namespace olab {

namespace {

std::vector<int> parse_bits(const std::string& text) {
  std::vector<int> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string expected: " + text);
    bits.push_back(c - '0');
  }
  return bits;
}

std::string bits_to_string(std::span<const int> bits) {
  std::string s;
  s.reserve(bits.size());
  for (int b : bits) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace

EventuallyPeriodicSet::EventuallyPeriodicSet(std::vector<int> transient_bits,
                                             std::vector<int> pattern_bits)
    : transient(std::move(transient_bits)), pattern(std::move(pattern_bits)) {
  if (pattern.empty()) throw std::invalid_argument("period must be positive");
  for (int b : transient)
    if (b != 0 && b != 1) throw std::invalid_argument("transient bits must be 0/1");
  for (int b : pattern)
    if (b != 0 && b != 1) throw std::invalid_argument("pattern bits must be 0/1");
}

int EventuallyPeriodicSet::at(std::uint64_t n) const {
  if (n < transient.size()) return transient[n];
  return pattern[(n - transient.size()) % pattern.size()];
}

bool EventuallyPeriodicSet::pattern_empty() const {
  return std::all_of(pattern.begin(), pattern.end(), [](int b) { return b == 0; });
}

bool EventuallyPeriodicSet::is_finite() const { return pattern_empty(); }

Ratio EventuallyPeriodicSet::limit_density() const {
  std::int64_t ones = std::count(pattern.begin(), pattern.end(), 1);
  return Ratio(ones, static_cast<std::int64_t>(pattern.size()));
}

EventuallyPeriodicSet EventuallyPeriodicSet::complement() const {
  EventuallyPeriodicSet out = *this;
  for (int& b : out.transient) b = 1 - b;
  for (int& b : out.pattern) b = 1 - b;
  return out;
}

EventuallyPeriodicSet EventuallyPeriodicSet::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string pattern = colon == std::string::npos ? text : text.substr(0, colon);
  std::string transient = colon == std::string::npos ? "" : text.substr(colon + 1);
  return EventuallyPeriodicSet(parse_bits(transient), parse_bits(pattern));
}

std::string EventuallyPeriodicSet::to_string() const {
  std::string s = bits_to_string(pattern);
  if (!transient.empty()) s += ":" + bits_to_string(transient);
  return s;
}

std::optional<EventuallyPeriodicSet> EventuallyPeriodicSet::detect(std::span<const int> bits,
                                                                   std::uint64_t period_cap,
                                                                   std::uint64_t transient_cap) {
  // Smallest period wins, then smallest transient.
  for (std::uint64_t p = 1; p <= period_cap; ++p) {
    for (std::uint64_t t = 0; t <= transient_cap; ++t) {
      if (t + p > bits.size()) break;
      bool ok = true;
      for (std::uint64_t n = t; n + p < bits.size(); ++n) {
        if (bits[n] != bits[n + p]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        std::vector<int> transient(bits.begin(), bits.begin() + t);
        std::vector<int> pattern(bits.begin() + t, bits.begin() + t + p);
        return EventuallyPeriodicSet(std::move(transient), std::move(pattern));
      }
    }
  }
  return std::nullopt;
}

BitSequence BitSequence::make(std::string descriptor, std::function<int(std::uint64_t)> rule,
                              bool memoize) {
  auto impl = std::make_shared<Impl>();
  impl->descriptor = std::move(descriptor);
  impl->rule = std::move(rule);
  impl->memoize = memoize;
  return BitSequence(std::move(impl));
}

int BitSequence::at(std::uint64_t pos) const {
  if (!impl_->memoize) return impl_->rule(pos);
  {
    std::lock_guard<std::mutex> g(impl_->lock);
    auto it = impl_->memo.find(pos);
    if (it != impl_->memo.end()) return it->second;
  }
  int bit = impl_->rule(pos);
  std::lock_guard<std::mutex> g(impl_->lock);
  impl_->memo.emplace(pos, bit);  // idempotent: the rule is deterministic
  return bit;
}

std::string BitSequence::prefix_string(std::size_t n) const {
  std::string s;
  s.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.push_back(at(i) ? '1' : '0');
  return s;
}

std::uint64_t BitSequence::popcount_below(std::uint64_t n) const {
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < n; ++i) count += at(i);
  return count;
}

nlohmann::json BitSequence::to_json() const {
  // descriptor = the kind tag, parameters = the full canonical term, which
  // parse() accepts back verbatim
  const std::string& term = descriptor();
  std::string tag = term.substr(0, term.find_first_of(":("));
  return nlohmann::json{
      {"descriptor", tag}, {"parameters", term}, {"prefix", prefix_string(64)}};
}

BitSequence BitSequence::zeros() {
  return make("zeros", [](std::uint64_t) { return 0; }, false);
}

BitSequence BitSequence::ones() {
  return make("ones", [](std::uint64_t) { return 1; }, false);
}

BitSequence BitSequence::alternating() {
  return make("alternating", [](std::uint64_t n) { return n % 2 == 0 ? 1 : 0; }, false);
}

BitSequence BitSequence::from_prefix(std::vector<int> bits, int default_bit) {
  std::string desc = "prefix:" + bits_to_string(bits);
  if (default_bit != 0) desc += ":" + std::to_string(default_bit);
  auto shared = std::make_shared<std::vector<int>>(std::move(bits));
  return make(
      desc,
      [shared, default_bit](std::uint64_t n) {
        return n < shared->size() ? (*shared)[n] : default_bit;
      },
      false);
}

BitSequence BitSequence::periodic(const EventuallyPeriodicSet& set) {
  return make("periodic:" + set.to_string(), [set](std::uint64_t n) { return set.at(n); }, false);
}

BitSequence BitSequence::random_prefix(std::uint64_t seed, std::size_t length) {
  SplitMix64 gen(seed);
  std::vector<int> bits(length);
  for (auto& b : bits) b = static_cast<int>(gen.next() & 1);
  auto shared = std::make_shared<std::vector<int>>(std::move(bits));
  std::string desc = "random:" + std::to_string(seed);
  if (length != 64) desc += ":" + std::to_string(length);
  return make(
      desc, [shared](std::uint64_t n) { return n < shared->size() ? (*shared)[n] : 0; }, false);
}

BitSequence BitSequence::derived(std::string descriptor, std::function<int(std::uint64_t)> rule,
                                 bool memoize) {
  return make(std::move(descriptor), std::move(rule), memoize);
}

Ratio density_at(const BitSequence& seq, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("density_at requires n >= 1");
  return Ratio(static_cast<std::int64_t>(seq.popcount_below(n)), static_cast<std::int64_t>(n));
}

DensityProfile tail_density_window(const BitSequence& seq, std::uint64_t from, std::uint64_t to) {
  if (from < 1 || from >= to) throw std::invalid_argument("density window must satisfy 1 <= from < to");
  DensityProfile profile;
  profile.from = from;
  profile.to = to;
  std::uint64_t ones = seq.popcount_below(from);
  for (std::uint64_t n = from; n < to; ++n) {
    // incremental popcount: entry at n uses exactly the first n bits
    profile.values.emplace_back(static_cast<std::int64_t>(ones), static_cast<std::int64_t>(n));
    ones += seq.at(n);
  }
  profile.min_value = *std::min_element(profile.values.begin(), profile.values.end());
  profile.max_value = *std::max_element(profile.values.begin(), profile.values.end());
  return profile;
}

std::vector<std::pair<std::uint64_t, Ratio>> block_density_profile(const BitSequence& seq,
                                                                   std::uint64_t jmin,
                                                                   std::uint64_t jmax) {
  std::vector<std::pair<std::uint64_t, Ratio>> out;
  for (std::uint64_t j = jmin; j <= jmax; ++j) {
    std::uint64_t lo = 1ULL << j;
    std::uint64_t ones = 0;
    for (std::uint64_t p = lo; p < lo * 2; ++p) ones += seq.at(p);
    out.emplace_back(j, Ratio(static_cast<std::int64_t>(ones), static_cast<std::int64_t>(lo)));
  }
  return out;
}

std::vector<std::uint64_t> symmetric_difference_view(const BitSequence& a, const BitSequence& b,
                                                     std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> diff;
  for (std::uint64_t n = lo; n < hi; ++n) {
    if (a.at(n) != b.at(n)) diff.push_back(n);
  }
  return diff;
}

nlohmann::json DensityProfile::to_json() const {
  nlohmann::json values_json = nlohmann::json::array();
  for (const auto& v : values) values_json.push_back(to_string(v));
  return nlohmann::json{{"from", from},
                        {"to", to},
                        {"values", values_json},
                        {"min", to_string(min_value)},
                        {"max", to_string(max_value)}};
}

}  // namespace olab
