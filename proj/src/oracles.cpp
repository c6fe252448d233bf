#include "oraclelab/oracles.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "oraclelab/rng.hpp"

namespace olab {

namespace {

// Dyadic block of a position >= 1: index j with 2^j <= pos < 2^{j+1}.
std::uint64_t block_index(std::uint64_t pos) {
  return 63 - static_cast<std::uint64_t>(__builtin_clzll(pos));
}

// Deterministic k-of-L selection: partial Fisher-Yates over [0, L) driven by
// one splitmix64 stream (j = i + next() mod (L - i)). Documented in the
// README so ports can reproduce masks bit-exactly.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t k, std::uint64_t L,
                                                      std::uint64_t seed) {
  std::vector<std::uint64_t> idx(L);
  for (std::uint64_t i = 0; i < L; ++i) idx[i] = i;
  SplitMix64 gen(seed);
  for (std::uint64_t i = 0; i < k && i < L; ++i) {
    std::uint64_t j = i + gen.below(L - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(k, L));
  return idx;
}

// Lazily built per-block membership masks shared by a corruption view.
class BlockMaskCache {
 public:
  BlockMaskCache(Ratio fraction, std::string placement, std::uint64_t seed,
                 std::set<std::uint64_t> blocks)
      : fraction_(fraction), placement_(std::move(placement)), seed_(seed),
        blocks_(std::move(blocks)) {}

  // Membership of `pos` in the mask of its block.
  bool contains(std::uint64_t pos) const {
    if (pos == 0) return false;
    std::uint64_t j = block_index(pos);
    if (!blocks_.empty() && !blocks_.count(j)) return false;
    const std::vector<bool>& mask = block_mask(j);
    return mask[pos - (1ULL << j)];
  }

  std::uint64_t count_in_block(std::uint64_t j) const {
    std::uint64_t size = 1ULL << j;
    return static_cast<std::uint64_t>((fraction_.numerator() * static_cast<std::int64_t>(size)) /
                                      fraction_.denominator());
  }

 private:
  const std::vector<bool>& block_mask(std::uint64_t j) const {
    std::lock_guard<std::mutex> g(lock_);
    auto it = masks_.find(j);
    if (it != masks_.end()) return it->second;
    std::uint64_t size = 1ULL << j;
    std::uint64_t count = count_in_block(j);
    std::vector<bool> mask(size, false);
    if (placement_ == "leading") {
      for (std::uint64_t m = 0; m < count; ++m) mask[m] = true;
    } else {
      for (std::uint64_t m : sample_without_replacement(count, size, SplitMix64::derive(seed_, j)))
        mask[m] = true;
    }
    return masks_.emplace(j, std::move(mask)).first->second;
  }

  Ratio fraction_;
  std::string placement_;
  std::uint64_t seed_;
  std::set<std::uint64_t> blocks_;
  mutable std::mutex lock_;
  mutable std::unordered_map<std::uint64_t, std::vector<bool>> masks_;
};

std::vector<std::uint64_t> positions_param(const nlohmann::json& params, const char* key) {
  std::vector<std::uint64_t> out = params.at(key).get<std::vector<std::uint64_t>>();
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

const std::string& PartialOracle::domain_descriptor() const {
  static const std::string kEmpty = "empty";
  return impl_ ? impl_->domain_descriptor : kEmpty;
}

PartialOracle PartialOracle::total(BitSequence seq) {
  auto impl = std::make_shared<Impl>();
  impl->domain_descriptor = "total";
  impl->lookup = [seq](std::uint64_t pos) -> std::optional<OracleEntry> {
    return OracleEntry{seq.at(pos), 0};
  };
  PartialOracle o;
  o.impl_ = std::move(impl);
  return o;
}

PartialOracle PartialOracle::from_map(std::map<std::uint64_t, OracleEntry> entries) {
  auto shared = std::make_shared<std::map<std::uint64_t, OracleEntry>>(std::move(entries));
  auto impl = std::make_shared<Impl>();
  impl->domain_descriptor = "finite-support";
  impl->lookup = [shared](std::uint64_t pos) -> std::optional<OracleEntry> {
    auto it = shared->find(pos);
    if (it == shared->end()) return std::nullopt;
    return it->second;
  };
  PartialOracle o;
  o.impl_ = std::move(impl);
  return o;
}

PartialOracle PartialOracle::view(
    BitSequence seq, std::function<std::optional<std::uint64_t>(std::uint64_t)> defined_delay,
    std::string domain_descriptor) {
  auto impl = std::make_shared<Impl>();
  impl->domain_descriptor = std::move(domain_descriptor);
  impl->lookup = [seq, defined_delay](std::uint64_t pos) -> std::optional<OracleEntry> {
    auto delay = defined_delay(pos);
    if (!delay) return std::nullopt;
    return OracleEntry{seq.at(pos), *delay};
  };
  PartialOracle o;
  o.impl_ = std::move(impl);
  return o;
}

PartialOracle PartialOracle::derived(
    std::function<std::optional<OracleEntry>(std::uint64_t)> lookup, std::string domain_descriptor) {
  auto impl = std::make_shared<Impl>();
  impl->domain_descriptor = std::move(domain_descriptor);
  impl->lookup = std::move(lookup);
  PartialOracle o;
  o.impl_ = std::move(impl);
  return o;
}

QueryResult oracle_query(const PartialOracle& oracle, std::uint64_t pos,
                         std::uint64_t ticks_available) {
  auto e = oracle.entry(pos);
  if (!e || e->delay > ticks_available) return QueryResult::pending;
  return e->bit ? QueryResult::resolved1 : QueryResult::resolved0;
}

bool CorruptionSpec::value_corrupting() const {
  return kind == "finite-error" || kind == "density-error" ||
         kind == "eventually-periodic-difference";
}

bool CorruptionSpec::domain_restricting() const {
  return kind == "finite-drop" || kind == "cofinite-domain" || kind == "density1-domain" ||
         kind == "infinite-sparse-domain";
}

nlohmann::json CorruptionSpec::to_json() const {
  return nlohmann::json{{"kind", kind}, {"parameters", parameters}, {"seed", seed}};
}

CorruptionSpec CorruptionSpec::from_json(const nlohmann::json& j) {
  CorruptionSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.parameters = j.value("parameters", nlohmann::json::object());
  spec.seed = j.value("seed", 0ULL);
  return spec;
}

CorruptionSpec CorruptionSpec::finite_error(std::vector<std::uint64_t> positions) {
  return CorruptionSpec{"finite-error", {{"positions", positions}}, 0};
}

CorruptionSpec CorruptionSpec::finite_drop(std::vector<std::uint64_t> positions) {
  return CorruptionSpec{"finite-drop", {{"positions", positions}}, 0};
}

CorruptionSpec CorruptionSpec::cofinite_domain(std::vector<std::uint64_t> dropped) {
  return CorruptionSpec{"cofinite-domain", {{"dropped", dropped}}, 0};
}

CorruptionSpec CorruptionSpec::density1_domain(Ratio keep, std::uint64_t from, std::uint64_t seed) {
  return CorruptionSpec{"density1-domain", {{"keep", to_string(keep)}, {"from", from}}, seed};
}

CorruptionSpec CorruptionSpec::density_error(Ratio fraction, std::string placement,
                                             std::uint64_t seed, std::vector<std::uint64_t> blocks) {
  nlohmann::json params{{"fraction", to_string(fraction)}, {"placement", placement}};
  if (!blocks.empty()) params["blocks"] = blocks;
  return CorruptionSpec{"density-error", params, seed};
}

CorruptionSpec CorruptionSpec::periodic_difference(const EventuallyPeriodicSet& set) {
  return CorruptionSpec{"eventually-periodic-difference", {{"set", set.to_string()}}, 0};
}

CorruptionSpec CorruptionSpec::sparse_domain(std::vector<std::uint64_t> positions) {
  return CorruptionSpec{"infinite-sparse-domain", {{"positions", positions}}, 0};
}

CorruptionSpec CorruptionSpec::delay_profile(std::string rule_kind, std::uint64_t a,
                                             std::uint64_t b) {
  return CorruptionSpec{
      "delay-profile", {{"rule", {{"kind", rule_kind}, {"a", a}, {"b", b}}}}, 0};
}

CorruptedOracle oracle_for(const BitSequence& seq, const CorruptionSpec& spec) {
  const std::string& kind = spec.kind;

  if (kind == "finite-error") {
    auto flips = std::make_shared<std::unordered_set<std::uint64_t>>();
    for (std::uint64_t p : positions_param(spec.parameters, "positions")) flips->insert(p);
    std::string desc = "finite-error(" + seq.descriptor() + ")";
    return BitSequence::derived(
        desc,
        [seq, flips](std::uint64_t n) { return flips->count(n) ? 1 - seq.at(n) : seq.at(n); },
        false);
  }

  if (kind == "finite-drop" || kind == "cofinite-domain") {
    const char* key = kind == "finite-drop" ? "positions" : "dropped";
    auto dropped = std::make_shared<std::unordered_set<std::uint64_t>>();
    for (std::uint64_t p : positions_param(spec.parameters, key)) dropped->insert(p);
    return PartialOracle::view(
        seq,
        [dropped](std::uint64_t pos) -> std::optional<std::uint64_t> {
          if (dropped->count(pos)) return std::nullopt;
          return 0;
        },
        "cofinite-minus-" + std::to_string(dropped->size()));
  }

  if (kind == "density1-domain") {
    Ratio keep = parse_ratio(spec.parameters.at("keep").get<std::string>());
    if (keep <= Ratio(0) || keep > Ratio(1))
      throw std::invalid_argument("density1-domain keep fraction must lie in (0,1]");
    std::uint64_t from = spec.parameters.value("from", 0ULL);
    auto cache = std::make_shared<BlockMaskCache>(keep, "random", spec.seed,
                                                  std::set<std::uint64_t>{});
    return PartialOracle::view(
        seq,
        [cache, from](std::uint64_t pos) -> std::optional<std::uint64_t> {
          if (pos < from || pos == 0) return std::nullopt;
          if (cache->contains(pos)) return 0;
          return std::nullopt;
        },
        "density1-domain");
  }

  if (kind == "density-error") {
    Ratio fraction = parse_ratio(spec.parameters.at("fraction").get<std::string>());
    if (fraction < Ratio(0) || fraction > Ratio(1))
      throw std::invalid_argument("density-error fraction must lie in [0,1]");
    std::string placement = spec.parameters.value("placement", "random");
    std::set<std::uint64_t> blocks;
    if (spec.parameters.contains("blocks"))
      for (std::uint64_t j : spec.parameters.at("blocks").get<std::vector<std::uint64_t>>())
        blocks.insert(j);
    auto cache = std::make_shared<BlockMaskCache>(fraction, placement, spec.seed, blocks);
    std::string desc = "density-error(" + seq.descriptor() + ")";
    return BitSequence::derived(
        desc,
        [seq, cache](std::uint64_t n) { return cache->contains(n) ? 1 - seq.at(n) : seq.at(n); },
        false);
  }

  if (kind == "eventually-periodic-difference") {
    EventuallyPeriodicSet set =
        EventuallyPeriodicSet::parse(spec.parameters.at("set").get<std::string>());
    std::string desc = "ep-difference:" + set.to_string() + "(" + seq.descriptor() + ")";
    return BitSequence::derived(
        desc, [seq, set](std::uint64_t n) { return set.at(n) ? 1 - seq.at(n) : seq.at(n); },
        false);
  }

  if (kind == "infinite-sparse-domain") {
    auto domain = std::make_shared<std::unordered_set<std::uint64_t>>();
    for (std::uint64_t p : positions_param(spec.parameters, "positions")) domain->insert(p);
    return PartialOracle::view(
        seq,
        [domain](std::uint64_t pos) -> std::optional<std::uint64_t> {
          if (domain->count(pos)) return 0;
          return std::nullopt;
        },
        "sparse-" + std::to_string(domain->size()));
  }

  if (kind == "delay-profile") {
    const auto& rule = spec.parameters.at("rule");
    std::string rule_kind = rule.at("kind").get<std::string>();
    std::uint64_t a = rule.value("a", 0ULL);
    std::uint64_t b = rule.value("b", 0ULL);
    if (rule_kind != "constant" && rule_kind != "linear")
      throw std::invalid_argument("unknown delay rule: " + rule_kind);
    bool linear = rule_kind == "linear";
    return PartialOracle::view(
        seq,
        [a, b, linear](std::uint64_t pos) -> std::optional<std::uint64_t> {
          return linear ? a * pos + b : b;
        },
        "total-delayed");
  }

  throw std::invalid_argument("unknown corruption kind: " + kind);
}

PartialOracle as_oracle(const CorruptedOracle& view) {
  if (std::holds_alternative<BitSequence>(view))
    return PartialOracle::total(std::get<BitSequence>(view));
  return std::get<PartialOracle>(view);
}

bool is_total(const CorruptedOracle& view) { return std::holds_alternative<BitSequence>(view); }

const BitSequence& total_view(const CorruptedOracle& view) {
  if (!is_total(view)) throw std::invalid_argument("corruption is domain-restricting, not total");
  return std::get<BitSequence>(view);
}

}  // namespace olab
