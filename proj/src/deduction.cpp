#include "oraclelab/deduction.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace olab {

namespace {

constexpr std::uint64_t kCubeBoundCap = 8;  // 3^8 assignments is the enumeration limit

// Enumerates every partial oracle with domain inside [0, bound).
std::vector<FinitePartialOracle> enumerate_cube(std::uint64_t bound) {
  std::vector<FinitePartialOracle> out;
  out.push_back({});
  for (std::uint64_t pos = 0; pos < bound; ++pos) {
    std::size_t count = out.size();
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(out[i].extended(pos, 0));
      out.push_back(out[i].extended(pos, 1));
    }
  }
  return out;
}

// Lazy evaluation of closure stages. can_deduce(sigma, n, i, r) decides
// membership of the fact in the r-th iterate: direct convergence, or at
// least t one-extensions (scanned in position order with early exit) in the
// (r-1)-th iterate. Memoized across the iterative deepening, with a global
// cap on machine runs as a safety valve.
class ThresholdEngine {
 public:
  ThresholdEngine(const Functional& f, const DeductionMode& mode) : f_(f), mode_(mode) {}

  std::optional<int> direct(const FinitePartialOracle& sigma, std::uint64_t n) {
    std::string key = sigma.id() + "#" + std::to_string(n);
    auto it = direct_memo_.find(key);
    if (it != direct_memo_.end()) return it->second;
    if (++runs_ > kRunCap)
      throw std::runtime_error("deduction engine exceeded its machine-run budget");
    RunOutcome outcome = run(f_, sigma.as_oracle(), n, mode_.budget, /*record_trace=*/false);
    std::optional<int> value;
    if (outcome.halted()) value = outcome.output;
    direct_memo_.emplace(std::move(key), value);
    return value;
  }

  // Minimal closure stage of the fact, capped at max_rank.
  std::optional<std::uint64_t> rank(const FinitePartialOracle& sigma, std::uint64_t n, int i) {
    for (std::uint64_t r = 0; r <= mode_.max_rank; ++r)
      if (can_deduce(sigma, n, i, r)) return r;
    return std::nullopt;
  }

  // Output values observed along cheap probe chains; rank searches are run
  // only for witnessed values, which keeps the engine from exploring the
  // (exponential) certificate that a value is *not* deducible. Each chain
  // stops at its first convergence.
  std::vector<int> witnessed_values(const FinitePartialOracle& sigma, std::uint64_t n) {
    bool seen[2] = {false, false};
    if (auto v = direct(sigma, n)) seen[*v] = true;
    for (int chain_bit : {1, 0}) {
      FinitePartialOracle tau = sigma;
      for (std::uint64_t step = 0; step < kProbeChainLength; ++step) {
        std::optional<std::uint64_t> q = first_undefined(tau);
        if (!q) break;
        tau = tau.extended(*q, chain_bit);
        if (auto v = direct(tau, n)) {
          seen[*v] = true;
          break;
        }
      }
      if (seen[0] && seen[1]) break;
    }
    std::vector<int> values;
    if (seen[0]) values.push_back(0);
    if (seen[1]) values.push_back(1);
    return values;
  }

 private:
  static constexpr std::uint64_t kProbeChainLength = 64;
  static constexpr std::uint64_t kRunCap = 1ULL << 22;

  std::optional<std::uint64_t> first_undefined(const FinitePartialOracle& sigma) const {
    for (std::uint64_t q = 0; q < mode_.position_bound; ++q)
      if (!sigma.assignments.count(q)) return q;
    return std::nullopt;
  }

  bool can_deduce(const FinitePartialOracle& sigma, std::uint64_t n, int i, std::uint64_t r) {
    std::string key = sigma.id() + "#" + std::to_string(n) + "#" + std::to_string(i) + "#" +
                      std::to_string(r);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    bool result = false;
    if (auto v = direct(sigma, n); v && *v == i) {
      result = true;
    } else if (r > 0) {
      std::uint64_t cap = mode_.scan_cap ? mode_.scan_cap : 2 * mode_.position_bound;
      std::uint64_t found = 0, tried = 0;
      for (std::uint64_t q = 0; q < mode_.position_bound && found < mode_.t && tried < cap; ++q) {
        if (sigma.assignments.count(q)) continue;
        for (int b = 0; b <= 1 && found < mode_.t && tried < cap; ++b) {
          ++tried;
          if (can_deduce(sigma.extended(q, b), n, i, r - 1)) ++found;
        }
      }
      result = found >= mode_.t;
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

  const Functional& f_;
  const DeductionMode& mode_;
  std::unordered_map<std::string, std::optional<int>> direct_memo_;
  std::unordered_map<std::string, bool> memo_;
  std::uint64_t runs_ = 0;
};

std::uint64_t relevant_defined(const FinitePartialOracle& sigma, const CountingSearchInfo& info) {
  std::uint64_t d = 0;
  for (const auto& [pos, bit] : sigma.assignments) {
    (void)bit;
    if (info.is_relevant(pos)) ++d;
  }
  return d;
}

}  // namespace

std::string FinitePartialOracle::id() const {
  if (assignments.empty()) return "e";
  std::string s;
  for (const auto& [pos, bit] : assignments) {
    if (!s.empty()) s += ",";
    s += std::to_string(pos) + ":" + std::to_string(bit);
  }
  return s;
}

FinitePartialOracle FinitePartialOracle::parse(const std::string& id) {
  FinitePartialOracle sigma;
  if (id == "e" || id.empty()) return sigma;
  std::size_t start = 0;
  while (start <= id.size()) {
    std::size_t comma = id.find(',', start);
    std::string item = id.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("malformed finite oracle id: " + id);
    sigma.assignments[std::stoull(item.substr(0, colon))] =
        std::stoi(item.substr(colon + 1)) ? 1 : 0;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return sigma;
}

PartialOracle FinitePartialOracle::as_oracle() const {
  std::map<std::uint64_t, OracleEntry> entries;
  for (const auto& [pos, bit] : assignments) entries[pos] = OracleEntry{bit, 0};
  return PartialOracle::from_map(std::move(entries));
}

FinitePartialOracle FinitePartialOracle::extended(std::uint64_t pos, int bit) const {
  if (assignments.count(pos)) throw std::invalid_argument("extension must add a fresh position");
  FinitePartialOracle out = *this;
  out.assignments[pos] = bit;
  return out;
}

DeductionMode DeductionMode::threshold(std::uint64_t t, std::uint64_t p, std::uint64_t budget,
                                       std::uint64_t max_rank) {
  DeductionMode m;
  m.kind = Kind::threshold;
  m.t = t;
  m.position_bound = p;
  m.budget = budget;
  m.max_rank = max_rank;
  return m;
}

DeductionMode DeductionMode::exact_counting(std::uint64_t budget) {
  DeductionMode m;
  m.kind = Kind::exact_counting;
  m.budget = budget;
  return m;
}

nlohmann::json DeductionMode::to_json() const {
  if (kind == Kind::exact_counting)
    return nlohmann::json{{"mode", "exact-counting"}, {"budget", budget}};
  return nlohmann::json{{"mode", "threshold"},
                        {"t", t},
                        {"positionBound", position_bound},
                        {"budget", budget},
                        {"maxRank", max_rank},
                        {"scanCap", scan_cap}};
}

FactSet gamma_step(const Functional& f, const FactSet& x, const DeductionMode& mode,
                   const std::vector<std::uint64_t>& inputs) {
  if (mode.position_bound > kCubeBoundCap)
    throw std::invalid_argument(
        "gamma_step enumerates all oracles below the position bound; bounds above " +
        std::to_string(kCubeBoundCap) + " need deduction_closure");

  FactSet out = x;
  std::vector<FinitePartialOracle> cube = enumerate_cube(mode.position_bound);

  const CountingSearchInfo* info = f.program().counting_info();
  if (mode.kind == DeductionMode::Kind::exact_counting && !info)
    throw std::invalid_argument("exact-counting mode needs a counting-search functional");

  for (const FinitePartialOracle& sigma : cube) {
    for (std::uint64_t n : inputs) {
      RunOutcome outcome = run(f, sigma.as_oracle(), n, mode.budget);
      if (outcome.halted()) out.insert(Fact{sigma, n, outcome.output});

      for (int i = 0; i <= 1; ++i) {
        if (out.count(Fact{sigma, n, i})) continue;
        if (mode.kind == DeductionMode::Kind::threshold) {
          std::uint64_t found = 0;
          for (std::uint64_t q = 0; q < mode.position_bound && found < mode.t; ++q) {
            if (sigma.assignments.count(q)) continue;
            for (int b = 0; b <= 1; ++b)
              if (x.count(Fact{sigma.extended(q, b), n, i})) ++found;
          }
          if (found >= mode.t) out.insert(Fact{sigma, n, i});
        } else {
          // The single infinite extension class: all positions beyond the
          // finite transient behave alike, so one representative decides the
          // clause. Finite relevant sets have no infinite class.
          if (!info->relevant_infinite()) continue;
          std::optional<std::uint64_t> rep;
          for (std::uint64_t q = 0; q < mode.position_bound; ++q)
            if (!sigma.assignments.count(q) && info->is_relevant(q)) {
              rep = q;
              break;
            }
          if (rep && x.count(Fact{sigma.extended(*rep, 0), n, i}) &&
              x.count(Fact{sigma.extended(*rep, 1), n, i}))
            out.insert(Fact{sigma, n, i});
        }
      }
    }
  }
  return out;
}

std::map<std::uint64_t, std::uint64_t> DeductionTable::rank_histogram() const {
  std::map<std::uint64_t, std::uint64_t> hist;
  for (const auto& [key, entry] : entries) ++hist[entry.rank];
  return hist;
}

nlohmann::json DeductionTable::to_json() const {
  nlohmann::json entries_json = nlohmann::json::array();
  for (const auto& [key, entry] : entries)
    entries_json.push_back(nlohmann::json{{"sigma", key.first},
                                          {"input", key.second},
                                          {"value", entry.value},
                                          {"rank", entry.rank}});
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [rank, count] : rank_histogram()) hist[std::to_string(rank)] = count;
  return nlohmann::json{{"entries", entries_json},
                        {"mode", mode.to_json()},
                        {"closed", closed},
                        {"rankHistogram", hist}};
}

DeductionTable deduction_closure(const Functional& f, const std::vector<std::uint64_t>& inputs,
                                 const DeductionMode& mode,
                                 const std::vector<FinitePartialOracle>& sigmas) {
  DeductionTable table;
  table.mode = mode;

  if (mode.kind == DeductionMode::Kind::exact_counting) {
    const CountingSearchInfo* info = f.program().counting_info();
    if (!info) throw std::invalid_argument("exact-counting mode needs a counting-search functional");
    for (const FinitePartialOracle& sigma : sigmas) {
      std::uint64_t d = relevant_defined(sigma, *info);
      for (std::uint64_t n : inputs) {
        if (d >= info->required) {
          RunOutcome outcome = run(f, sigma.as_oracle(), n, mode.budget);
          if (outcome.halted())
            table.entries[{sigma.id(), n}] = DeductionEntry{outcome.output, 0};
          continue;
        }
        auto rank = exact_rank_counting(info->required, d, info->relevant_infinite());
        if (rank) table.entries[{sigma.id(), n}] = DeductionEntry{1, *rank};
      }
    }
    table.closed = true;
    return table;
  }

  ThresholdEngine engine(f, mode);
  for (const FinitePartialOracle& sigma : sigmas) {
    for (std::uint64_t n : inputs) {
      std::optional<DeductionEntry> best;
      for (int i : engine.witnessed_values(sigma, n)) {
        auto r = engine.rank(sigma, n, i);
        if (r && (!best || *r < best->rank)) best = DeductionEntry{i, *r};
      }
      if (best) table.entries[{sigma.id(), n}] = *best;
    }
  }
  table.closed = true;
  return table;
}

DeductionTable deduction_closure(const Functional& f, const std::vector<std::uint64_t>& inputs,
                                 const DeductionMode& mode) {
  DeductionTable table;
  table.mode = mode;
  FactSet x;
  for (std::uint64_t stage = 0;; ++stage) {
    FactSet next = gamma_step(f, x, mode, inputs);
    for (const Fact& fact : next) {
      if (x.count(fact)) continue;
      auto key = std::pair(fact.sigma.id(), fact.input);
      auto it = table.entries.find(key);
      if (it == table.entries.end() || stage < it->second.rank ||
          (stage == it->second.rank && fact.value < it->second.value))
        table.entries[key] = DeductionEntry{fact.value, stage};
    }
    if (next == x) break;
    x = std::move(next);
  }
  table.closed = true;
  return table;
}

std::optional<std::uint64_t> exact_rank_counting(std::uint64_t c, std::uint64_t d,
                                                 bool relevant_infinite) {
  if (c == 0) throw std::invalid_argument("counting-search requires a positive count");
  if (d >= c) return 0;
  if (!relevant_infinite) return std::nullopt;
  return c - d;
}

}  // namespace olab
