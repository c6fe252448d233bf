// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the process exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "oraclelab/checkers.hpp"
#include "oraclelab/codings.hpp"
#include "oraclelab/deduction.hpp"
#include "oraclelab/experiment.hpp"
#include "oraclelab/rng.hpp"
#include "oraclelab/transformers.hpp"

using namespace olab;
using nlohmann::json;

namespace {

struct Criterion {
  int index;
  std::string label;
  double limit_seconds;
  std::function<bool(std::string&)> body;
};

bool expect(bool condition, const std::string& what, std::string& detail) {
  if (!condition && detail.empty()) detail = what;
  return condition;
}

// ---------------------------------------------------------------- criterion 1
bool voting_threshold(std::string& detail) {
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 100 && ok; ++seed) {
    BitSequence s = BitSequence::random_prefix(1000 + seed, 16);
    BitSequence coded = rtilde_coding(s);
    std::vector<std::uint64_t> blocks;
    for (std::uint64_t n = 4; n < 16; ++n) blocks.push_back(n);
    BitSequence noisy = total_view(
        oracle_for(coded, CorruptionSpec::density_error(Ratio(1, 4), "random", seed, blocks)));
    for (std::uint64_t n = 4; n < 16 && ok; ++n) {
      ok = expect(recover_from_coarse_rtilde(noisy, n) == s.at(n),
                  "vote failed under quarter-block errors at n=" + std::to_string(n), detail);
    }
  }
  // half-block leading lies reach the decision threshold first
  BitSequence s = BitSequence::random_prefix(4242, 16);
  BitSequence coded = rtilde_coding(s);
  for (std::uint64_t n = 4; n < 16 && ok; ++n) {
    BitSequence adversarial = total_view(
        oracle_for(coded, CorruptionSpec::density_error(Ratio(1, 2), "leading", 0, {n})));
    ok = expect(recover_from_coarse_rtilde(adversarial, n) == 1 - s.at(n),
                "leading lies did not flip the vote at n=" + std::to_string(n), detail);
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 2
bool generic_halting_bound(std::string& detail) {
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 20 && ok; ++seed) {
    BitSequence s = BitSequence::random_prefix(2000 + seed, 16);
    BitSequence coded = rtilde_coding(s);
    PartialOracle oracle =
        as_oracle(oracle_for(coded, CorruptionSpec::density1_domain(Ratio(5, 8), 8, seed)));
    for (std::uint64_t n = 0; n < 16 && ok; ++n) {
      RecoveryResult r = recover_from_generic_rtilde(oracle, n, 1ULL << 17);
      if (r.output) {
        ok = expect(*r.output == s.at(n), "false recovery value at n=" + std::to_string(n), detail);
      } else {
        ok = expect(n < 3, "undefined above the halting bound at n=" + std::to_string(n), detail);
      }
    }
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 3
bool round_trip(std::string& detail) {
  bool ok = true;
  SplitMix64 gen(33);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    BitSequence s = BitSequence::random_prefix(3000 + trial, 16);
    std::set<std::uint64_t> dropped;
    std::uint64_t count = gen.below(6);
    while (dropped.size() < count) dropped.insert(gen.below(16));

    PartialOracle lifted = lift_rtilde(as_oracle(
        oracle_for(s, CorruptionSpec::finite_drop({dropped.begin(), dropped.end()}))));
    std::uint64_t undefined = 0;
    for (std::uint64_t n = 0; n < 16 && ok; ++n) {
      RecoveryResult r = recover_from_generic_rtilde(lifted, n, 1ULL << 17);
      if (!r.output) {
        ++undefined;
        ok = expect(dropped.count(n) == 1, "undefined outside the dropped image", detail);
      } else {
        ok = expect(*r.output == s.at(n), "round trip disagreed with the base", detail);
      }
    }
    ok = ok && expect(undefined <= 5, "more than five undefined positions", detail);
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 4
bool theorem_chain(std::string& detail) {
  BitSequence a = BitSequence::random_prefix(404, 1024);
  BitSequence b = BitSequence::parse("apply(xor-pair," + a.descriptor() + ")");
  Functional phi = parse_functional("xor-pair");
  SplitMix64 gen(44);

  CheckParams mf;
  mf.input_window = 256;
  mf.budget = 10000;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::uint64_t> positions;
    std::uint64_t count = 1 + gen.below(6);
    for (std::uint64_t k = 0; k < count; ++k) positions.push_back(gen.below(120));
    mf.corruption_family.push_back(CorruptionSpec::finite_error(positions));
  }
  if (!expect(check_modfinite(phi, a, b, mf).pass, "mod-finite check failed", detail)) return false;

  Functional psi = mf_to_ubfb(phi);
  CheckParams ub;
  ub.input_window = 256;
  ub.budget = 10000;
  ub.ubfb_floor_targets = {8, 16, 32};
  if (!expect(check_ubfb(psi, a, b, ub).pass, "use-floor check failed", detail)) return false;

  Functional chi = ubfb_to_cf(psi);
  CheckParams cf;
  cf.input_window = 256;
  cf.budget = 10000;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::uint64_t> positions;
    std::uint64_t count = 1 + gen.below(6);
    for (std::uint64_t k = 0; k < count; ++k) positions.push_back(gen.below(120));
    cf.corruption_family.push_back(CorruptionSpec::finite_drop(positions));
  }
  return expect(check_cofinite(chi, a, b, cf).pass, "cofinite check failed", detail);
}

// ---------------------------------------------------------------- criterion 5
bool falsification_soundness(std::string& detail) {
  BitSequence a = BitSequence::random_prefix(505, 128);
  BitSequence constant = a.at(0) == 1 ? BitSequence::ones() : BitSequence::zeros();
  CheckParams params;
  params.input_window = 64;
  params.budget = 2048;
  params.ubfb_floor_targets = {0};
  CheckReport report = check_ubfb(parse_functional("proj:0:0"), a, constant, params);
  if (!expect(!report.pass, "the constant-bit functional must fail the use floor", detail))
    return false;
  bool found = false;
  for (const Witness& w : report.witnesses) found = found || w.got == "m = 0";
  if (!expect(found, "missing witness for m = 0", detail)) return false;

  json report_json = report.to_json();
  for (std::size_t i = 0; i < report.witnesses.size(); ++i) {
    if (report.witnesses[i].trace_jsonl.empty()) continue;
    ReplayResult replay = replay_witness(report_json, i);
    if (!expect(replay.matches, "witness replay diverged from the stored trace", detail))
      return false;
  }

  // complement pairs survive every periodic difference
  BitSequence comp = BitSequence::parse("complement(" + a.descriptor() + ")");
  SplitMix64 gen(55);
  CheckParams mr;
  mr.input_window = 64;
  mr.budget = 2048;
  mr.period_cap = 8;
  for (int i = 0; i < 10; ++i) {
    std::vector<int> transient(gen.below(4));
    for (auto& t : transient) t = static_cast<int>(gen.next() & 1);
    std::vector<int> pattern(1 + gen.below(8));
    for (auto& p : pattern) p = static_cast<int>(gen.next() & 1);
    mr.corruption_family.push_back(
        CorruptionSpec::periodic_difference(EventuallyPeriodicSet(transient, pattern)));
  }
  return expect(check_modrecursive(parse_functional("bit-flip"), a, comp, mr).pass,
                "bit-flip against the complement failed the mod-recursive check", detail);
}

// ---------------------------------------------------------------- criterion 6
bool ii_constructions(std::string& detail) {
  BitSequence a = BitSequence::random_prefix(606, 64);
  BitSequence b = BitSequence::random_prefix(607, 64);
  BitSequence joined = BitSequence::parse("join(" + a.descriptor() + "," + b.descriptor() + ")");
  Functional meet = race(parse_functional("half-even"), parse_functional("half-odd"));

  for (int side = 0; side < 2; ++side) {
    CheckParams params;
    params.input_window = 64;
    params.budget = 1024;
    std::vector<std::uint64_t> positions;
    for (std::uint64_t i = 0; i < 10; ++i) {
      positions.push_back(2 * (3 * i + 1) + side);  // evens code a, odds code b
      params.corruption_family.push_back(CorruptionSpec::sparse_domain(positions));
    }
    CheckReport report = check_ii(meet, joined, joined, params);
    if (!expect(report.pass, side == 0 ? "chain in the even half failed" : "chain in the odd half failed",
                detail))
      return false;
  }

  // the affine transfer preserves domain counts stage by stage
  SplitMix64 gen(66);
  std::map<std::uint64_t, OracleEntry> entries;
  for (std::uint64_t stage = 1; stage <= 10; ++stage) {
    while (entries.size() < 3 * stage)
      entries[gen.below(128)] = OracleEntry{static_cast<int>(gen.next() & 1), 0};
    PartialOracle oracle_b = PartialOracle::from_map(entries);
    PartialOracle transferred = ii_from_one_reduction(2, 0, oracle_b);
    std::uint64_t in_count = 0, out_count = 0;
    for (std::uint64_t n = 0; n < 128; ++n) in_count += oracle_b.entry(n).has_value();
    for (std::uint64_t m = 0; m < 256; ++m) out_count += transferred.entry(m).has_value();
    if (!expect(in_count == out_count, "domain count changed through the transfer", detail))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------- criterion 7
bool deduction_engine(std::string& detail) {
  DeductionMode big = DeductionMode::threshold(8, 512, 1000);
  SplitMix64 seeder(77);

  for (std::uint64_t c = 1; c <= 4; ++c) {
    Functional f = parse_functional("counting-search:" + std::to_string(c));
    for (std::uint64_t d = 0; d <= c; ++d) {
      std::vector<FinitePartialOracle> sigmas;
      for (int i = 0; i < 72; ++i) {
        FinitePartialOracle sigma;
        while (sigma.assignments.size() < d)
          sigma.assignments[seeder.below(512)] = static_cast<int>(seeder.next() & 1);
        sigmas.push_back(std::move(sigma));
      }
      DeductionTable table = deduction_closure(f, {0}, big, sigmas);
      std::uint64_t expected = *exact_rank_counting(c, d);
      for (const FinitePartialOracle& sigma : sigmas) {
        auto it = table.entries.find({sigma.id(), 0});
        if (!expect(it != table.entries.end(), "missing rank entry", detail)) return false;
        if (!expect(it->second.rank == expected && it->second.value == 1,
                    "threshold rank disagreed with the closed form (c=" + std::to_string(c) +
                        ", d=" + std::to_string(d) + ")",
                    detail))
          return false;
      }
    }

    // operator laws on the enumerable cube
    DeductionMode cube = DeductionMode::threshold(2, 4, 256);
    FactSet x;
    for (int step = 0; step < 10; ++step) {
      FactSet next = gamma_step(f, x, cube, {0});
      for (const Fact& fact : x)
        if (!expect(next.count(fact) == 1, "closure step lost a fact", detail)) return false;
      if (next == x) break;
      x = std::move(next);
    }
    if (!expect(gamma_step(f, x, cube, {0}) == x, "fixpoint is not idempotent", detail))
      return false;
    FactSet smaller;
    std::size_t keep = 0;
    for (const Fact& fact : x)
      if (keep++ % 3 != 0) smaller.insert(fact);
    FactSet lhs = gamma_step(f, smaller, cube, {0});
    FactSet rhs = gamma_step(f, x, cube, {0});
    for (const Fact& fact : lhs)
      if (!expect(rhs.count(fact) == 1, "closure step is not monotone", detail)) return false;
  }

  // antitonicity across thresholds
  Functional f3 = parse_functional("counting-search:3");
  std::vector<FinitePartialOracle> sigmas;
  for (int i = 0; i < 12; ++i) {
    FinitePartialOracle sigma;
    std::uint64_t d = seeder.below(3);
    while (sigma.assignments.size() < d)
      sigma.assignments[seeder.below(512)] = static_cast<int>(seeder.next() & 1);
    sigmas.push_back(std::move(sigma));
  }
  std::map<std::uint64_t, DeductionTable> tables;
  for (std::uint64_t t : {2ULL, 4ULL, 8ULL, 16ULL})
    tables.emplace(t, deduction_closure(f3, {0}, DeductionMode::threshold(t, 512, 1000), sigmas));
  for (std::uint64_t lo : {2ULL, 4ULL, 8ULL}) {
    for (std::uint64_t hi : {4ULL, 8ULL, 16ULL}) {
      if (hi <= lo) continue;
      for (const auto& [key, entry] : tables[hi].entries) {
        auto it = tables[lo].entries.find(key);
        bool present = it != tables[lo].entries.end() && it->second.rank <= entry.rank;
        if (!expect(present, "higher thresholds must deduce less", detail)) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 8
bool run_determinism(std::string& detail) {
  std::filesystem::path dir_a = std::filesystem::temp_directory_path() / "oracle-lab-acc-a";
  std::filesystem::path dir_b = std::filesystem::temp_directory_path() / "oracle-lab-acc-b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);

  std::string base = std::string(ORACLE_LAB_CLI_PATH) + " run --config " +
                     std::string(ORACLE_LAB_DEMO_CONFIG) + " --no-timestamp --out ";
  if (!expect(std::system((base + dir_a.string() + " > /dev/null").c_str()) == 0,
              "first demo run failed", detail))
    return false;
  if (!expect(std::system((base + dir_b.string() + " > /dev/null").c_str()) == 0,
              "second demo run failed", detail))
    return false;

  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    std::filesystem::path other = dir_b / entry.path().filename();
    std::ifstream lhs(entry.path()), rhs(other);
    std::string a((std::istreambuf_iterator<char>(lhs)), {});
    std::string b((std::istreambuf_iterator<char>(rhs)), {});
    if (!expect(!a.empty() && a == b, "report bytes differ: " + entry.path().filename().string(),
                detail))
      return false;
  }
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "voting threshold and adversarial flip", 10.0, voting_threshold},
      {2, "generic recovery halting bound", 5.0, generic_halting_bound},
      {3, "drop/lift/recover round trip", 30.0, round_trip},
      {4, "mod-finite to use-floor to cofinite chain", 60.0, theorem_chain},
      {5, "falsification witnesses and replay", 30.0, falsification_soundness},
      {6, "infinite-information constructions", 30.0, ii_constructions},
      {7, "deduction closure against the closed form", 120.0, deduction_engine},
      {8, "byte-identical reports across runs", 60.0, run_determinism},
  };

  bool all = true;
  for (Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && seconds > c.limit_seconds) {
      ok = false;
      detail = "exceeded the time limit";
    }
    std::printf("[%s] criterion %d: %s (%.2fs%s)\n", ok ? "PASS" : "FAIL", c.index,
                c.label.c_str(), seconds, detail.empty() ? "" : (", " + detail).c_str());
    all = all && ok;
  }
  std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES");
  return all ? 0 : 1;
}
