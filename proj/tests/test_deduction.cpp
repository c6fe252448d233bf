#include "doctest.h"

#include "oraclelab/deduction.hpp"
#include "oraclelab/rng.hpp"

using namespace olab;

namespace {

FinitePartialOracle sigma_of(std::initializer_list<std::pair<std::uint64_t, int>> items) {
  FinitePartialOracle s;
  for (const auto& [pos, bit] : items) s.assignments[pos] = bit;
  return s;
}

bool has_fact(const FactSet& x, const FinitePartialOracle& sigma, std::uint64_t n, int i) {
  return x.count(Fact{sigma, n, i}) > 0;
}

}  // namespace

TEST_CASE("one closure step adds direct convergences") {
  Functional f = parse_functional("counting-search:1");
  DeductionMode mode = DeductionMode::threshold(4, 3, 64);

  FactSet first = gamma_step(f, {}, mode, {0});
  // every nonempty oracle in the cube already halts; the empty one does not
  CHECK(!has_fact(first, {}, 0, 1));
  CHECK(has_fact(first, sigma_of({{0, 0}}), 0, 1));
  CHECK(has_fact(first, sigma_of({{2, 1}}), 0, 1));
  CHECK(has_fact(first, sigma_of({{0, 1}, {1, 0}}), 0, 1));

  // the second step reaches the empty oracle through its extensions
  FactSet second = gamma_step(f, first, mode, {0});
  CHECK(has_fact(second, {}, 0, 1));
}

TEST_CASE("a single converging extension never satisfies the clause") {
  Functional f = parse_functional("bit-gate:0");
  DeductionMode mode = DeductionMode::threshold(2, 3, 64);

  FactSet x;
  for (int step = 0; step < 6; ++step) x = gamma_step(f, x, mode, {0});
  CHECK(x == gamma_step(f, x, mode, {0}));  // fixpoint
  CHECK(has_fact(x, sigma_of({{0, 1}}), 0, 1));
  CHECK(!has_fact(x, {}, 0, 1));  // only one of its 1-extensions halts
}

TEST_CASE("closure ranks match the counting formula") {
  DeductionMode mode = DeductionMode::threshold(4, 32, 512);

  // d relevant bits against required count c: rank c - d
  Functional c3 = parse_functional("counting-search:3");
  DeductionTable t1 = deduction_closure(c3, {0}, mode, {sigma_of({{5, 1}})});
  REQUIRE(t1.entries.count({"5:1", 0}) == 1);
  CHECK(t1.entries[{"5:1", 0}].rank == 2);
  CHECK(t1.entries[{"5:1", 0}].value == 1);

  Functional c1 = parse_functional("counting-search:1");
  DeductionTable t2 = deduction_closure(c1, {0}, mode, {FinitePartialOracle{}});
  CHECK(t2.entries[{"e", 0}].rank == 1);

  DeductionTable t3 = deduction_closure(c1, {0}, mode, {sigma_of({{3, 0}})});
  CHECK(t3.entries[{"3:0", 0}].rank == 0);
  CHECK(t3.closed);
}

TEST_CASE("lazy ranks equal brute-force fixpoint stages") {
  // independent oracle: iterate the closure operator over the whole cube and
  // read off first-appearance stages
  Functional f = parse_functional("counting-search:2");
  DeductionMode cube = DeductionMode::threshold(2, 4, 256);
  DeductionTable stages = deduction_closure(f, {0}, cube);

  std::vector<FinitePartialOracle> all;
  all.push_back({});
  for (std::uint64_t pos = 0; pos < 4; ++pos) {
    std::size_t count = all.size();
    for (std::size_t i = 0; i < count; ++i) {
      all.push_back(all[i].extended(pos, 0));
      all.push_back(all[i].extended(pos, 1));
    }
  }
  DeductionTable lazy = deduction_closure(f, {0}, cube, all);

  CHECK(!stages.entries.empty());
  for (const auto& [key, entry] : stages.entries) {
    REQUIRE(lazy.entries.count(key) == 1);
    CHECK(lazy.entries[key].rank == entry.rank);
    CHECK(lazy.entries[key].value == entry.value);
    // and both match the closed form
    FinitePartialOracle sigma = FinitePartialOracle::parse(key.first);
    CHECK(entry.rank == *exact_rank_counting(2, sigma.assignments.size()));
  }
  for (const auto& [key, entry] : lazy.entries) CHECK(stages.entries.count(key) == 1);
}

TEST_CASE("exact ranks for counting searches") {
  CHECK(exact_rank_counting(3, 0) == 3);
  CHECK(exact_rank_counting(2, 2) == 0);
  CHECK(exact_rank_counting(4, 1) == 3);
  CHECK(!exact_rank_counting(1, 0, false).has_value());
  CHECK_THROWS_AS(exact_rank_counting(0, 0), std::invalid_argument);

  // a finite relevant list admits no deduction at the empty oracle
  Functional finite = parse_functional("counting-search:1:list:0,1,2,3,4");
  DeductionMode mode = DeductionMode::exact_counting(256);
  DeductionTable table = deduction_closure(finite, {0}, mode, {FinitePartialOracle{}});
  CHECK(table.entries.empty());

  // but direct convergence still registers at rank 0
  DeductionTable direct = deduction_closure(finite, {0}, mode, {sigma_of({{2, 1}})});
  REQUIRE(direct.entries.count({"2:1", 0}) == 1);
  CHECK(direct.entries[{"2:1", 0}].rank == 0);
}

TEST_CASE("the closure operator is monotone and idempotent") {
  Functional f = parse_functional("counting-search:2");
  DeductionMode mode = DeductionMode::threshold(2, 3, 64);
  std::vector<std::uint64_t> inputs = {0};

  FactSet x;
  for (int step = 0; step < 8; ++step) {
    FactSet next = gamma_step(f, x, mode, inputs);
    // extensive: X subset of Gamma(X)
    for (const Fact& fact : x) CHECK(next.count(fact) == 1);
    if (next == x) break;
    x = std::move(next);
  }
  CHECK(gamma_step(f, x, mode, inputs) == x);

  // monotone on a sampled subset
  FactSet smaller;
  std::size_t keep = 0;
  for (const Fact& fact : x)
    if (keep++ % 2 == 0) smaller.insert(fact);
  FactSet lhs = gamma_step(f, smaller, mode, inputs);
  FactSet rhs = gamma_step(f, x, mode, inputs);
  for (const Fact& fact : lhs) CHECK(rhs.count(fact) == 1);
}

TEST_CASE("raising the threshold only removes deductions") {
  std::vector<FinitePartialOracle> sigmas = {FinitePartialOracle{}, sigma_of({{1, 1}}),
                                             sigma_of({{2, 0}, {9, 1}})};
  Functional f = parse_functional("counting-search:3");
  std::map<std::uint64_t, DeductionTable> tables;
  for (std::uint64_t t : {2ULL, 4ULL, 8ULL, 16ULL})
    tables.emplace(t, deduction_closure(f, {0}, DeductionMode::threshold(t, 64, 512), sigmas));
  for (std::uint64_t lo : {2ULL, 4ULL, 8ULL}) {
    for (std::uint64_t hi : {4ULL, 8ULL, 16ULL}) {
      if (hi <= lo) continue;
      for (const auto& [key, entry] : tables[hi].entries) {
        REQUIRE(tables[lo].entries.count(key) == 1);
        CHECK(tables[lo].entries[key].rank <= entry.rank);
      }
    }
  }
}

TEST_CASE("threshold mode agrees with the exact mode on cofinite patterns") {
  // documented regime: t >= 2 and P >= 2 * (count + transient)
  for (std::uint64_t c : {1ULL, 2ULL, 3ULL}) {
    for (std::uint64_t transient : {0ULL, 3ULL}) {
      std::string term = "counting-search:" + std::to_string(c);
      if (transient) term += ":from:" + std::to_string(transient);
      Functional f = parse_functional(term);

      std::vector<FinitePartialOracle> sigmas = {FinitePartialOracle{}};
      if (c >= 2) sigmas.push_back(sigma_of({{transient + 1, 1}}));

      DeductionMode threshold =
          DeductionMode::threshold(2, 2 * (c + transient) + 2, 512);
      DeductionMode exact = DeductionMode::exact_counting(512);
      DeductionTable lhs = deduction_closure(f, {0}, threshold, sigmas);
      DeductionTable rhs = deduction_closure(f, {0}, exact, sigmas);
      for (const auto& [key, entry] : rhs.entries) {
        REQUIRE(lhs.entries.count(key) == 1);
        CHECK(lhs.entries[key].rank == entry.rank);
        CHECK(lhs.entries[key].value == entry.value);
      }
    }
  }
}

TEST_CASE("rank zero facts about truthful oracles are true") {
  BitSequence a = BitSequence::random_prefix(71, 64);
  Functional identity = parse_functional("identity");
  SplitMix64 gen(8);
  for (int trial = 0; trial < 12; ++trial) {
    FinitePartialOracle sigma;
    std::uint64_t size = gen.below(5);
    while (sigma.assignments.size() < size) {
      std::uint64_t pos = gen.below(32);
      sigma.assignments[pos] = a.at(pos);  // truthful restriction of a
    }
    std::vector<std::uint64_t> inputs = {gen.below(32), gen.below(32)};
    DeductionTable table =
        deduction_closure(identity, inputs, DeductionMode::threshold(4, 32, 128, 0), {sigma});
    for (const auto& [key, entry] : table.entries) {
      if (entry.rank != 0) continue;
      CHECK(entry.value == a.at(key.second));
    }
  }
}

TEST_CASE("oracle ids round-trip") {
  FinitePartialOracle sigma = sigma_of({{3, 1}, {17, 0}});
  CHECK(sigma.id() == "3:1,17:0");
  CHECK(FinitePartialOracle::parse(sigma.id()) == sigma);
  CHECK(FinitePartialOracle::parse("e").assignments.empty());
  CHECK_THROWS_AS(sigma.extended(3, 0), std::invalid_argument);

  // deduction tables serialize with a histogram
  Functional f = parse_functional("counting-search:2");
  DeductionTable table = deduction_closure(
      f, {0}, DeductionMode::threshold(2, 16, 256), {FinitePartialOracle{}, sigma_of({{1, 1}})});
  auto hist = table.rank_histogram();
  CHECK(hist[2] == 1);
  CHECK(hist[1] == 1);
  CHECK(table.to_json().contains("rankHistogram"));
}

TEST_CASE("the large-bound engine rejects cube enumeration") {
  Functional f = parse_functional("counting-search:1");
  DeductionMode mode = DeductionMode::threshold(2, 512, 256);
  CHECK_THROWS_AS(gamma_step(f, {}, mode, {0}), std::invalid_argument);
}
