#include "doctest.h"

#include "oraclelab/oracles.hpp"
#include "oraclelab/rng.hpp"
#include "oraclelab/sequences.hpp"

using namespace olab;

TEST_CASE("oracle query resolution against delays") {
  PartialOracle o = PartialOracle::from_map({{7, OracleEntry{1, 3}}});
  CHECK(oracle_query(o, 7, 3) == QueryResult::resolved1);
  CHECK(oracle_query(o, 7, 2) == QueryResult::pending);
  CHECK(oracle_query(o, 9, 1000) == QueryResult::pending);

  // monotone: once resolved, resolved for every larger allowance
  for (std::uint64_t t = 3; t < 20; ++t) CHECK(oracle_query(o, 7, t) == QueryResult::resolved1);
}

TEST_CASE("finite drop and finite error") {
  BitSequence a = BitSequence::random_prefix(5, 64);

  CorruptedOracle dropped = oracle_for(a, CorruptionSpec::finite_drop({5}));
  REQUIRE(!is_total(dropped));
  PartialOracle po = as_oracle(dropped);
  for (std::uint64_t n = 0; n < 64; ++n) {
    auto e = po.entry(n);
    if (n == 5) {
      CHECK(!e.has_value());
    } else {
      REQUIRE(e.has_value());
      CHECK(e->bit == a.at(n));
    }
  }

  CorruptedOracle flipped = oracle_for(a, CorruptionSpec::finite_error({5}));
  REQUIRE(is_total(flipped));
  const BitSequence& fv = total_view(flipped);
  for (std::uint64_t n = 0; n < 64; ++n)
    CHECK(fv.at(n) == (n == 5 ? 1 - a.at(n) : a.at(n)));

  // the flip set is exactly the symmetric difference
  CorruptedOracle multi = oracle_for(a, CorruptionSpec::finite_error({3, 9, 40}));
  CHECK(symmetric_difference_view(a, total_view(multi), 0, 64) ==
        std::vector<std::uint64_t>{3, 9, 40});
}

TEST_CASE("per-block keep fractions are exact") {
  BitSequence a = BitSequence::random_prefix(1, 64);
  CorruptedOracle view = oracle_for(a, CorruptionSpec::density1_domain(Ratio(7, 8), 0, 1));
  PartialOracle po = as_oracle(view);
  for (std::uint64_t j = 3; j <= 10; ++j) {
    std::uint64_t lo = 1ULL << j;
    std::uint64_t defined = 0;
    for (std::uint64_t p = lo; p < 2 * lo; ++p) defined += po.entry(p).has_value();
    CHECK(Ratio(static_cast<std::int64_t>(defined), static_cast<std::int64_t>(lo)) ==
          Ratio(7, 8));
  }
  // blocks below the cut start are dropped entirely
  CorruptedOracle cut = oracle_for(a, CorruptionSpec::density1_domain(Ratio(5, 8), 8, 2));
  PartialOracle pc = as_oracle(cut);
  for (std::uint64_t p = 0; p < 8; ++p) CHECK(!pc.entry(p).has_value());
}

TEST_CASE("domain corruptions never lie") {
  BitSequence a = BitSequence::random_prefix(17, 128);
  std::vector<CorruptionSpec> specs = {
      CorruptionSpec::finite_drop({1, 2, 30}),
      CorruptionSpec::cofinite_domain({0, 64}),
      CorruptionSpec::density1_domain(Ratio(3, 4), 0, 9),
      CorruptionSpec::sparse_domain({2, 3, 5, 8, 13, 21, 34, 55, 89}),
      CorruptionSpec::delay_profile("linear", 1, 2),
  };
  for (const CorruptionSpec& spec : specs) {
    CHECK(!spec.value_corrupting());  // drop and delay kinds never change bits
    PartialOracle po = as_oracle(oracle_for(a, spec));
    for (std::uint64_t n = 0; n < 128; ++n) {
      auto e = po.entry(n);
      if (e) CHECK(e->bit == a.at(n));
    }
  }
}

TEST_CASE("delay profiles change timing but not values") {
  BitSequence a = BitSequence::random_prefix(3, 64);
  PartialOracle po = as_oracle(oracle_for(a, CorruptionSpec::delay_profile("linear", 2, 1)));
  auto e = po.entry(10);
  REQUIRE(e.has_value());
  CHECK(e->delay == 21);
  CHECK(oracle_query(po, 10, 20) == QueryResult::pending);
  CHECK(oracle_query(po, 10, 21) == (a.at(10) ? QueryResult::resolved1 : QueryResult::resolved0));
}

TEST_CASE("eventually periodic difference flips exactly the set") {
  BitSequence a = BitSequence::random_prefix(23, 64);
  EventuallyPeriodicSet diff({}, {1, 0, 0});
  CorruptedOracle view = oracle_for(a, CorruptionSpec::periodic_difference(diff));
  REQUIRE(is_total(view));
  for (std::uint64_t n = 0; n < 64; ++n)
    CHECK(total_view(view).at(n) == (diff.at(n) ? 1 - a.at(n) : a.at(n)));
}

TEST_CASE("mask generation is pinned for ports") {
  // canonical splitmix64 vectors for seed 0
  SplitMix64 g(0);
  CHECK(g.next() == 0xe220a8397b1dcdafULL);
  CHECK(g.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(g.next() == 0x06c45d188009454fULL);
  // stream derivation and selection, frozen as the wire contract
  CHECK(SplitMix64::derive(42, 0) == 15791576015516199220ULL);
  CHECK(SplitMix64::derive(42, 7) == 10702317158813538480ULL);
  CHECK(BitSequence::random_prefix(42, 32).prefix_string(32) ==
        "11000010101001001110011101111110");
  PartialOracle o = as_oracle(
      oracle_for(BitSequence::zeros(), CorruptionSpec::density1_domain(Ratio(1, 2), 0, 11)));
  std::string block3;
  for (std::uint64_t p = 8; p < 16; ++p) block3 += o.entry(p).has_value() ? '1' : '0';
  CHECK(block3 == "10100011");
}

TEST_CASE("corruption specs round-trip through json") {
  std::vector<CorruptionSpec> specs = {
      CorruptionSpec::finite_error({1, 5}),
      CorruptionSpec::density1_domain(Ratio(7, 8), 8, 42),
      CorruptionSpec::density_error(Ratio(1, 4), "leading", 7, {4, 5}),
  };
  for (const CorruptionSpec& spec : specs) {
    CorruptionSpec back = CorruptionSpec::from_json(spec.to_json());
    CHECK(back.kind == spec.kind);
    CHECK(back.parameters == spec.parameters);
    CHECK(back.seed == spec.seed);
  }
  CHECK_THROWS_AS(oracle_for(BitSequence::zeros(), CorruptionSpec{"both-kinds", {}, 0}),
                  std::invalid_argument);
}

TEST_CASE("density error with leading placement hits the block head") {
  BitSequence a = BitSequence::zeros();
  CorruptedOracle view =
      oracle_for(a, CorruptionSpec::density_error(Ratio(1, 2), "leading", 0, {3}));
  const BitSequence& t = total_view(view);
  // block 3 = [8,16): first half flipped, second half intact
  for (std::uint64_t p = 8; p < 12; ++p) CHECK(t.at(p) == 1);
  for (std::uint64_t p = 12; p < 16; ++p) CHECK(t.at(p) == 0);
  // other blocks untouched
  for (std::uint64_t p = 16; p < 64; ++p) CHECK(t.at(p) == 0);
}

TEST_CASE("random error masks have exact per-block counts") {
  BitSequence a = BitSequence::zeros();
  CorruptedOracle view = oracle_for(a, CorruptionSpec::density_error(Ratio(1, 4), "random", 11));
  const BitSequence& t = total_view(view);
  for (std::uint64_t j = 2; j <= 9; ++j) {
    std::uint64_t lo = 1ULL << j;
    std::uint64_t flips = 0;
    for (std::uint64_t p = lo; p < 2 * lo; ++p) flips += t.at(p);
    CHECK(flips == lo / 4);
  }
}
