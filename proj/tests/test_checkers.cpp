#include "doctest.h"

#include "oraclelab/checkers.hpp"
#include "oraclelab/codings.hpp"
#include "oraclelab/experiment.hpp"
#include "oraclelab/rng.hpp"
#include "oraclelab/transformers.hpp"

using namespace olab;

namespace {

CheckParams base_params(std::uint64_t window, std::uint64_t budget = 4096) {
  CheckParams p;
  p.input_window = window;
  p.oracle_window = 4096;
  p.budget = budget;
  return p;
}

}  // namespace

TEST_CASE("mod-finite checker") {
  BitSequence a = BitSequence::random_prefix(51, 128);
  Functional identity = parse_functional("identity");

  CheckParams params = base_params(64);
  params.corruption_family = {CorruptionSpec::finite_error({3, 7})};
  CheckReport pass = check_modfinite(identity, a, a, params);
  CHECK(pass.pass);
  CHECK(pass.statistics["perSpec"][0]["disagreements"] ==
        std::vector<std::uint64_t>{3, 7});

  // a constant-bit functional collapses under one flipped bit
  Functional constant = parse_functional("proj:0:0");
  BitSequence b = a.at(0) == 1 ? BitSequence::ones() : BitSequence::zeros();
  CheckParams cparams = base_params(32);
  cparams.corruption_family = {CorruptionSpec::finite_error({0})};
  CheckReport fail = check_modfinite(constant, a, b, cparams);
  CHECK(!fail.pass);
  CHECK(fail.witnesses.size() >= 1);

  // empty family still verifies exactness
  CheckParams eparams = base_params(32);
  CHECK(check_modfinite(identity, a, a, eparams).pass);
  CHECK(!check_modfinite(parse_functional("bit-flip"), a, a, eparams).pass);

  CheckParams bad = base_params(32);
  bad.corruption_family = {CorruptionSpec::finite_drop({1})};
  CHECK_THROWS_AS(check_modfinite(identity, a, a, bad), std::invalid_argument);
}

TEST_CASE("cofinite checker") {
  BitSequence s = BitSequence::random_prefix(52, 64);
  BitSequence coded = r_coding(s);
  Functional search = parse_functional("odd-search");

  CheckParams params = base_params(32, 1 << 14);
  params.corruption_family = {CorruptionSpec::finite_drop({2})};
  CHECK(check_cofinite(search, coded, s, params).pass);

  Functional identity = parse_functional("identity");
  BitSequence a = BitSequence::random_prefix(53, 64);
  CheckParams tight = base_params(32);
  tight.corruption_family = {CorruptionSpec::finite_drop({5})};
  tight.cofinite_slack = 5;  // undefined at 5 is out of bounds
  CHECK(!check_cofinite(identity, a, a, tight).pass);
  tight.cofinite_slack = 6;
  CHECK(check_cofinite(identity, a, a, tight).pass);

  // a functional that needs bit 0 everywhere dies with it
  Functional needs_zero = parse_functional("proj:0:0");
  BitSequence b = a.at(0) == 1 ? BitSequence::ones() : BitSequence::zeros();
  CheckParams holes = base_params(32);
  holes.corruption_family = {CorruptionSpec::finite_drop({0})};
  CheckReport dead = check_cofinite(needs_zero, a, b, holes);
  CHECK(!dead.pass);
}

TEST_CASE("generic checker") {
  BitSequence s = BitSequence::random_prefix(54, 16);
  BitSequence coded = rtilde_coding(s);
  Functional search = parse_functional("block-search");

  CheckParams params = base_params(16, 1 << 15);
  params.corruption_family = {CorruptionSpec::density1_domain(Ratio(7, 8), 8, 3)};
  CheckReport report = check_generic(search, coded, s, params);
  CHECK(report.pass);

  CheckParams bad = base_params(16);
  bad.corruption_family = {CorruptionSpec::finite_error({1})};
  CHECK_THROWS_AS(check_generic(search, coded, s, bad), std::invalid_argument);
}

TEST_CASE("coarse checker") {
  BitSequence a = BitSequence::random_prefix(55, 256);
  Functional identity = parse_functional("identity");
  CheckParams params = base_params(128);
  params.corruption_family = {CorruptionSpec::density_error(Ratio(1, 16), "random", 6)};
  CheckReport report = check_coarse(identity, a, a, params);
  CHECK(report.pass);

  // the voting pipeline survives per-block error 1/8
  BitSequence s = BitSequence::random_prefix(56, 16);
  BitSequence coded = rtilde_coding(s);
  CheckParams vparams = base_params(12, 1 << 15);
  vparams.corruption_family = {CorruptionSpec::density_error(Ratio(1, 8), "random", 8)};
  CHECK(check_coarse(parse_functional("block-vote"), coded, s, vparams).pass);

  // fractions above 1 - floor are rejected up front
  CheckParams bad = base_params(64);
  bad.corruption_family = {CorruptionSpec::density_error(Ratio(1, 2), "random", 1)};
  CHECK_THROWS_AS(check_coarse(identity, a, a, bad), std::invalid_argument);
}

TEST_CASE("mod-recursive checker") {
  BitSequence a = BitSequence::random_prefix(57, 128);
  BitSequence comp = BitSequence::parse("complement(" + a.descriptor() + ")");

  // complements are reachable through the bit flip whatever the difference
  CheckParams params = base_params(64);
  params.corruption_family = {
      CorruptionSpec::periodic_difference(EventuallyPeriodicSet({}, {1, 0})),
      CorruptionSpec::periodic_difference(EventuallyPeriodicSet({1}, {0, 1, 1})),
  };
  CHECK(check_modrecursive(parse_functional("bit-flip"), a, comp, params).pass);

  // identity against the even flips leaves agreement on the odds
  CheckParams iparams = base_params(64);
  iparams.corruption_family = {
      CorruptionSpec::periodic_difference(EventuallyPeriodicSet({}, {1, 0}))};
  CheckReport report = check_modrecursive(parse_functional("identity"), a, a, iparams);
  CHECK(report.pass);
  CHECK(report.statistics["perSpec"][0]["detected"] == "01");

  // neighbour mixing scrambles a random sequence beyond small periods
  BitSequence target = BitSequence::parse("apply(and-next," + a.descriptor() + ")");
  CheckParams mixed = base_params(64);
  mixed.period_cap = 4;
  mixed.corruption_family = {
      CorruptionSpec::periodic_difference(EventuallyPeriodicSet({}, {1, 0}))};
  // confirm by brute force that no small period fits the agreement set
  {
    BitSequence flipped = total_view(oracle_for(a, mixed.corruption_family[0]));
    std::vector<int> agreement(64);
    for (std::uint64_t n = 0; n < 64; ++n)
      agreement[n] = (flipped.at(n) & flipped.at(n + 1)) == target.at(n) ? 1 : 0;
    REQUIRE(!EventuallyPeriodicSet::detect(agreement, 4, 16).has_value());
  }
  CHECK(!check_modrecursive(parse_functional("and-next"), a, target, mixed).pass);
}

TEST_CASE("infinite-information checker") {
  BitSequence a = BitSequence::random_prefix(58, 64);
  BitSequence b = BitSequence::random_prefix(59, 64);
  BitSequence joined = BitSequence::parse("join(" + a.descriptor() + "," + b.descriptor() + ")");
  Functional meet = race(parse_functional("half-even"), parse_functional("half-odd"));

  // growing chains of bits of a (even positions of the join)
  auto even_chain = [](std::uint64_t stages) {
    std::vector<CorruptionSpec> specs;
    std::vector<std::uint64_t> positions;
    for (std::uint64_t i = 0; i < stages; ++i) {
      positions.push_back(2 * (3 * i + 1));
      specs.push_back(CorruptionSpec::sparse_domain(positions));
    }
    return specs;
  };

  CheckParams params = base_params(64);
  params.corruption_family = even_chain(6);
  CHECK(check_ii(meet, joined, joined, params).pass);

  // chains on the odd side
  CheckParams odd_params = base_params(64);
  for (auto& spec : even_chain(6)) {
    auto positions = spec.parameters.at("positions").get<std::vector<std::uint64_t>>();
    for (auto& p : positions) ++p;
    odd_params.corruption_family.push_back(CorruptionSpec::sparse_domain(positions));
  }
  CHECK(check_ii(meet, joined, joined, odd_params).pass);

  // no outputs, no growth
  CHECK(!check_ii(parse_functional("diverge"), joined, joined, params).pass);

  // a one-reduction transfers the domain exactly: inputs 2p answer from
  // oracle positions p, so each new position adds exactly one output
  BitSequence stretched = BitSequence::parse("join(" + a.descriptor() + ",zeros)");
  CheckParams half_params = base_params(64);
  std::vector<std::uint64_t> positions;
  for (std::uint64_t i = 0; i < 6; ++i) {
    positions.push_back(5 * i + 2);
    half_params.corruption_family.push_back(CorruptionSpec::sparse_domain(positions));
  }
  CheckReport transfer = check_ii(parse_functional("half-even"), a, stretched, half_params);
  CHECK(transfer.pass);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(transfer.statistics["outputCounts"][i] == i + 1);

  CheckParams broken = base_params(64);
  broken.corruption_family = {CorruptionSpec::sparse_domain({2, 4}),
                              CorruptionSpec::sparse_domain({2, 6})};
  CHECK_THROWS_AS(check_ii(meet, joined, joined, broken), std::invalid_argument);
}

TEST_CASE("use-bounded-from-below checker") {
  BitSequence a = BitSequence::random_prefix(60, 256);
  BitSequence doubled = BitSequence::parse("apply(proj:2:0," + a.descriptor() + ")");

  CheckParams params = base_params(128);
  params.ubfb_floor_targets = {32};
  CHECK(check_ubfb(parse_functional("proj:2:0"), a, doubled, params).pass);

  BitSequence b = a.at(0) == 1 ? BitSequence::ones() : BitSequence::zeros();
  CheckParams zero_params = base_params(64);
  zero_params.ubfb_floor_targets = {0};
  CheckReport fail = check_ubfb(parse_functional("proj:0:0"), a, b, zero_params);
  CHECK(!fail.pass);
  REQUIRE(!fail.witnesses.empty());
  CHECK(fail.witnesses.back().got == "m = 0");

  BitSequence paired = BitSequence::parse("apply(xor-pair," + a.descriptor() + ")");
  CheckParams psi_params = base_params(128, 1 << 14);
  psi_params.ubfb_floor_targets = {8, 16, 32};
  CHECK(check_ubfb(mf_to_ubfb(parse_functional("xor-pair")), a, paired, psi_params).pass);
}

TEST_CASE("the column search is a mod-finite reduction between codings") {
  BitSequence a = BitSequence::random_prefix(66, 64);
  BitSequence coded = BitSequence::parse("r(" + a.descriptor() + ")");
  Functional search = parse_functional("column-search(r-encode)");
  CheckParams params = base_params(48, 1 << 14);
  params.corruption_family = {CorruptionSpec::finite_error({6}),
                              CorruptionSpec::finite_error({3, 10})};
  CHECK(check_modfinite(search, coded, coded, params).pass);
}

TEST_CASE("failed witnesses replay bit-exactly") {
  BitSequence a = BitSequence::random_prefix(61, 64);
  BitSequence b = a.at(0) == 1 ? BitSequence::ones() : BitSequence::zeros();
  CheckParams params = base_params(64);
  params.ubfb_floor_targets = {0};
  CheckReport report = check_ubfb(parse_functional("proj:0:0"), a, b, params);
  REQUIRE(!report.pass);
  for (std::size_t i = 0; i < report.witnesses.size(); ++i) {
    if (report.witnesses[i].trace_jsonl.empty()) continue;
    ReplayResult replay = replay_witness(report.to_json(), i);
    CHECK(replay.matches);
  }
}

TEST_CASE("checkers survive arbitrary catalog and corruption combinations") {
  // robustness sweep: random pairings may pass or fail, but they must never
  // crash, and every single-run witness must replay
  SplitMix64 gen(99);
  std::vector<std::string> terms = {"identity", "bit-flip",   "proj:2:1", "xor-pair",
                                    "and-next", "block-search", "odd-search",
                                    "counting-search:2", "after:2:1", "race(identity,bit-flip)"};
  std::vector<std::string> tags = {"mf", "cf", "g", "cor", "mr", "ubfb"};
  for (int trial = 0; trial < 40; ++trial) {
    const std::string& term = terms[gen.below(terms.size())];
    const std::string& tag = tags[gen.below(tags.size())];
    BitSequence a = BitSequence::random_prefix(gen.next(), 64);
    BitSequence b = BitSequence::random_prefix(gen.next(), 64);

    CheckParams params = base_params(16, 512);
    if (tag == "mf") params.corruption_family = {CorruptionSpec::finite_error({gen.below(16)})};
    if (tag == "cf") params.corruption_family = {CorruptionSpec::finite_drop({gen.below(16)})};
    if (tag == "g")
      params.corruption_family = {CorruptionSpec::density1_domain(Ratio(3, 4), 0, gen.next())};
    if (tag == "cor")
      params.corruption_family = {CorruptionSpec::density_error(Ratio(1, 16), "random", gen.next())};
    if (tag == "mr")
      params.corruption_family = {
          CorruptionSpec::periodic_difference(EventuallyPeriodicSet({}, {1, 0, 0}))};
    if (tag == "ubfb") params.ubfb_floor_targets = {gen.below(8)};

    CheckReport report = run_check(tag, parse_functional(term), a, b, params);
    nlohmann::json report_json = report.to_json();
    for (std::size_t i = 0; i < report.witnesses.size(); ++i) {
      if (report.witnesses[i].trace_jsonl.empty()) continue;
      CHECK(replay_witness(report_json, i).matches);
    }
  }
}

TEST_CASE("never-lie failures stay failures as windows grow") {
  BitSequence a = BitSequence::random_prefix(62, 512);
  Functional liar = parse_functional("bit-flip");  // wrong against b = a everywhere
  for (std::uint64_t window : {16ULL, 32ULL, 64ULL}) {
    CheckParams params = base_params(window);
    params.corruption_family = {CorruptionSpec::finite_drop({1})};
    CheckReport report = check_cofinite(liar, a, a, params);
    CHECK(!report.pass);
  }
}

TEST_CASE("theorem chain holds for catalog mod-finite reductions") {
  SplitMix64 gen(64);
  BitSequence a = BitSequence::random_prefix(63, 512);
  for (const char* term : {"identity", "xor-pair", "proj:2:0"}) {
    Functional phi = parse_functional(term);
    BitSequence b = BitSequence::parse("apply(" + std::string(term) + "," + a.descriptor() + ")");

    CheckParams mf = base_params(64, 1 << 13);
    for (int i = 0; i < 4; ++i)
      mf.corruption_family.push_back(
          CorruptionSpec::finite_error({gen.below(16), gen.below(16)}));
    CHECK(check_modfinite(phi, a, b, mf).pass);

    Functional psi = mf_to_ubfb(phi);
    CheckParams ubfb = base_params(64, 1 << 13);
    ubfb.ubfb_floor_targets = {4, 8};
    CHECK(check_ubfb(psi, a, b, ubfb).pass);

    Functional chi = ubfb_to_cf(psi);
    CheckParams cf = base_params(64, 1 << 13);
    for (int i = 0; i < 4; ++i)
      cf.corruption_family.push_back(CorruptionSpec::finite_drop({gen.below(12)}));
    CHECK(check_cofinite(chi, a, b, cf).pass);
  }
}
