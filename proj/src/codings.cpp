#include "oraclelab/codings.hpp"

#include <stdexcept>

namespace olab {

namespace {

std::uint64_t floor_log2(std::uint64_t p) {
  return 63 - static_cast<std::uint64_t>(__builtin_clzll(p));
}

std::uint64_t count_issued(const Trace& trace) {
  std::uint64_t n = 0;
  for (const TraceStep& s : trace.steps)
    if (s.kind == TraceStep::Kind::issued) ++n;
  return n;
}

RecoveryResult from_outcome(RunOutcome outcome) {
  RecoveryResult res;
  res.queries_issued = count_issued(outcome.trace);
  if (outcome.halted()) res.output = outcome.output;
  res.raw = std::move(outcome);
  return res;
}

}  // namespace

int r_member(const BitSequence& base, std::uint64_t pos) {
  if (pos == 0) return 0;
  return base.at(static_cast<std::uint64_t>(__builtin_ctzll(pos)));
}

int rtilde_member(const BitSequence& base, std::uint64_t pos) {
  if (pos == 0) return 0;
  return base.at(floor_log2(pos));
}

BitSequence r_coding(const BitSequence& base) {
  return BitSequence::derived("r(" + base.descriptor() + ")",
                              [base](std::uint64_t p) { return r_member(base, p); }, false);
}

BitSequence rtilde_coding(const BitSequence& base) {
  return BitSequence::derived("rtilde(" + base.descriptor() + ")",
                              [base](std::uint64_t p) { return rtilde_member(base, p); }, false);
}

BitSequence turing_join(const BitSequence& even_side, const BitSequence& odd_side) {
  std::string desc = "join(" + even_side.descriptor() + "," + odd_side.descriptor() + ")";
  return BitSequence::derived(
      desc,
      [even_side, odd_side](std::uint64_t n) {
        return n % 2 == 0 ? even_side.at(n / 2) : odd_side.at((n - 1) / 2);
      },
      false);
}

BitSequence column(const BitSequence& coded, std::uint64_t k) {
  std::string desc = "column:" + std::to_string(k) + "(" + coded.descriptor() + ")";
  return BitSequence::derived(
      desc,
      [coded, k](std::uint64_t n) {
        if (n >= 62 || (2 * k + 1) > (1ULL << (62 - n)))
          throw std::domain_error("column position overflows the desk-scale range");
        return coded.at((1ULL << n) * (2 * k + 1));
      },
      false);
}

PartialOracle lift_rtilde(const PartialOracle& oracle_s) {
  return PartialOracle::derived(
      [oracle_s](std::uint64_t pos) -> std::optional<OracleEntry> {
        if (pos == 0) return std::nullopt;
        return oracle_s.entry(floor_log2(pos));
      },
      "rtilde-lift(" + oracle_s.domain_descriptor() + ")");
}

PartialOracle lift_r(const PartialOracle& oracle_s) {
  return PartialOracle::derived(
      [oracle_s](std::uint64_t pos) -> std::optional<OracleEntry> {
        if (pos == 0) return std::nullopt;
        return oracle_s.entry(static_cast<std::uint64_t>(__builtin_ctzll(pos)));
      },
      "r-lift(" + oracle_s.domain_descriptor() + ")");
}

RecoveryResult recover_from_generic_rtilde(const PartialOracle& coded, std::uint64_t n,
                                           std::uint64_t budget) {
  static const Functional search = parse_functional("block-search");
  return from_outcome(run(search, coded, n, budget));
}

RecoveryResult recover_from_coarse_rtilde_traced(const BitSequence& coded_view, std::uint64_t n) {
  static const Functional vote = parse_functional("block-vote");
  // A sequential scan of block n takes two ticks per question; the vote
  // always halts by pigeonhole well inside this bound.
  std::uint64_t budget = 8 * (1ULL << n) + 64;
  RunOutcome outcome = run(vote, PartialOracle::total(coded_view), n, budget);
  if (!outcome.halted()) throw std::logic_error("voting recovery failed to halt on total view");
  return from_outcome(std::move(outcome));
}

int recover_from_coarse_rtilde(const BitSequence& coded_view, std::uint64_t n) {
  return *recover_from_coarse_rtilde_traced(coded_view, n).output;
}

RecoveryResult recover_from_cofinite_r(const PartialOracle& coded, std::uint64_t n,
                                       std::uint64_t budget) {
  static const Functional search = parse_functional("odd-search");
  return from_outcome(run(search, coded, n, budget));
}

EmbeddingResult mf_embedding_reduction(const Functional& phi, const BitSequence& coded_view,
                                       std::uint64_t k, std::uint64_t budget) {
  EmbeddingResult res;
  // Fair dovetailing: round r grants columns k+1 .. k+r a budget of r ticks
  // each, re-simulated from scratch; the first halting attempt wins.
  for (std::uint64_t r = 1;; ++r) {
    for (std::uint64_t l = k + 1; l <= k + r; ++l) {
      if (res.ticks_consumed + r > budget) return res;
      RunOutcome outcome = run(phi, column(coded_view, l), k, r);
      res.ticks_consumed += outcome.ticks_used;
      if (outcome.halted()) {
        res.output = outcome.output;
        res.column_found = l;
        return res;
      }
    }
  }
}

PartialOracle ii_from_one_reduction(std::uint64_t a, std::uint64_t b,
                                    const PartialOracle& oracle_b) {
  if (a == 0) throw std::invalid_argument("affine map must be injective (a >= 1)");
  return PartialOracle::derived(
      [a, b, oracle_b](std::uint64_t m) -> std::optional<OracleEntry> {
        if (m < b || (m - b) % a != 0) return std::nullopt;  // outside the range
        return oracle_b.entry((m - b) / a);
      },
      "one-reduction(" + std::to_string(a) + "n+" + std::to_string(b) + ")");
}

}  // namespace olab
