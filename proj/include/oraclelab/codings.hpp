#pragma once

#include <cstdint>
#include <optional>

#include "oraclelab/machine.hpp"
#include "oraclelab/oracles.hpp"
#include "oraclelab/sequences.hpp"

namespace olab {

// Position codings. Position 0 belongs to neither image: it has no odd-part
// factorization and no power of two below it, which keeps both codings
// bijective on positions >= 1.
//   r_member(S, p)       p = 2^n * m, m odd  ->  S(n)
//   rtilde_member(S, p)  2^n <= p < 2^{n+1}  ->  S(n)
int r_member(const BitSequence& base, std::uint64_t pos);
int rtilde_member(const BitSequence& base, std::uint64_t pos);

BitSequence r_coding(const BitSequence& base);
BitSequence rtilde_coding(const BitSequence& base);
BitSequence turing_join(const BitSequence& even_side, const BitSequence& odd_side);

// The k-th embedded copy: n -> X(2^n * (2k+1)).
BitSequence column(const BitSequence& coded, std::uint64_t k);

// Lifts a partial oracle for S to one for the block coding of S: position p
// is defined exactly when the S-oracle is defined at the block index of p.
PartialOracle lift_rtilde(const PartialOracle& oracle_s);
PartialOracle lift_r(const PartialOracle& oracle_s);

struct RecoveryResult {
  std::optional<int> output;  // nullopt = undefined within budget
  std::uint64_t queries_issued = 0;
  RunOutcome raw;
};

// Block-search recovery: ask every position of block n concurrently, answer
// with the first resolution. Sound for never-lying oracles; undefined iff no
// block position resolves within budget.
RecoveryResult recover_from_generic_rtilde(const PartialOracle& coded, std::uint64_t n,
                                           std::uint64_t budget);

// Voting recovery from a total (possibly wrong) view of the block coding:
// scan block n in increasing order, halt once one answer value has been seen
// 2^{n-1} times. Always halts; block 0 answers T(1) directly.
int recover_from_coarse_rtilde(const BitSequence& coded_view, std::uint64_t n);
RecoveryResult recover_from_coarse_rtilde_traced(const BitSequence& coded_view, std::uint64_t n);

// Odd-multiple search over the divisor coding: ask 2^n * m for odd m until
// one resolves. A cofinite oracle can fail only finitely often, so with
// sufficient budget this halts for every n.
RecoveryResult recover_from_cofinite_r(const PartialOracle& coded, std::uint64_t n,
                                       std::uint64_t budget);

struct EmbeddingResult {
  std::optional<int> output;
  std::uint64_t column_found = 0;     // l for the first halting column run
  std::uint64_t ticks_consumed = 0;   // total sub-ticks over all attempts
};

// Column search from the proof that the divisor coding embeds into the
// mod-finite order: dovetail phi over columns l > k (round r gives columns
// k+1..k+r a budget of r each) and return the first halting output.
EmbeddingResult mf_embedding_reduction(const Functional& phi, const BitSequence& coded_view,
                                       std::uint64_t k, std::uint64_t budget);

// Transfers a partial oracle through an injective affine map f(n) = a*n + b:
// the result is defined at f(n) exactly when oracle_b is defined at n, with
// matching bit and delay; positions outside the range stay pending.
PartialOracle ii_from_one_reduction(std::uint64_t a, std::uint64_t b,
                                    const PartialOracle& oracle_b);

}  // namespace olab
