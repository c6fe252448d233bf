#pragma once

#include <cstdint>

namespace olab {

// splitmix64 (Steele, Lea, Flood 2014). Chosen because the whole generator is
// three lines of arithmetic that any language can reproduce bit-exactly, and
// because independent streams can be derived by hashing a stream id into the
// seed. All corruption masks in this project are defined in terms of this
// generator; see README for the exact derivation rules.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform value in [0, bound). bound = 0 is rejected.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  // Derives the seed of an independent child stream. Mixing the id through
  // one splitmix step keeps nearby ids from producing correlated streams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream_id) {
    SplitMix64 g(seed ^ (0x5851f42d4c957f2dULL + stream_id));
    return g.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace olab
