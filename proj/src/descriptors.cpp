#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "oraclelab/codings.hpp"
#include "oraclelab/machine.hpp"
#include "oraclelab/sequences.hpp"

namespace olab {

namespace {

std::uint64_t parse_u64(const std::string& s) {
  try {
    return std::stoull(s);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("number expected in descriptor: " + s);
  }
}

std::vector<std::uint64_t> parse_csv(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    out.push_back(parse_u64(csv.substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// head(args) with args split on top-level commas; head may carry ":" params.
bool split_call(const std::string& term, std::string& head, std::vector<std::string>& args) {
  std::size_t open = term.find('(');
  if (open == std::string::npos || term.back() != ')') return false;
  head = term.substr(0, open);
  int depth = 0;
  std::size_t start = open + 1;
  for (std::size_t i = open + 1; i + 1 < term.size(); ++i) {
    char c = term[i];
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      args.push_back(term.substr(start, i - start));
      start = i + 1;
    }
  }
  args.push_back(term.substr(start, term.size() - 1 - start));
  return true;
}

std::vector<std::string> split_params(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = s.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, colon - start));
    start = colon + 1;
  }
  return parts;
}

BitSequence flip_at(const BitSequence& base, std::vector<std::uint64_t> positions,
                    const std::string& csv) {
  auto flips = std::make_shared<std::unordered_set<std::uint64_t>>(positions.begin(),
                                                                   positions.end());
  return BitSequence::derived(
      "flipat:" + csv + "(" + base.descriptor() + ")",
      [base, flips](std::uint64_t n) { return flips->count(n) ? 1 - base.at(n) : base.at(n); },
      false);
}

BitSequence apply_functional(const std::string& term, const BitSequence& base) {
  Functional f = parse_functional(term);
  std::string desc = "apply(" + term + "," + base.descriptor() + ")";
  // Evaluated lazily per position; total by contract of the chosen term.
  constexpr std::uint64_t kApplyBudget = 100000;
  return BitSequence::derived(
      desc,
      [f, base](std::uint64_t n) {
        RunOutcome outcome = run(f, base, n, kApplyBudget);
        if (!outcome.halted())
          throw std::runtime_error("apply(" + f.id() + ") did not halt at input " +
                                   std::to_string(n));
        return outcome.output;
      },
      true);
}

}  // namespace

BitSequence BitSequence::parse(const std::string& descriptor) {
  if (descriptor.empty()) throw std::invalid_argument("empty sequence descriptor");

  std::string head;
  std::vector<std::string> args;
  if (split_call(descriptor, head, args)) {
    std::vector<std::string> hp = split_params(head);
    const std::string& name = hp[0];
    if (name == "complement" && args.size() == 1) {
      BitSequence inner = parse(args[0]);
      return derived("complement(" + inner.descriptor() + ")",
                     [inner](std::uint64_t n) { return 1 - inner.at(n); }, false);
    }
    if (name == "flipat" && hp.size() == 2 && args.size() == 1)
      return flip_at(parse(args[0]), parse_csv(hp[1]), hp[1]);
    if (name == "join" && args.size() == 2) return turing_join(parse(args[0]), parse(args[1]));
    if (name == "r" && args.size() == 1) return r_coding(parse(args[0]));
    if (name == "rtilde" && args.size() == 1) return rtilde_coding(parse(args[0]));
    if (name == "column" && hp.size() == 2 && args.size() == 1)
      return column(parse(args[0]), parse_u64(hp[1]));
    if (name == "apply" && args.size() == 2) return apply_functional(args[0], parse(args[1]));
    throw std::invalid_argument("unknown sequence combinator: " + descriptor);
  }

  std::vector<std::string> parts = split_params(descriptor);
  const std::string& name = parts[0];
  if (name == "zeros") return zeros();
  if (name == "ones") return ones();
  if (name == "alternating") return alternating();
  if (name == "periodic") {
    if (parts.size() < 2) throw std::invalid_argument("periodic needs a pattern");
    std::string text = parts[1];
    if (parts.size() > 2) text += ":" + parts[2];
    return periodic(EventuallyPeriodicSet::parse(text));
  }
  if (name == "prefix") {
    if (parts.size() < 2) throw std::invalid_argument("prefix needs bits");
    std::vector<int> bits;
    for (char c : parts[1]) {
      if (c != '0' && c != '1') throw std::invalid_argument("prefix bits must be 0/1");
      bits.push_back(c - '0');
    }
    int def = parts.size() > 2 ? static_cast<int>(parse_u64(parts[2])) : 0;
    return from_prefix(std::move(bits), def);
  }
  if (name == "random") {
    if (parts.size() < 2) throw std::invalid_argument("random needs a seed");
    std::uint64_t seed = parse_u64(parts[1]);
    std::size_t len = parts.size() > 2 ? parse_u64(parts[2]) : 64;
    return random_prefix(seed, len);
  }
  throw std::invalid_argument("unknown sequence descriptor: " + descriptor);
}

}  // namespace olab
