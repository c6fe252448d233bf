#include "oraclelab/checkers.hpp"

#include <algorithm>
#include <stdexcept>

namespace olab {

namespace {

constexpr std::int64_t kExactSpec = -1;

nlohmann::json exact_spec_json() { return nlohmann::json{{"kind", "exact"}}; }

std::string bit_str(int b) { return b ? "1" : "0"; }

Witness make_witness(std::int64_t spec_index, const nlohmann::json& spec, std::uint64_t input,
                     std::string expected, std::string got, std::string detail,
                     const RunOutcome& outcome) {
  Witness w;
  w.spec_index = static_cast<std::size_t>(spec_index < 0 ? 0 : spec_index);
  w.spec = spec;
  if (spec_index < 0) w.spec = exact_spec_json();
  w.input = input;
  w.expected = std::move(expected);
  w.got = std::move(got);
  w.detail = std::move(detail);
  w.trace_jsonl = outcome.trace.to_jsonl();
  return w;
}

struct CheckContext {
  const Functional& f;
  const BitSequence& a;
  const BitSequence& b;
  const CheckParams& params;
  CheckReport report;

  CheckContext(const std::string& reducibility, const Functional& f_, const BitSequence& a_,
               const BitSequence& b_, const CheckParams& params_)
      : f(f_), a(a_), b(b_), params(params_) {
    if (params.input_window == 0) throw std::invalid_argument("inputWindow must be positive");
    if (params.input_window > params.oracle_window)
      throw std::invalid_argument("inputWindow must not exceed oracleWindow");
    if (params.density_floor <= Ratio(0) || params.density_floor > Ratio(1))
      throw std::invalid_argument("densityFloor must lie in (0,1]");
    report.reducibility = reducibility;
    report.functional = f.id();
    report.params_echo = params.to_json();
    report.statistics = nlohmann::json::object();
    report.pass = true;
  }

  void fail(Witness w) {
    report.pass = false;
    report.witnesses.push_back(std::move(w));
  }

  CheckReport finish() {
    report.statistics["sequences"] =
        nlohmann::json{{"a", a.to_json()}, {"b", b.to_json()}};
    return std::move(report);
  }
};

// Runs the functional over the whole input window against one oracle.
// on_outcome(input, outcome) -> true to keep scanning this spec.
template <typename Fn>
void sweep(CheckContext& ctx, const PartialOracle& oracle, Fn&& on_outcome) {
  for (std::uint64_t n = 0; n < ctx.params.input_window; ++n) {
    RunOutcome outcome = run(ctx.f, oracle, n, ctx.params.budget);
    if (!on_outcome(n, outcome)) return;
  }
}

Ratio tail_fraction(const std::vector<bool>& flags, std::uint64_t window) {
  std::uint64_t lo = window / 2;
  std::int64_t hits = 0;
  for (std::uint64_t n = lo; n < window; ++n) hits += flags[n] ? 1 : 0;
  return Ratio(hits, static_cast<std::int64_t>(window - lo));
}

// Alternative density scope: the floor must hold on every full dyadic block
// beyond the slack.
bool blocks_meet_floor(const std::vector<bool>& flags, const CheckParams& params) {
  for (std::uint64_t j = 0; (2ULL << j) <= params.input_window; ++j) {
    std::uint64_t lo = 1ULL << j;
    if (lo < std::max<std::uint64_t>(1, params.slack())) continue;
    std::int64_t hits = 0;
    for (std::uint64_t n = lo; n < 2 * lo; ++n) hits += flags[n] ? 1 : 0;
    if (Ratio(hits, static_cast<std::int64_t>(lo)) < params.density_floor) return false;
  }
  return true;
}

bool density_ok(const std::vector<bool>& flags, const CheckParams& params, Ratio& tail_out) {
  tail_out = tail_fraction(flags, params.input_window);
  if (params.density_scope == "blocks") return blocks_meet_floor(flags, params);
  return tail_out >= params.density_floor;
}

void require_kinds(const std::vector<CorruptionSpec>& family,
                   std::initializer_list<const char*> kinds, const std::string& checker) {
  for (const CorruptionSpec& spec : family) {
    bool ok = false;
    for (const char* k : kinds) ok = ok || spec.kind == k;
    if (!ok)
      throw std::invalid_argument(checker + " cannot use corruption kind '" + spec.kind + "'");
  }
}

// The exact oracle is the base case of every definition that demands
// agreement with B on the uncorrupted sequence.
bool check_exact_run(CheckContext& ctx) {
  bool ok = true;
  sweep(ctx, PartialOracle::total(ctx.a), [&](std::uint64_t n, RunOutcome& outcome) {
    if (!outcome.halted()) {
      ctx.fail(make_witness(kExactSpec, {}, n, bit_str(ctx.b.at(n)), "pending",
                            "functional must halt on the exact oracle", outcome));
      ok = false;
      return false;
    }
    if (outcome.output != ctx.b.at(n)) {
      ctx.fail(make_witness(kExactSpec, {}, n, bit_str(ctx.b.at(n)), bit_str(outcome.output),
                            "functional disagrees with target on the exact oracle", outcome));
      ok = false;
      return false;
    }
    return true;
  });
  return ok;
}

}  // namespace

nlohmann::json CheckParams::to_json() const {
  nlohmann::json family = nlohmann::json::array();
  for (const CorruptionSpec& s : corruption_family) family.push_back(s.to_json());
  return nlohmann::json{{"inputWindow", input_window},
                        {"oracleWindow", oracle_window},
                        {"budget", budget},
                        {"corruptionFamily", family},
                        {"cofiniteSlack", slack()},
                        {"densityFloor", to_string(density_floor)},
                        {"periodCap", period_cap},
                        {"ubfbFloorTargets", ubfb_floor_targets},
                        {"useIssuedPositions", use_issued_positions},
                        {"densityScope", density_scope}};
}

CheckParams CheckParams::from_json(const nlohmann::json& j) {
  CheckParams p;
  p.input_window = j.value("inputWindow", 64ULL);
  p.oracle_window = j.value("oracleWindow", std::max<std::uint64_t>(4096, p.input_window));
  p.budget = j.value("budget", 10000ULL);
  if (j.contains("corruptionFamily"))
    for (const auto& s : j.at("corruptionFamily")) p.corruption_family.push_back(CorruptionSpec::from_json(s));
  if (j.contains("cofiniteSlack")) p.cofinite_slack = j.at("cofiniteSlack").get<std::uint64_t>();
  if (j.contains("densityFloor")) p.density_floor = parse_ratio(j.at("densityFloor").get<std::string>());
  p.period_cap = j.value("periodCap", 16ULL);
  if (j.contains("ubfbFloorTargets"))
    p.ubfb_floor_targets = j.at("ubfbFloorTargets").get<std::vector<std::uint64_t>>();
  p.use_issued_positions = j.value("useIssuedPositions", false);
  p.density_scope = j.value("densityScope", "tail");
  return p;
}

nlohmann::json Witness::to_json() const {
  return nlohmann::json{{"specIndex", spec_index}, {"spec", spec},         {"input", input},
                        {"expected", expected},    {"got", got},           {"detail", detail},
                        {"trace", trace_jsonl}};
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json ws = nlohmann::json::array();
  for (const Witness& w : witnesses) ws.push_back(w.to_json());
  return nlohmann::json{{"verdict", pass ? "pass" : "fail"},
                        {"reducibility", reducibility},
                        {"functional", functional},
                        {"witnesses", ws},
                        {"statistics", statistics},
                        {"params", params_echo}};
}

CheckReport check_modfinite(const Functional& f, const BitSequence& a, const BitSequence& b,
                            const CheckParams& params) {
  require_kinds(params.corruption_family, {"finite-error"}, "check_modfinite");
  CheckContext ctx("mf", f, a, b, params);
  check_exact_run(ctx);

  nlohmann::json per_spec = nlohmann::json::array();
  for (std::size_t i = 0; i < params.corruption_family.size(); ++i) {
    const CorruptionSpec& spec = params.corruption_family[i];
    PartialOracle oracle = as_oracle(oracle_for(a, spec));
    std::vector<std::uint64_t> disagreements;
    sweep(ctx, oracle, [&](std::uint64_t n, RunOutcome& outcome) {
      if (!outcome.halted()) {
        ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), "pending",
                              "mod-finite computation must be total", outcome));
        return true;
      }
      if (outcome.output != b.at(n)) {
        disagreements.push_back(n);
        if (n >= params.slack())
          ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), bit_str(outcome.output),
                                "disagreement beyond the cofinite slack", outcome));
      }
      return true;
    });
    per_spec.push_back(nlohmann::json{{"spec", spec.to_json()}, {"disagreements", disagreements}});
  }
  ctx.report.statistics["perSpec"] = per_spec;
  return ctx.finish();
}

CheckReport check_cofinite(const Functional& f, const BitSequence& a, const BitSequence& b,
                           const CheckParams& params) {
  require_kinds(params.corruption_family, {"finite-drop", "cofinite-domain"}, "check_cofinite");
  CheckContext ctx("cf", f, a, b, params);
  check_exact_run(ctx);

  nlohmann::json per_spec = nlohmann::json::array();
  for (std::size_t i = 0; i < params.corruption_family.size(); ++i) {
    const CorruptionSpec& spec = params.corruption_family[i];
    PartialOracle oracle = as_oracle(oracle_for(a, spec));
    std::vector<std::uint64_t> undefined;
    sweep(ctx, oracle, [&](std::uint64_t n, RunOutcome& outcome) {
      if (!outcome.halted()) {
        undefined.push_back(n);
        if (n >= params.slack())
          ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), "pending",
                                "undefined beyond the cofinite slack", outcome));
        return true;
      }
      if (outcome.output != b.at(n))
        ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), bit_str(outcome.output),
                              "never-lie violation: false output from a truthful oracle", outcome));
      return true;
    });
    per_spec.push_back(nlohmann::json{{"spec", spec.to_json()}, {"undefined", undefined}});
  }
  ctx.report.statistics["perSpec"] = per_spec;
  return ctx.finish();
}

CheckReport check_generic(const Functional& f, const BitSequence& a, const BitSequence& b,
                          const CheckParams& params) {
  require_kinds(params.corruption_family, {"density1-domain"}, "check_generic");
  CheckContext ctx("g", f, a, b, params);
  check_exact_run(ctx);

  nlohmann::json per_spec = nlohmann::json::array();
  for (std::size_t i = 0; i < params.corruption_family.size(); ++i) {
    const CorruptionSpec& spec = params.corruption_family[i];
    PartialOracle oracle = as_oracle(oracle_for(a, spec));
    std::vector<bool> defined(params.input_window, false);
    sweep(ctx, oracle, [&](std::uint64_t n, RunOutcome& outcome) {
      if (!outcome.halted()) return true;
      defined[n] = true;
      if (outcome.output != b.at(n))
        ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), bit_str(outcome.output),
                              "never-lie violation: false output from a truthful oracle", outcome));
      return true;
    });
    Ratio tail{0};
    if (!density_ok(defined, params, tail)) {
      RunOutcome empty;
      ctx.fail(make_witness(i, spec.to_json(), params.input_window, ">= " + to_string(params.density_floor),
                            to_string(tail), "output-domain density below the floor", empty));
    }
    per_spec.push_back(
        nlohmann::json{{"spec", spec.to_json()}, {"definedTailDensity", to_string(tail)}});
  }
  ctx.report.statistics["perSpec"] = per_spec;
  return ctx.finish();
}

CheckReport check_coarse(const Functional& f, const BitSequence& a, const BitSequence& b,
                         const CheckParams& params) {
  require_kinds(params.corruption_family, {"density-error"}, "check_coarse");
  for (const CorruptionSpec& spec : params.corruption_family) {
    Ratio fraction = parse_ratio(spec.parameters.at("fraction").get<std::string>());
    if (fraction > Ratio(1) - params.density_floor)
      throw std::invalid_argument("density-error fraction exceeds 1 - densityFloor");
  }
  CheckContext ctx("cor", f, a, b, params);
  check_exact_run(ctx);

  nlohmann::json per_spec = nlohmann::json::array();
  for (std::size_t i = 0; i < params.corruption_family.size(); ++i) {
    const CorruptionSpec& spec = params.corruption_family[i];
    PartialOracle oracle = as_oracle(oracle_for(a, spec));
    std::vector<bool> agree(params.input_window, false);
    sweep(ctx, oracle, [&](std::uint64_t n, RunOutcome& outcome) {
      if (!outcome.halted()) {
        ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), "pending",
                              "coarse computation must be total", outcome));
        return true;
      }
      agree[n] = outcome.output == b.at(n);
      return true;
    });
    Ratio tail{0};
    if (!density_ok(agree, params, tail)) {
      RunOutcome empty;
      ctx.fail(make_witness(i, spec.to_json(), params.input_window, ">= " + to_string(params.density_floor),
                            to_string(tail), "agreement density below the floor", empty));
    }
    per_spec.push_back(
        nlohmann::json{{"spec", spec.to_json()}, {"agreementTailDensity", to_string(tail)}});
  }
  ctx.report.statistics["perSpec"] = per_spec;
  return ctx.finish();
}

CheckReport check_modrecursive(const Functional& f, const BitSequence& a, const BitSequence& b,
                               const CheckParams& params) {
  require_kinds(params.corruption_family, {"eventually-periodic-difference"}, "check_modrecursive");
  CheckContext ctx("mr", f, a, b, params);
  check_exact_run(ctx);

  nlohmann::json per_spec = nlohmann::json::array();
  for (std::size_t i = 0; i < params.corruption_family.size(); ++i) {
    const CorruptionSpec& spec = params.corruption_family[i];
    PartialOracle oracle = as_oracle(oracle_for(a, spec));
    std::vector<int> agreement(params.input_window, 0);
    bool total = true;
    sweep(ctx, oracle, [&](std::uint64_t n, RunOutcome& outcome) {
      if (!outcome.halted()) {
        ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), "pending",
                              "mod-recursive computation must be total", outcome));
        total = false;
        return true;
      }
      agreement[n] = outcome.output == b.at(n) ? 1 : 0;
      return true;
    });
    auto detected = EventuallyPeriodicSet::detect(agreement, params.period_cap, params.slack());
    if (total && !detected) {
      RunOutcome empty;
      ctx.fail(make_witness(i, spec.to_json(), 0, "eventually periodic agreement set",
                            "no period <= " + std::to_string(params.period_cap) + " with transient <= " +
                                std::to_string(params.slack()),
                            "agreement set not recognized as decidable", empty));
    }
    nlohmann::json entry{{"spec", spec.to_json()},
                         {"surrogate", "eventual periodicity approximates exact decidability"}};
    if (detected) entry["detected"] = detected->to_string();
    per_spec.push_back(entry);
  }
  ctx.report.statistics["perSpec"] = per_spec;
  return ctx.finish();
}

CheckReport check_ii(const Functional& f, const BitSequence& a, const BitSequence& b,
                     const CheckParams& params) {
  require_kinds(params.corruption_family, {"infinite-sparse-domain"}, "check_ii");
  if (params.corruption_family.size() < 2)
    throw std::invalid_argument("check_ii needs a chain of at least two sparse domains");
  std::vector<std::vector<std::uint64_t>> chain;
  for (const CorruptionSpec& spec : params.corruption_family) {
    auto positions = spec.parameters.at("positions").get<std::vector<std::uint64_t>>();
    std::sort(positions.begin(), positions.end());
    chain.push_back(std::move(positions));
  }
  for (std::size_t i = 1; i < chain.size(); ++i) {
    bool strict = chain[i - 1].size() < chain[i].size() &&
                  std::includes(chain[i].begin(), chain[i].end(), chain[i - 1].begin(),
                                chain[i - 1].end());
    if (!strict)
      throw std::invalid_argument("sparse-domain chain must be strictly increasing");
  }

  CheckContext ctx("ii", f, a, b, params);
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < params.corruption_family.size(); ++i) {
    const CorruptionSpec& spec = params.corruption_family[i];
    PartialOracle oracle = as_oracle(oracle_for(a, spec));
    std::uint64_t produced = 0;
    sweep(ctx, oracle, [&](std::uint64_t n, RunOutcome& outcome) {
      if (!outcome.halted()) return true;
      ++produced;
      if (outcome.output != b.at(n))
        ctx.fail(make_witness(i, spec.to_json(), n, bit_str(b.at(n)), bit_str(outcome.output),
                              "never-lie violation: false output from a truthful oracle", outcome));
      return true;
    });
    counts.push_back(produced);
    if (i > 0 && counts[i] <= counts[i - 1]) {
      RunOutcome empty;
      ctx.fail(make_witness(i, spec.to_json(), 0, "> " + std::to_string(counts[i - 1]) + " outputs",
                            std::to_string(counts[i]) + " outputs",
                            "output count did not grow along the domain chain", empty));
    }
  }
  ctx.report.statistics["outputCounts"] = counts;
  return ctx.finish();
}

CheckReport check_ubfb(const Functional& f, const BitSequence& a, const BitSequence& b,
                       const CheckParams& params) {
  CheckContext ctx("ubfb", f, a, b, params);

  std::vector<std::optional<std::uint64_t>> min_queried(params.input_window);
  std::vector<std::string> traces(params.input_window);
  sweep(ctx, PartialOracle::total(a), [&](std::uint64_t n, RunOutcome& outcome) {
    if (!outcome.halted()) {
      ctx.fail(make_witness(kExactSpec, {}, n, bit_str(b.at(n)), "pending",
                            "functional must halt on the exact oracle", outcome));
      return true;
    }
    if (outcome.output != b.at(n))
      ctx.fail(make_witness(kExactSpec, {}, n, bit_str(b.at(n)), bit_str(outcome.output),
                            "functional disagrees with target on the exact oracle", outcome));
    min_queried[n] = params.use_issued_positions ? outcome.trace.min_issued : outcome.trace.min_used;
    traces[n] = outcome.trace.to_jsonl();
    return true;
  });

  nlohmann::json profile = nlohmann::json::array();
  for (const auto& m : min_queried) profile.push_back(m ? nlohmann::json(*m) : nlohmann::json());
  ctx.report.statistics["minQueryProfile"] = profile;

  for (std::uint64_t target : params.ubfb_floor_targets) {
    std::optional<std::uint64_t> last_violation;
    for (std::uint64_t n = 0; n < params.input_window; ++n)
      if (min_queried[n] && *min_queried[n] <= target) last_violation = n;
    // Passing needs some n0 < N_in with every input from n0 on querying
    // strictly above the target.
    if (last_violation && *last_violation + 1 >= params.input_window) {
      std::uint64_t n = *last_violation;
      RunOutcome empty;
      Witness w = make_witness(kExactSpec, {}, n, "min queried position > " + std::to_string(target),
                               "m = " + std::to_string(*min_queried[n]),
                               "low position still queried at the window end", empty);
      w.trace_jsonl = traces[n];
      ctx.fail(std::move(w));
    }
  }
  return ctx.finish();
}

CheckReport run_check(const std::string& reducibility, const Functional& f, const BitSequence& a,
                      const BitSequence& b, const CheckParams& params) {
  if (reducibility == "mf") return check_modfinite(f, a, b, params);
  if (reducibility == "cf") return check_cofinite(f, a, b, params);
  if (reducibility == "g") return check_generic(f, a, b, params);
  if (reducibility == "cor") return check_coarse(f, a, b, params);
  if (reducibility == "mr") return check_modrecursive(f, a, b, params);
  if (reducibility == "ii") return check_ii(f, a, b, params);
  if (reducibility == "ubfb") return check_ubfb(f, a, b, params);
  throw std::invalid_argument("unknown reducibility tag: " + reducibility);
}

}  // namespace olab
