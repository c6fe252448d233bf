#include "oraclelab/experiment.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "oraclelab/checkers.hpp"
#include "oraclelab/codings.hpp"
#include "oraclelab/deduction.hpp"
#include "oraclelab/machine.hpp"
#include "oraclelab/rng.hpp"

namespace olab {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field '" + field + "': " + why);
}

// Expands "@name" references to previously defined sequence descriptors or
// functional terms. Longest name wins so "@AB" is not eaten by "@A".
std::string expand_refs(const std::string& text, const std::map<std::string, std::string>& defs) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '@') {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t len = 0;
    while (i + 1 + len < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[i + 1 + len])) ||
            text[i + 1 + len] == '_' || text[i + 1 + len] == '-'))
      ++len;
    if (len == 0)
      config_error("descriptor", "dangling '@' in '" + text + "'");
    bool matched = false;
    for (std::size_t l = len; l >= 1 && !matched; --l) {
      auto it = defs.find(text.substr(i + 1, l));
      if (it != defs.end()) {
        out += it->second;
        i += 1 + l;
        matched = true;
      }
    }
    if (!matched)
      config_error("descriptor", "unknown reference '@" + text.substr(i + 1, len) +
                                     "' (ids must be defined earlier in the config)");
  }
  return out;
}

struct ResolvedConfig {
  std::map<std::string, std::string> sequences;    // id -> descriptor
  std::map<std::string, std::string> functionals;  // id -> term
  struct Item {
    std::string kind;  // check | recover | deduce
    std::string name;
    json body;
  };
  std::vector<Item> items;
};

ResolvedConfig resolve(const ExperimentConfig& config) {
  ResolvedConfig rc;
  const json& raw = config.raw;

  if (raw.contains("sequences")) {
    for (const auto& s : raw.at("sequences")) {
      std::string id = s.at("id").get<std::string>();
      std::string desc = expand_refs(s.at("descriptor").get<std::string>(), rc.sequences);
      BitSequence::parse(desc);  // validate early
      if (!rc.sequences.emplace(id, desc).second) config_error("sequences", "duplicate id " + id);
    }
  }
  if (raw.contains("functionals")) {
    for (const auto& f : raw.at("functionals")) {
      std::string id = f.at("id").get<std::string>();
      std::string term = expand_refs(f.at("term").get<std::string>(), rc.functionals);
      parse_functional(term);
      if (!rc.functionals.emplace(id, term).second)
        config_error("functionals", "duplicate id " + id);
    }
  }

  auto seq_ref = [&rc](const json& j, const std::string& field) {
    if (!j.is_string()) config_error(field, "sequence descriptor expected");
    return expand_refs(j.get<std::string>(), rc.sequences);
  };
  auto fun_ref = [&rc](const json& j, const std::string& field) {
    if (!j.is_string()) config_error(field, "functional term expected");
    return expand_refs(j.get<std::string>(), rc.functionals);
  };

  if (raw.contains("checks")) {
    for (const auto& c : raw.at("checks")) {
      json body = c;
      body["functional"] = fun_ref(c.at("functional"), "checks.functional");
      if (!c.contains("pair") || c.at("pair").size() != 2)
        config_error("checks.pair", "two sequence descriptors expected");
      body["pair"] = json::array(
          {seq_ref(c.at("pair")[0], "checks.pair"), seq_ref(c.at("pair")[1], "checks.pair")});
      rc.items.push_back({"check", c.value("name", "check-" + std::to_string(rc.items.size())),
                          std::move(body)});
    }
  }
  if (raw.contains("recoveries")) {
    for (const auto& r : raw.at("recoveries")) {
      json body = r;
      body["base"] = seq_ref(r.at("base"), "recoveries.base");
      rc.items.push_back({"recover", r.value("name", "recover-" + std::to_string(rc.items.size())),
                          std::move(body)});
    }
  }
  if (raw.contains("deductions")) {
    for (const auto& d : raw.at("deductions")) {
      json body = d;
      body["functional"] = fun_ref(d.at("functional"), "deductions.functional");
      rc.items.push_back({"deduce", d.value("name", "deduce-" + std::to_string(rc.items.size())),
                          std::move(body)});
    }
  }
  return rc;
}

json run_check_item(const json& body) {
  Functional f = parse_functional(body.at("functional").get<std::string>());
  BitSequence a = BitSequence::parse(body.at("pair")[0].get<std::string>());
  BitSequence b = BitSequence::parse(body.at("pair")[1].get<std::string>());
  CheckParams params = CheckParams::from_json(body.value("params", json::object()));
  CheckReport report =
      run_check(body.at("reducibility").get<std::string>(), f, a, b, params);
  return json{{"item", "check"},
              {"pass", report.pass},
              {"pair", body.at("pair")},
              {"report", report.to_json()}};
}

json run_recover_item(const json& body) {
  std::string coding = body.at("coding").get<std::string>();
  if (coding != "r" && coding != "rtilde") config_error("recoveries.coding", "must be r or rtilde");
  BitSequence base = BitSequence::parse(body.at("base").get<std::string>());
  std::uint64_t window = body.value("window", 16ULL);
  std::uint64_t budget = body.value("budget", 1ULL << 20);
  bool corrupt_base = body.value("corruptBase", false);

  std::optional<CorruptionSpec> spec;
  if (body.contains("corruption")) spec = CorruptionSpec::from_json(body.at("corruption"));

  // Route: a total view of the block coding goes through the vote, a partial
  // one through the block search; the divisor coding always uses the odd
  // search.
  BitSequence coded = coding == "r" ? r_coding(base) : rtilde_coding(base);
  PartialOracle oracle;
  std::optional<BitSequence> total;
  if (!spec) {
    total = coded;
    oracle = PartialOracle::total(coded);
  } else if (corrupt_base) {
    CorruptedOracle view = oracle_for(base, *spec);
    PartialOracle base_oracle = as_oracle(view);
    oracle = coding == "r" ? lift_r(base_oracle) : lift_rtilde(base_oracle);
    if (is_total(view))
      total = coding == "r" ? r_coding(total_view(view)) : rtilde_coding(total_view(view));
  } else {
    CorruptedOracle view = oracle_for(coded, *spec);
    oracle = as_oracle(view);
    if (is_total(view)) total = total_view(view);
  }

  json results = json::array();
  bool pass = true;
  std::uint64_t undefined = 0;
  for (std::uint64_t n = 0; n < window; ++n) {
    RecoveryResult res;
    if (coding == "r") {
      res = recover_from_cofinite_r(oracle, n, budget);
    } else if (total) {
      res = recover_from_coarse_rtilde_traced(*total, n);
    } else {
      res = recover_from_generic_rtilde(oracle, n, budget);
    }
    std::string verdict;
    if (!res.output) {
      ++undefined;
      verdict = "undefined";
    } else if (*res.output == base.at(n)) {
      verdict = "ok";
    } else {
      verdict = "wrong";
      if (!total) pass = false;  // truthful oracles must never yield a lie
    }
    results.push_back(json{{"input", n},
                           {"output", res.output ? json(*res.output) : json()},
                           {"queriesIssued", res.queries_issued},
                           {"verdict", verdict}});
  }
  return json{{"item", "recover"},   {"pass", pass},
              {"coding", coding},    {"base", base.to_json()},
              {"corruption", spec ? spec->to_json() : json()},
              {"corruptBase", corrupt_base},
              {"window", window},    {"budget", budget},
              {"undefined", undefined},
              {"results", results}};
}

std::vector<FinitePartialOracle> sigmas_from_json(const json& body) {
  std::vector<FinitePartialOracle> sigmas;
  if (!body.contains("sigmas")) {
    sigmas.push_back({});
    return sigmas;
  }
  const json& s = body.at("sigmas");
  if (s.is_array()) {
    for (const auto& id : s) sigmas.push_back(FinitePartialOracle::parse(id.get<std::string>()));
    return sigmas;
  }
  if (s.contains("random")) {
    const json& r = s.at("random");
    std::uint64_t count = r.value("count", 10ULL);
    std::uint64_t positions = r.value("positions", 64ULL);
    std::uint64_t max_defined = r.value("maxDefined", 3ULL);
    std::uint64_t seed = r.value("seed", 1ULL);
    for (std::uint64_t i = 0; i < count; ++i) {
      SplitMix64 gen(SplitMix64::derive(seed, i));
      FinitePartialOracle sigma;
      std::uint64_t defined = max_defined == 0 ? 0 : gen.below(max_defined + 1);
      while (sigma.assignments.size() < defined) {
        std::uint64_t pos = gen.below(positions);
        sigma.assignments[pos] = static_cast<int>(gen.next() & 1);
      }
      sigmas.push_back(std::move(sigma));
    }
    return sigmas;
  }
  config_error("deductions.sigmas", "expected an array of ids or {random: {...}}");
}

json run_deduce_item(const json& body) {
  Functional f = parse_functional(body.at("functional").get<std::string>());
  std::vector<std::uint64_t> inputs =
      body.value("inputs", std::vector<std::uint64_t>{0});

  const json& mode_json = body.value("mode", json{{"mode", "threshold"}});
  DeductionMode mode;
  std::string mode_name = mode_json.value("mode", "threshold");
  if (mode_name == "exact-counting") {
    mode = DeductionMode::exact_counting(mode_json.value("budget", 256ULL));
  } else if (mode_name == "threshold") {
    mode = DeductionMode::threshold(
        mode_json.value("t", 2ULL), mode_json.value("positionBound", 16ULL),
        mode_json.value("budget", 256ULL), mode_json.value("maxRank", 6ULL));
  } else {
    config_error("deductions.mode", "unknown mode " + mode_name);
  }

  DeductionTable table = deduction_closure(f, inputs, mode, sigmas_from_json(body));
  return json{{"item", "deduce"}, {"pass", true}, {"functional", f.id()}, {"table", table.to_json()}};
}

json run_item(const ResolvedConfig::Item& item) {
  json out;
  if (item.kind == "check") out = run_check_item(item.body);
  else if (item.kind == "recover") out = run_recover_item(item.body);
  else out = run_deduce_item(item.body);
  out["name"] = item.name;
  out["schema"] = kSchemaVersion;
  return out;
}

unsigned worker_count(const ExperimentOptions& options, std::size_t items) {
  unsigned n = options.threads;
  if (n == 0) {
    if (const char* env = std::getenv("ORACLE_LAB_THREADS")) n = std::atoi(env);
  }
  if (n == 0) n = 1;
  return std::min<unsigned>(n, std::max<std::size_t>(items, 1));
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config: " + file.string());
  json j = json::parse(in);
  return parse(j);
}

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& j) {
  ExperimentConfig config;
  config.raw = j;
  config.name = j.value("name", "experiment");
  if (j.contains("schema") && j.at("schema").get<std::string>() != kSchemaVersion)
    config_error("schema", "expected " + std::string(kSchemaVersion));
  // Round-trip sanity: our serialization is canonical.
  if (json::parse(j.dump()) != j) config_error("schema", "config does not round-trip");
  resolve(config);  // validates all references and descriptors up front
  return config;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  ResolvedConfig rc = resolve(config);
  std::filesystem::create_directories(options.output_dir);

  std::vector<json> reports(rc.items.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  unsigned workers = worker_count(options, rc.items.size());
  std::exception_ptr failure;
  std::mutex failure_lock;

  auto work = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= rc.items.size()) return;
      try {
        json first = run_item(rc.items[i]);
        json second = run_item(rc.items[i]);
        if (first.dump() != second.dump())
          throw std::runtime_error("nondeterminism detected in item '" + rc.items[i].name + "'");
        reports[i] = std::move(first);
      } catch (...) {
        std::lock_guard<std::mutex> g(failure_lock);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.all_pass = true;
  json summary = json::array();
  for (std::size_t i = 0; i < rc.items.size(); ++i) {
    const json& report = reports[i];
    bool pass = report.value("pass", false);
    result.all_pass = result.all_pass && pass;

    char index[8];
    std::snprintf(index, sizeof index, "%03zu", i);
    std::filesystem::path file =
        options.output_dir / (std::string(index) + "-" + rc.items[i].name + ".json");
    std::ofstream out(file);
    out << report.dump(2) << "\n";
    result.report_files.push_back(file);

    std::string line = std::string(pass ? "pass" : "FAIL") + "  " + rc.items[i].kind + "  " +
                       rc.items[i].name;
    result.summary_lines.push_back(line);
    summary.push_back(json{{"name", rc.items[i].name},
                           {"kind", rc.items[i].kind},
                           {"pass", pass},
                           {"file", file.filename().string()}});
  }

  json summary_doc{{"schema", kSchemaVersion},
                   {"name", config.name},
                   {"allPass", result.all_pass},
                   {"items", summary}};
  if (options.timestamp) {
    auto now = std::chrono::system_clock::now();
    summary_doc["generatedAt"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  }
  std::ofstream sj(options.output_dir / "summary.json");
  sj << summary_doc.dump(2) << "\n";
  std::ofstream st(options.output_dir / "summary.txt");
  for (const std::string& line : result.summary_lines) st << line << "\n";
  return result;
}

ReplayResult replay_witness(const nlohmann::json& check_report, std::size_t witness_index) {
  const json& report = check_report.contains("report") ? check_report.at("report") : check_report;
  const json& witnesses = report.at("witnesses");
  if (witness_index >= witnesses.size())
    throw std::invalid_argument("witness index out of range");
  const json& w = witnesses.at(witness_index);

  ReplayResult result;
  result.stored_trace_jsonl = w.at("trace").get<std::string>();
  if (result.stored_trace_jsonl.empty())
    throw std::invalid_argument("witness is an aggregate verdict, not a single replayable run");

  Functional f = parse_functional(report.at("functional").get<std::string>());
  std::string desc =
      report.at("statistics").at("sequences").at("a").at("parameters").get<std::string>();
  BitSequence a = BitSequence::parse(desc);
  std::uint64_t budget = report.at("params").at("budget").get<std::uint64_t>();
  std::uint64_t input = w.at("input").get<std::uint64_t>();

  PartialOracle oracle;
  if (w.at("spec").contains("kind") && w.at("spec").at("kind") == "exact") {
    oracle = PartialOracle::total(a);
  } else {
    oracle = as_oracle(oracle_for(a, CorruptionSpec::from_json(w.at("spec"))));
  }
  RunOutcome outcome = run(f, oracle, input, budget);
  result.trace_jsonl = outcome.trace.to_jsonl();
  result.matches = result.trace_jsonl == result.stored_trace_jsonl;
  return result;
}

}  // namespace olab
