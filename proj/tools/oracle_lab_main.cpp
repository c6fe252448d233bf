#include <unistd.h>

#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "oraclelab/checkers.hpp"
#include "oraclelab/codings.hpp"
#include "oraclelab/deduction.hpp"
#include "oraclelab/experiment.hpp"
#include "oraclelab/machine.hpp"
#include "oraclelab/rng.hpp"

namespace {

using nlohmann::json;

json load_json_arg(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') {
    std::ifstream in(arg.substr(1));
    if (!in) throw std::runtime_error("cannot open " + arg.substr(1));
    return json::parse(in);
  }
  return json::parse(arg);
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  out << doc.dump(2) << "\n";
}

// "descA,descB" split at the top-level comma.
std::pair<std::string, std::string> split_pair(const std::string& text) {
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') --depth;
    if (c == ',' && depth == 0) return {text.substr(0, i), text.substr(i + 1)};
  }
  throw std::runtime_error("--pair needs two comma-separated descriptors");
}

int cmd_check(const std::string& reducibility, const std::string& term, const std::string& pair,
              const std::string& params_arg, std::uint64_t budget, std::uint64_t window,
              const std::string& out_path) {
  auto [desc_a, desc_b] = split_pair(pair);
  olab::Functional f = olab::parse_functional(term);
  olab::BitSequence a = olab::BitSequence::parse(desc_a);
  olab::BitSequence b = olab::BitSequence::parse(desc_b);
  olab::CheckParams params = olab::CheckParams::from_json(
      params_arg.empty() ? json::object() : load_json_arg(params_arg));
  if (budget) params.budget = budget;
  if (window) {
    params.input_window = window;
    params.oracle_window = std::max(params.oracle_window, window);
  }
  olab::CheckReport report = olab::run_check(reducibility, f, a, b, params);

  emit(report.to_json(), out_path);
  if (!out_path.empty()) {
    std::cout << (report.pass ? "pass" : "FAIL") << "  " << reducibility << "  " << f.id() << "\n";
    for (const olab::Witness& w : report.witnesses)
      std::cout << "  witness: input " << w.input << "  expected " << w.expected << "  got "
                << w.got << "  (" << w.detail << ")\n";
  }
  return report.pass ? 0 : 1;
}

int cmd_recover(const std::string& coding, const std::string& seq, const std::string& corruption,
                bool corrupt_base, std::uint64_t window, std::uint64_t budget,
                const std::string& out_path) {
  json body{{"coding", coding}, {"base", seq}, {"window", window}, {"budget", budget},
            {"corruptBase", corrupt_base}};
  if (!corruption.empty()) body["corruption"] = load_json_arg(corruption);
  json config{{"schema", olab::kSchemaVersion},
              {"name", "recover"},
              {"recoveries", json::array({body})}};
  olab::ExperimentOptions options;
  options.output_dir = std::filesystem::temp_directory_path() /
                       ("oracle-lab-recover-" + std::to_string(::getpid()));
  options.timestamp = false;
  olab::ExperimentResult result =
      olab::run_experiment(olab::ExperimentConfig::parse(config), options);
  std::ifstream in(result.report_files.front());
  json report = json::parse(in);
  emit(report, out_path);
  return result.all_pass ? 0 : 1;
}

int cmd_deduce(const std::string& term, const std::string& mode, std::uint64_t t, std::uint64_t p,
               std::uint64_t budget, std::uint64_t max_rank, const std::string& inputs_csv,
               const std::string& sigmas_arg, std::uint64_t random_count, std::uint64_t seed,
               std::uint64_t max_defined, bool enumerate, const std::string& out_path) {
  olab::Functional f = olab::parse_functional(term);
  olab::DeductionMode dmode = mode == "exact"
                                  ? olab::DeductionMode::exact_counting(budget)
                                  : olab::DeductionMode::threshold(t, p, budget, max_rank);

  std::vector<std::uint64_t> inputs;
  std::size_t start = 0;
  while (start <= inputs_csv.size()) {
    std::size_t comma = inputs_csv.find(',', start);
    inputs.push_back(std::stoull(
        inputs_csv.substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }

  if (enumerate) {
    olab::DeductionTable table = olab::deduction_closure(f, inputs, dmode);
    emit(json{{"functional", f.id()}, {"table", table.to_json()}}, out_path);
    return 0;
  }

  std::vector<olab::FinitePartialOracle> sigmas;
  if (!sigmas_arg.empty()) {
    for (const auto& id : load_json_arg(sigmas_arg))
      sigmas.push_back(olab::FinitePartialOracle::parse(id.get<std::string>()));
  } else {
    for (std::uint64_t i = 0; i < random_count; ++i) {
      olab::SplitMix64 gen(olab::SplitMix64::derive(seed, i));
      olab::FinitePartialOracle sigma;
      std::uint64_t defined = max_defined == 0 ? 0 : gen.below(max_defined + 1);
      while (sigma.assignments.size() < defined) {
        std::uint64_t pos = gen.below(p);
        sigma.assignments[pos] = static_cast<int>(gen.next() & 1);
      }
      sigmas.push_back(std::move(sigma));
    }
  }

  olab::DeductionTable table = olab::deduction_closure(f, inputs, dmode, sigmas);
  emit(json{{"functional", f.id()}, {"table", table.to_json()}}, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oracle-lab: partial-oracle computation workbench"};
  app.require_subcommand(1);

  std::string reducibility, term, pair, params_arg, out_path;
  std::uint64_t check_budget = 0, check_window = 0;
  auto* check = app.add_subcommand("check", "run a reducibility checker");
  check->add_option("--reducibility,-r", reducibility, "mf|cf|g|cor|mr|ii|ubfb")->required();
  check->add_option("--functional,-f", term, "functional term")->required();
  check->add_option("--pair,-p", pair, "A,B sequence descriptors")->required();
  check->add_option("--params", params_arg, "CheckParams JSON (or @file)");
  check->add_option("--budget", check_budget, "override the params budget");
  check->add_option("--window", check_window, "override the params input window");
  check->add_option("--out,-o", out_path, "report file (default stdout)");

  std::string coding, seq = "random:1:16", corruption;
  bool corrupt_base = false;
  std::uint64_t window = 16, budget = 1 << 20;
  auto* recover = app.add_subcommand("recover", "run a coding recovery sweep");
  recover->add_option("--coding", coding, "r|rtilde")->required();
  recover->add_option("--seq", seq, "base sequence descriptor");
  recover->add_option("--corruption", corruption, "CorruptionSpec JSON (or @file)");
  recover->add_flag("--corrupt-base", corrupt_base, "corrupt the base, then lift to the coding");
  recover->add_option("--window", window, "inputs 0..N-1");
  recover->add_option("--budget", budget, "tick budget per recovery");
  recover->add_option("--out,-o", out_path, "report file (default stdout)");

  std::string op;
  auto* transform = app.add_subcommand("transform", "derive a functional");
  transform->add_option("--op", op, "mf-to-ubfb|ubfb-to-cf")->required();
  transform->add_option("--functional,-f", term, "base functional term")->required();

  std::string mode = "threshold", inputs_csv = "0", sigmas_arg;
  std::uint64_t t = 2, p = 16, dbudget = 256, max_rank = 6;
  std::uint64_t random_count = 0, seed = 1, max_defined = 3;
  bool enumerate = false;
  auto* deduce = app.add_subcommand("deduce", "compute a deduction table");
  deduce->add_flag("--enumerate", enumerate, "tabulate every oracle below P (P <= 8)");
  deduce->add_option("--functional,-f", term, "functional term")->required();
  deduce->add_option("--mode", mode, "threshold|exact");
  deduce->add_option("--t", t, "extension threshold");
  deduce->add_option("--P", p, "position bound");
  deduce->add_option("--budget", dbudget, "tick budget per convergence probe");
  deduce->add_option("--max-rank", max_rank, "rank cap");
  deduce->add_option("--inputs", inputs_csv, "comma-separated inputs");
  deduce->add_option("--sigmas", sigmas_arg, "JSON array of oracle ids (or @file)");
  deduce->add_option("--random", random_count, "generate this many random oracles");
  deduce->add_option("--seed", seed, "seed for random oracles");
  deduce->add_option("--max-defined", max_defined, "max assignments per random oracle");
  deduce->add_option("--out,-o", out_path, "report file (default stdout)");

  std::string config_path, report_path;
  std::string out_dir = "reports";
  bool no_timestamp = false;
  std::size_t witness_index = 0;
  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("--config,-c", config_path, "config JSON")->required();
  auto* out_opt = run_cmd->add_option("--out,-o", out_dir, "report directory (default: config outputDir or ./reports)");
  run_cmd->add_flag("--no-timestamp", no_timestamp, "omit timestamps for byte-stable output");

  auto* replay = app.add_subcommand("replay", "re-run a stored witness");
  replay->add_option("--report", report_path, "check report JSON")->required();
  replay->add_option("--witness", witness_index, "witness index");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed())
      return cmd_check(reducibility, term, pair, params_arg, check_budget, check_window, out_path);
    if (recover->parsed())
      return cmd_recover(coding, seq, corruption, corrupt_base, window, budget, out_path);
    if (transform->parsed()) {
      if (op != "mf-to-ubfb" && op != "ubfb-to-cf")
        throw std::runtime_error("unknown transform op: " + op);
      olab::Functional derived = olab::parse_functional(op + "(" + term + ")");
      std::cout << json{{"id", derived.id()}}.dump(2) << "\n";
      return 0;
    }
    if (deduce->parsed())
      return cmd_deduce(term, mode, t, p, dbudget, max_rank, inputs_csv, sigmas_arg, random_count,
                        seed, max_defined, enumerate, out_path);
    if (run_cmd->parsed()) {
      olab::ExperimentConfig config = olab::ExperimentConfig::load(config_path);
      olab::ExperimentOptions options;
      options.output_dir = out_opt->count() == 0 && config.raw.contains("outputDir")
                               ? config.raw.at("outputDir").get<std::string>()
                               : out_dir;
      options.timestamp = !no_timestamp;
      olab::ExperimentResult result = olab::run_experiment(config, options);
      for (const std::string& line : result.summary_lines) std::cout << line << "\n";
      std::cout << (result.all_pass ? "all pass" : "FAILURES") << "\n";
      return result.all_pass ? 0 : 1;
    }
    if (replay->parsed()) {
      std::ifstream in(report_path);
      if (!in) throw std::runtime_error("cannot open " + report_path);
      olab::ReplayResult result = olab::replay_witness(json::parse(in), witness_index);
      std::cout << result.trace_jsonl;
      std::cerr << (result.matches ? "trace matches stored witness"
                                   : "TRACE MISMATCH against stored witness")
                << "\n";
      return result.matches ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
