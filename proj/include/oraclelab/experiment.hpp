#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace olab {

inline constexpr const char* kSchemaVersion = "oracle-lab/1";

// Batch experiment: named sequences and functionals, then checks, recoveries
// and deductions referring to them. See configs/demo.json for the shape.
struct ExperimentConfig {
  nlohmann::json raw;
  std::string name;

  static ExperimentConfig load(const std::filesystem::path& file);
  static ExperimentConfig parse(const nlohmann::json& j);
};

struct ExperimentOptions {
  std::filesystem::path output_dir = "reports";
  bool timestamp = true;
  // Worker cap; results are slotted by config order, so the count never
  // affects report bytes. 0 = use ORACLE_LAB_THREADS or 1.
  unsigned threads = 0;
};

struct ExperimentResult {
  bool all_pass = false;
  std::vector<std::string> summary_lines;
  std::vector<std::filesystem::path> report_files;
};

// Executes every item, writes one JSON report per item plus summary.json and
// summary.txt. Each item is evaluated twice and the serialized reports are
// compared; a mismatch aborts the run (internal nondeterminism is a bug, not
// a result).
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options);

// Re-runs a single witness embedded in a check report and compares the trace
// byte-for-byte. Returns the freshly computed trace.
struct ReplayResult {
  bool matches = false;
  std::string trace_jsonl;
  std::string stored_trace_jsonl;
};
ReplayResult replay_witness(const nlohmann::json& check_report, std::size_t witness_index);

}  // namespace olab
