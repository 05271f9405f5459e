#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sedkit/error.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/pipeline.hpp"

namespace sedkit {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,        // bad arguments, config, unknown detector/dataset, invalid hyperparameters
  kExitParse = 2,        // malformed or inconsistent input data
  kExitManifest = 3,     // --strict manifest mismatch
  kExitDetection = 4,    // detector could not run on the data
  kExitEvaluation = 5,   // evaluation preconditions failed
  kExitLifecycle = 6,    // phase invoked out of order
  kExitIo = 7,           // missing file or write failure
  kExitAllFailed = 8,    // bench: no run succeeded
};

int exit_code_for(ErrorCode code);

struct BenchDetector {
  std::string label;  // table row name; defaults to the detector name
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct BenchDataset {
  std::string label;
  DatasetRef ref;
};

struct BenchmarkSpec {
  std::vector<BenchDetector> detectors;
  std::vector<BenchDataset> datasets;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output;
  TokenizerConfig tokenizer;
  std::optional<std::filesystem::path> stopwords_dir;
  std::filesystem::path base_dir;

  /// Validates shape, labels and detector params; throws ConfigError,
  /// UnknownDetector, DuplicateName or InvalidHyperparameter.
  static BenchmarkSpec from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static BenchmarkSpec load(const std::filesystem::path& path);
};

struct BenchRun {
  std::string detector;  // label
  std::string dataset;   // label
  std::uint64_t seed = 0;
  std::filesystem::path bundle;
  std::optional<MetricReport> metrics;
  bool ok = false;
  std::string error;
};

struct BenchCell {
  std::string detector;
  std::string dataset;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::size_t scored = 0;  // successful runs that produced metrics
  double nmi = 0.0;
  double ami = 0.0;
  double ari = 0.0;
};

struct BenchResult {
  std::vector<BenchRun> runs;    // detector-major, then dataset, then seed
  std::vector<BenchCell> cells;  // detector-major, then dataset
};

/// Runs the full cross product with up to `jobs` concurrent runs. Datasets
/// are loaded before any run starts. Writes table.tsv and results.json under
/// spec.output.
BenchResult run_benchmark(const BenchmarkSpec& spec, std::size_t jobs,
                          const DetectorRegistry& registry = DetectorRegistry::global());

/// Cells as means over the runs of each (detector, dataset) pair.
std::vector<BenchCell> summarize(const std::vector<BenchRun>& runs);
std::string format_bench_table(const std::vector<BenchCell>& cells);  // tab-separated
/// Re-reads every run's metrics.json listed in <dir>/results.json.
std::vector<BenchRun> read_bench_runs(const std::filesystem::path& dir);

/// Entry point; returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sedkit
