#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sedkit/assignment.hpp"
#include "sedkit/corpus.hpp"
#include "sedkit/error.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/preprocess.hpp"

namespace sedkit {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Phase { kCreated, kPreprocessed, kFitted, kDetected, kEvaluated };
std::string_view to_string(Phase phase);

/// Component error re-raised with the name of the phase it escaped from.
class PipelineError : public Error {
 public:
  PipelineError(ErrorCode code, std::string phase, const std::string& message)
      : Error(code, "[" + phase + "] " + message), phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

/// Everything a detector may look at while preprocessing.
struct DetectorContext {
  const Corpus* corpus = nullptr;
  std::uint64_t seed = 0;
  TokenizerConfig tokenizer;
  StopwordSet stopwords;
  std::filesystem::path base_dir;  // resolves relative paths in params
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual void preprocess(const DetectorContext& context) = 0;
  virtual void fit() = 0;
  /// Per-message labels in corpus order (any integers; densified by the caller).
  virtual std::vector<std::uint32_t> detect() = 0;
};

enum class ParamType { kInt, kReal, kBool, kString };

struct ParamSpec {
  ParamType type = ParamType::kInt;
  nlohmann::json default_value;  // null: required
  std::optional<double> min;     // inclusive
  bool exclusive_min = false;
  std::string help;
};

using ParamSchema = std::map<std::string, ParamSpec>;
using DetectorFactory = std::function<std::unique_ptr<Detector>(const nlohmann::json& params)>;

/// Checks keys, types and ranges; returns params with defaults filled in.
/// Throws ConfigError or InvalidHyperparameter.
nlohmann::json validate_params(const ParamSchema& schema, const nlohmann::json& params, std::string_view detector);

class DetectorRegistry {
 public:
  /// Registry with the built-in detectors already present.
  static DetectorRegistry& global();
  static DetectorRegistry with_builtins();
  DetectorRegistry() = default;
  DetectorRegistry(DetectorRegistry&& other) noexcept;

  /// Throws DuplicateName.
  void register_detector(const std::string& name, DetectorFactory factory, ParamSchema schema = {},
                         std::string description = {});
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;
  const ParamSchema& schema(std::string_view name) const;
  std::string description(std::string_view name) const;

  /// Validates params against the schema, then invokes the factory. Throws
  /// UnknownDetector, ConfigError or InvalidHyperparameter.
  std::unique_ptr<Detector> create(std::string_view name, const nlohmann::json& params = nlohmann::json::object()) const;

 private:
  struct Entry {
    DetectorFactory factory;
    ParamSchema schema;
    std::string description;
  };
  const Entry& entry(std::string_view name) const;

  mutable std::mutex mutex_;
  std::map<std::string, Entry, std::less<>> entries_;
};

/// Registers into the global registry.
void register_detector(const std::string& name, DetectorFactory factory, ParamSchema schema = {});

struct PhaseTimings {
  double load = 0.0;
  double preprocess = 0.0;
  double fit = 0.0;
  double detect = 0.0;
  double evaluate = 0.0;
};

/// Stepwise driver: preprocess -> fit -> detection -> evaluate, each exactly
/// once and in that order. Anything else throws LifecycleViolation.
class DetectionSession {
 public:
  DetectionSession(std::unique_ptr<Detector> detector, const Corpus& corpus, DetectorContext context);

  Phase phase() const { return phase_; }
  const PhaseTimings& timings() const { return timings_; }

  void preprocess();
  void fit();
  /// (predictions, ground_truths); ground truth is absent for unlabeled corpora.
  std::pair<EventAssignment, std::optional<EventAssignment>> detection();
  /// Absent (not an error) when the corpus is unlabeled.
  std::optional<MetricReport> evaluate();

 private:
  void require(Phase expected, std::string_view step) const;

  std::unique_ptr<Detector> detector_;
  const Corpus* corpus_;
  DetectorContext context_;
  Phase phase_ = Phase::kCreated;
  PhaseTimings timings_;
  std::optional<EventAssignment> predictions_;
};

struct DatasetRef {
  std::optional<std::string> name;             // built-in manifest or data-root entry
  std::optional<std::filesystem::path> path;   // canonical JSONL corpus
  std::optional<std::filesystem::path> manifest;
};

struct DetectorConfig {
  std::string detector;
  DatasetRef dataset;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  TokenizerConfig tokenizer;
  std::optional<std::filesystem::path> stopwords_dir;
  std::filesystem::path base_dir;  // directory of the config file

  /// Throws ConfigError on missing/ill-typed fields; the seed is mandatory.
  static DetectorConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static DetectorConfig load(const std::filesystem::path& path);
  /// Self-contained echo with absolute paths; from_json(to_json()) replays the run.
  nlohmann::json to_json() const;
};

/// Resolves the dataset of a config: explicit path, else
/// $SEDKIT_DATA_ROOT/<name>.jsonl. Throws UnknownDataset or FileNotFound.
Corpus load_dataset(const DatasetRef& ref, const std::filesystem::path& base_dir);

struct RunArtifacts {
  EventAssignment assignment;
  std::optional<EventAssignment> ground_truth;
  std::optional<MetricReport> metrics;
  PhaseTimings timings;
  nlohmann::json config_echo;
  std::string version;
  std::filesystem::path bundle;
};

/// Runs all four phases and persists the bundle at config.output_dir. The
/// bundle is staged next to its destination and renamed into place; on
/// failure only a "<output_dir>.FAILED" marker is left behind.
RunArtifacts run_pipeline(const DetectorConfig& config, const DetectorRegistry& registry = DetectorRegistry::global());
/// Same, reusing an already loaded corpus.
RunArtifacts run_pipeline(const DetectorConfig& config, const Corpus& corpus,
                          const DetectorRegistry& registry = DetectorRegistry::global());

std::string failure_marker_name(const std::filesystem::path& output_dir);

}  // namespace sedkit
