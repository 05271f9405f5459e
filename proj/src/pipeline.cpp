#include "sedkit/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include "detectors.hpp"

namespace sedkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kCreated:
      return "created";
    case Phase::kPreprocessed:
      return "preprocessed";
    case Phase::kFitted:
      return "fitted";
    case Phase::kDetected:
      return "detected";
    case Phase::kEvaluated:
      return "evaluated";
  }
  return "unknown";
}

namespace {

bool non_negative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::string_view type_name(ParamType t) {
  switch (t) {
    case ParamType::kInt:
      return "integer";
    case ParamType::kReal:
      return "number";
    case ParamType::kBool:
      return "boolean";
    case ParamType::kString:
      return "string";
  }
  return "value";
}

bool type_matches(ParamType t, const json& v) {
  switch (t) {
    case ParamType::kInt:
      return v.is_number_integer();
    case ParamType::kReal:
      return v.is_number();
    case ParamType::kBool:
      return v.is_boolean();
    case ParamType::kString:
      return v.is_string();
  }
  return false;
}

// Strips the "<Code>: " prefix that Error puts in front of every message.
std::string bare_message(const Error& e) {
  std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

template <class F>
auto in_phase(std::string_view phase, double* seconds, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  struct Stopwatch {
    std::chrono::steady_clock::time_point start;
    double* seconds;
    ~Stopwatch() {
      if (seconds) *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  } watch{start, seconds};
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(e.code(), std::string(phase), bare_message(e));
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return (p.is_absolute() ? p : base / p).lexically_normal(); }

std::string dataset_language(const DatasetRef& ref, const fs::path& base) {
  if (ref.manifest) return load_manifest_file(resolve(base, *ref.manifest)).language;
  if (ref.name) {
    if (const auto* m = find_manifest(*ref.name)) return m->language;
  }
  return "en";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

}  // namespace

json validate_params(const ParamSchema& schema, const json& params, std::string_view detector) {
  const std::string who = "detector '" + std::string(detector) + "'";
  if (!params.is_null() && !params.is_object()) throw Error(ErrorCode::kConfigError, who + ": params must be an object");
  json out = json::object();
  if (params.is_object()) {
    for (const auto& [key, value] : params.items()) {
      const auto it = schema.find(key);
      if (it == schema.end()) throw Error(ErrorCode::kConfigError, who + " has no parameter '" + key + "'");
      const auto& spec = it->second;
      if (!type_matches(spec.type, value)) {
        throw Error(ErrorCode::kConfigError,
                    who + ": parameter '" + key + "' must be a " + std::string(type_name(spec.type)));
      }
      if (spec.min && value.is_number()) {
        const double x = value.get<double>();
        if (x < *spec.min || (spec.exclusive_min && x == *spec.min)) {
          throw Error(ErrorCode::kInvalidHyperparameter, who + ": parameter '" + key + "' must be " +
                                                             (spec.exclusive_min ? "> " : ">= ") +
                                                             json(*spec.min).dump());
        }
        if (spec.type == ParamType::kInt && value.is_number_integer() && value.get<std::int64_t>() < 0) {
          throw Error(ErrorCode::kInvalidHyperparameter, who + ": parameter '" + key + "' must be non-negative");
        }
      }
      out[key] = spec.type == ParamType::kReal ? json(value.get<double>()) : value;
    }
  }
  for (const auto& [key, spec] : schema) {
    if (out.contains(key)) continue;
    if (spec.default_value.is_null()) throw Error(ErrorCode::kConfigError, who + " requires parameter '" + key + "'");
    out[key] = spec.default_value;
  }
  return out;
}

DetectorRegistry& DetectorRegistry::global() {
  static DetectorRegistry registry = with_builtins();
  return registry;
}

DetectorRegistry DetectorRegistry::with_builtins() {
  DetectorRegistry r;
  register_builtin_detectors(r);
  return r;
}

DetectorRegistry::DetectorRegistry(DetectorRegistry&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  entries_ = std::move(other.entries_);
}

void DetectorRegistry::register_detector(const std::string& name, DetectorFactory factory, ParamSchema schema,
                                         std::string description) {
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "detector name is empty");
  if (!factory) throw Error(ErrorCode::kInvalidArgument, "detector '" + name + "' has no factory");
  std::lock_guard lock(mutex_);
  if (entries_.contains(name)) throw Error(ErrorCode::kDuplicateName, "detector '" + name + "' is already registered");
  entries_.emplace(name, Entry{std::move(factory), std::move(schema), std::move(description)});
}

bool DetectorRegistry::contains(std::string_view name) const {
  std::lock_guard lock(mutex_);
  return entries_.find(name) != entries_.end();
}

std::vector<std::string> DetectorRegistry::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

const DetectorRegistry::Entry& DetectorRegistry::entry(std::string_view name) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    std::string known;
    for (const auto& [n, e] : entries_) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::kUnknownDetector,
                "'" + std::string(name) + "' is not in the detector registry (registered: " + known + ")");
  }
  // Entries are never removed, so the reference outlives the lock.
  return it->second;
}

const ParamSchema& DetectorRegistry::schema(std::string_view name) const { return entry(name).schema; }

std::string DetectorRegistry::description(std::string_view name) const { return entry(name).description; }

std::unique_ptr<Detector> DetectorRegistry::create(std::string_view name, const json& params) const {
  const auto& e = entry(name);
  auto detector = e.factory(validate_params(e.schema, params, name));
  if (!detector) throw Error(ErrorCode::kInvalidArgument, "factory for '" + std::string(name) + "' returned null");
  return detector;
}

void register_detector(const std::string& name, DetectorFactory factory, ParamSchema schema) {
  DetectorRegistry::global().register_detector(name, std::move(factory), std::move(schema));
}

DetectionSession::DetectionSession(std::unique_ptr<Detector> detector, const Corpus& corpus, DetectorContext context)
    : detector_(std::move(detector)), corpus_(&corpus), context_(std::move(context)) {
  if (!detector_) throw Error(ErrorCode::kInvalidArgument, "session needs a detector");
  context_.corpus = corpus_;
}

void DetectionSession::require(Phase from, std::string_view step) const {
  if (phase_ != from) {
    throw Error(ErrorCode::kLifecycleViolation, std::string(step) + " requires phase '" +
                                                    std::string(to_string(from)) + "' but the session is '" +
                                                    std::string(to_string(phase_)) + "'");
  }
}

void DetectionSession::preprocess() {
  require(Phase::kCreated, "preprocess");
  in_phase("preprocess", &timings_.preprocess, [&] { detector_->preprocess(context_); });
  phase_ = Phase::kPreprocessed;
}

void DetectionSession::fit() {
  require(Phase::kPreprocessed, "fit");
  in_phase("fit", &timings_.fit, [&] { detector_->fit(); });
  phase_ = Phase::kFitted;
}

std::pair<EventAssignment, std::optional<EventAssignment>> DetectionSession::detection() {
  require(Phase::kFitted, "detection");
  auto predictions = in_phase("detect", &timings_.detect, [&] {
    const auto labels = detector_->detect();
    if (labels.size() != corpus_->size()) {
      throw Error(ErrorCode::kCoverageMismatch, "detector labelled " + std::to_string(labels.size()) + " of " +
                                                    std::to_string(corpus_->size()) + " messages");
    }
    return make_assignment(*corpus_, labels);
  });
  std::optional<EventAssignment> truth;
  if (corpus_->labeled()) truth = make_assignment(*corpus_, corpus_->labels());
  predictions_ = predictions;
  phase_ = Phase::kDetected;
  return {std::move(predictions), std::move(truth)};
}

std::optional<MetricReport> DetectionSession::evaluate() {
  require(Phase::kDetected, "evaluate");
  auto report = in_phase("evaluate", &timings_.evaluate, [&]() -> std::optional<MetricReport> {
    if (!corpus_->labeled()) return std::nullopt;
    return sedkit::evaluate(*predictions_, *corpus_);
  });
  phase_ = Phase::kEvaluated;
  return report;
}

DetectorConfig DetectorConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  static const std::set<std::string> kKeys = {"detector", "dataset", "params",    "seed",
                                              "output_dir", "tokenizer", "stopwords"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kConfigError, "unknown config key '" + key + "'");
  }
  DetectorConfig c;
  c.base_dir = base_dir;
  try {
    if (!j.contains("detector") || !j["detector"].is_string()) {
      throw Error(ErrorCode::kConfigError, "'detector' must be a string");
    }
    c.detector = j["detector"].get<std::string>();

    if (!j.contains("seed") || !non_negative_integer(j["seed"])) {
      throw Error(ErrorCode::kConfigError, "'seed' is required and must be a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();

    if (!j.contains("dataset")) throw Error(ErrorCode::kConfigError, "'dataset' is required");
    const auto& d = j["dataset"];
    if (d.is_string()) {
      c.dataset.name = d.get<std::string>();
    } else if (d.is_object()) {
      for (const auto& [key, value] : d.items()) {
        if (key != "name" && key != "path" && key != "manifest") {
          throw Error(ErrorCode::kConfigError, "unknown dataset key '" + key + "'");
        }
        if (!value.is_string()) throw Error(ErrorCode::kConfigError, "dataset." + key + " must be a string");
      }
      if (d.contains("name")) c.dataset.name = d["name"].get<std::string>();
      if (d.contains("path")) c.dataset.path = d["path"].get<std::string>();
      if (d.contains("manifest")) c.dataset.manifest = d["manifest"].get<std::string>();
      if (!c.dataset.name && !c.dataset.path) throw Error(ErrorCode::kConfigError, "dataset needs a name or a path");
    } else {
      throw Error(ErrorCode::kConfigError, "'dataset' must be a name or an object");
    }

    if (j.contains("params")) {
      if (!j["params"].is_object()) throw Error(ErrorCode::kConfigError, "'params' must be an object");
      c.params = j["params"];
    }
    if (j.contains("output_dir")) {
      if (!j["output_dir"].is_string()) throw Error(ErrorCode::kConfigError, "'output_dir' must be a string");
      c.output_dir = j["output_dir"].get<std::string>();
    } else {
      c.output_dir = fs::path("runs") / (c.detector + "-seed" + std::to_string(c.seed));
    }
    if (j.contains("tokenizer")) {
      const auto& t = j["tokenizer"];
      if (!t.is_object()) throw Error(ErrorCode::kConfigError, "'tokenizer' must be an object");
      for (const auto& [key, value] : t.items()) {
        if (key == "urls" || key == "mentions") {
          if (!value.is_string()) throw Error(ErrorCode::kConfigError, "tokenizer." + key + " must be a string");
          (key == "urls" ? c.tokenizer.urls : c.tokenizer.mentions) = parse_token_policy(value.get<std::string>());
        } else if (key == "min_length") {
          if (!non_negative_integer(value)) {
            throw Error(ErrorCode::kConfigError, "tokenizer.min_length must be a non-negative integer");
          }
          c.tokenizer.min_length = value.get<std::size_t>();
        } else {
          throw Error(ErrorCode::kConfigError, "unknown tokenizer key '" + key + "'");
        }
      }
    }
    if (j.contains("stopwords")) {
      if (!j["stopwords"].is_string()) throw Error(ErrorCode::kConfigError, "'stopwords' must be a directory path");
      c.stopwords_dir = j["stopwords"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  return c;
}

DetectorConfig DetectorConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

json DetectorConfig::to_json() const {
  json j = json::object();
  j["detector"] = detector;
  json d = json::object();
  if (dataset.name) d["name"] = *dataset.name;
  if (dataset.path) d["path"] = resolve(fs::absolute(base_dir), *dataset.path).string();
  if (dataset.manifest) d["manifest"] = resolve(fs::absolute(base_dir), *dataset.manifest).string();
  j["dataset"] = d;
  j["params"] = params.is_null() ? json::object() : params;
  j["seed"] = seed;
  j["output_dir"] = resolve(fs::absolute(base_dir), output_dir).string();
  j["tokenizer"] = {{"urls", std::string(to_string(tokenizer.urls))},
                    {"mentions", std::string(to_string(tokenizer.mentions))},
                    {"min_length", tokenizer.min_length}};
  if (stopwords_dir) j["stopwords"] = resolve(fs::absolute(base_dir), *stopwords_dir).string();
  return j;
}

Corpus load_dataset(const DatasetRef& ref, const fs::path& base_dir) {
  std::optional<DatasetManifest> manifest;
  if (ref.manifest) {
    manifest = load_manifest_file(resolve(base_dir, *ref.manifest));
  } else if (ref.name) {
    if (const auto* m = find_manifest(*ref.name)) manifest = *m;
  }
  fs::path path;
  if (ref.path) {
    path = resolve(base_dir, *ref.path);
  } else if (ref.name) {
    const char* root = std::getenv("SEDKIT_DATA_ROOT");
    if (!root || !*root) {
      throw Error(ErrorCode::kUnknownDataset,
                  "dataset '" + *ref.name + "' has no path and SEDKIT_DATA_ROOT is not set");
    }
    path = fs::path(root) / (*ref.name + ".jsonl");
    if (!fs::exists(path)) {
      throw Error(ErrorCode::kUnknownDataset, "dataset '" + *ref.name + "' not found under " + root);
    }
  } else {
    throw Error(ErrorCode::kConfigError, "dataset needs a name or a path");
  }
  return manifest ? load_corpus(path, *manifest) : load_corpus(path);
}

std::string failure_marker_name(const fs::path& output_dir) {
  return output_dir.filename().string() + ".FAILED";
}

namespace {

fs::path output_path(const DetectorConfig& config) {
  const fs::path output = resolve(fs::absolute(config.base_dir), config.output_dir);
  if (output.filename().empty()) throw Error(ErrorCode::kConfigError, "output_dir has no final component");
  return output;
}

void leave_marker(const fs::path& output, const Error& e) {
  std::error_code ec;
  fs::remove_all(output, ec);
  fs::create_directories(output.parent_path(), ec);
  std::ofstream out(output.parent_path() / failure_marker_name(output), std::ios::binary);
  out << e.what() << '\n';
}

RunArtifacts run_loaded(const DetectorConfig& config, const Corpus& corpus, const DetectorRegistry& registry,
                        double load_seconds) {
  const fs::path output = output_path(config);
  const fs::path marker = output.parent_path() / failure_marker_name(output);
  const fs::path staging = output.parent_path() / ("." + output.filename().string() + ".partial");
  std::error_code ec;
  try {
    RunArtifacts art;
    art.version = std::string(kVersion);
    art.timings.load = load_seconds;

    DetectorConfig echo = config;
    std::unique_ptr<Detector> detector;
    DetectorContext context;
    in_phase("configure", nullptr, [&] {
      echo.params = validate_params(registry.schema(config.detector), config.params, config.detector);
      detector = registry.create(config.detector, echo.params);
      context.seed = config.seed;
      context.tokenizer = config.tokenizer;
      context.base_dir = fs::absolute(config.base_dir);
      if (config.stopwords_dir) {
        context.stopwords = stopwords_for_language(resolve(context.base_dir, *config.stopwords_dir),
                                                   dataset_language(config.dataset, context.base_dir));
      }
    });
    art.config_echo = echo.to_json();

    DetectionSession session(std::move(detector), corpus, std::move(context));
    session.preprocess();
    session.fit();
    auto [predictions, truth] = session.detection();
    art.metrics = session.evaluate();
    art.assignment = std::move(predictions);
    art.ground_truth = std::move(truth);
    const auto& t = session.timings();
    art.timings.preprocess = t.preprocess;
    art.timings.fit = t.fit;
    art.timings.detect = t.detect;
    art.timings.evaluate = t.evaluate;

    in_phase("persist", nullptr, [&] {
      try {
        fs::create_directories(output.parent_path());
        fs::remove_all(staging);
        fs::create_directories(staging);
        write_text(staging / "config.json", art.config_echo.dump(2) + "\n");
        {
          std::ofstream out(staging / "assignment.tsv", std::ios::binary);
          write_assignment(out, art.assignment);
          if (!out) throw Error(ErrorCode::kIoError, "cannot write assignment.tsv");
        }
        if (art.ground_truth) {
          std::ofstream out(staging / "truth.tsv", std::ios::binary);
          write_assignment(out, *art.ground_truth);
          if (!out) throw Error(ErrorCode::kIoError, "cannot write truth.tsv");
        }
        if (art.metrics) {
          write_text(staging / "metrics.json", to_json_record(*art.metrics) + "\n");
          write_text(staging / "metrics.txt", to_key_value(*art.metrics));
        } else {
          write_text(staging / "metrics.json", R"({"metrics_absent":true,"reason":"unlabeled corpus"})"
                                               "\n");
          write_text(staging / "metrics.txt", "metrics_absent=true\n");
        }
        const json timing = {{"load", art.timings.load},     {"preprocess", art.timings.preprocess},
                             {"fit", art.timings.fit},       {"detect", art.timings.detect},
                             {"evaluate", art.timings.evaluate}};
        write_text(staging / "timing.json", timing.dump(2) + "\n");
        write_text(staging / "VERSION", art.version + "\n");
        fs::remove_all(output);
        fs::rename(staging, output);
        fs::remove(marker);
      } catch (const fs::filesystem_error& e) {
        throw Error(ErrorCode::kIoError, e.what());
      }
    });
    art.bundle = output;
    return art;
  } catch (const Error& e) {
    fs::remove_all(staging, ec);
    leave_marker(output, e);
    throw;
  }
}

}  // namespace

RunArtifacts run_pipeline(const DetectorConfig& config, const DetectorRegistry& registry) {
  const fs::path output = output_path(config);
  double load_seconds = 0.0;
  std::optional<Corpus> corpus;
  try {
    // Fail fast on an unknown detector or bad params before touching the data.
    in_phase("configure", nullptr,
             [&] { validate_params(registry.schema(config.detector), config.params, config.detector); });
    corpus = in_phase("load", &load_seconds, [&] { return load_dataset(config.dataset, config.base_dir); });
  } catch (const Error& e) {
    leave_marker(output, e);
    throw;
  }
  return run_loaded(config, *corpus, registry, load_seconds);
}

RunArtifacts run_pipeline(const DetectorConfig& config, const Corpus& corpus, const DetectorRegistry& registry) {
  return run_loaded(config, corpus, registry, 0.0);
}

}  // namespace sedkit
