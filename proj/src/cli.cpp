#include "sedkit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "sedkit/graph.hpp"

namespace sedkit {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kUnknownDetector:
    case ErrorCode::kUnknownDataset:
    case ErrorCode::kInvalidHyperparameter:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidPolicy:
    case ErrorCode::kDuplicateName:
    case ErrorCode::kKTooLarge:
      return kExitUsage;
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kRowCountMismatch:
    case ErrorCode::kRaggedDimensions:
    case ErrorCode::kUnknownMessageId:
      return kExitParse;
    case ErrorCode::kEmptyVocabulary:
    case ErrorCode::kZeroVectorsOnly:
    case ErrorCode::kNoSupportedTokens:
    case ErrorCode::kEmptyGraph:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kPartitionMismatch:
      return kExitDetection;
    case ErrorCode::kUnlabeledCorpus:
    case ErrorCode::kCoverageMismatch:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kEmptyInput:
      return kExitEvaluation;
    case ErrorCode::kLifecycleViolation:
      return kExitLifecycle;
    case ErrorCode::kFileNotFound:
    case ErrorCode::kIoError:
      return kExitIo;
  }
  return kExitUsage;
}

namespace {

bool non_negative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

enum class Format { kTable, kRecords };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  Format format = Format::kTable;
  bool strict = false;
};

fs::path resolve(const fs::path& base, const fs::path& p) { return (p.is_absolute() ? p : base / p).lexically_normal(); }

std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::string path_safe(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out.empty() ? "_" : out;
}

void print_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

json metrics_json(const std::optional<MetricReport>& m) {
  if (!m) return nullptr;
  return json::parse(to_json_record(*m));
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::optional<MetricReport> read_bundle_metrics(const fs::path& bundle) {
  const auto j = read_json_file(bundle / "metrics.json");
  if (j.value("metrics_absent", false)) return std::nullopt;
  return metric_report_from_json(j.dump());
}

void print_metric_table(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& header,
                        const std::optional<MetricReport>& m) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : header) rows.push_back({k, v});
  rows.push_back({"metric", "value"});
  if (!m) {
    rows.push_back({"metrics", "absent (unlabeled corpus)"});
  } else {
    rows.push_back({"nmi", fixed(m->nmi, 6)});
    rows.push_back({"ami", fixed(m->ami, 6)});
    rows.push_back({"ari", fixed(m->ari, 6)});
    if (m->accuracy) rows.push_back({"accuracy", fixed(*m->accuracy, 6)});
    rows.push_back({"predicted_clusters", std::to_string(m->predicted_clusters)});
    rows.push_back({"true_clusters", std::to_string(m->true_clusters)});
    rows.push_back({"n", std::to_string(m->n)});
  }
  print_aligned(out, rows);
}

void print_cells(std::ostream& out, const std::vector<BenchCell>& cells, Format format) {
  if (format == Format::kRecords) {
    for (const auto& c : cells) {
      json j = {{"detector", c.detector}, {"dataset", c.dataset}, {"runs", c.runs}, {"failed", c.failed}};
      if (c.scored > 0) {
        j["nmi"] = c.nmi;
        j["ami"] = c.ami;
        j["ari"] = c.ari;
      }
      out << j.dump() << '\n';
    }
    return;
  }
  std::vector<std::vector<std::string>> rows = {{"detector", "dataset", "runs", "failed", "nmi", "ami", "ari"}};
  for (const auto& c : cells) {
    std::vector<std::string> r = {c.detector, c.dataset, std::to_string(c.runs), std::to_string(c.failed)};
    for (double v : {c.nmi, c.ami, c.ari}) {
      r.push_back(c.scored > 0 ? fixed(v) : (c.failed == c.runs ? "failed" : "n/a"));
    }
    rows.push_back(std::move(r));
  }
  print_aligned(out, rows);
}

int report_error(std::ostream& err, const Error& e) {
  err << "error: " << e.what() << '\n';
  return exit_code_for(e.code());
}

// ---- subcommands ----

struct IngestArgs {
  std::string source;
  std::string dataset;
  std::string out;
  std::string manifest;
  std::string input_format = "auto";
};

int cmd_ingest(const IngestArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  try {
    const DatasetManifest manifest = a.manifest.empty() ? require_manifest(a.dataset) : load_manifest_file(a.manifest);
    std::ifstream in(a.source, std::ios::binary);
    if (!in) throw Error(ErrorCode::kFileNotFound, a.source);
    std::string format = a.input_format;
    if (format == "auto") format = fs::path(a.source).extension() == ".tsv" ? "tsv" : "jsonl";
    Corpus corpus;
    if (format == "tsv") {
      corpus = convert_tsv(in, manifest);
    } else if (format == "jsonl") {
      corpus = parse_corpus(in, manifest, manifest.name);
    } else {
      throw Error(ErrorCode::kConfigError, "input format must be auto, tsv or jsonl");
    }
    write_corpus(fs::path(a.out), corpus);
    const auto report = validate_manifest(corpus, manifest);
    if (g.format == Format::kRecords) {
      out << json{{"dataset", report.dataset},
                  {"expected_events", report.expected_events},
                  {"actual_events", report.actual_events},
                  {"expected_texts", report.expected_texts},
                  {"actual_texts", report.actual_texts},
                  {"matches", report.matches},
                  {"output", a.out}}
                 .dump()
          << '\n';
    } else {
      out << format_report(report) << '\n';
    }
    if (g.strict && !report.matches) {
      err << "error: manifest mismatch for " << report.dataset << " (--strict)\n";
      return kExitManifest;
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  }
}

int cmd_run(const std::string& config_path, const std::string& output, const Globals& g, std::ostream& out,
            std::ostream& err) {
  try {
    auto config = DetectorConfig::load(config_path);
    if (g.seed) config.seed = *g.seed;
    if (!output.empty()) {
      config.output_dir = fs::absolute(output);
    }
    const auto art = run_pipeline(config);
    const std::string dataset = config.dataset.name ? *config.dataset.name : config.dataset.path->stem().string();
    if (g.format == Format::kRecords) {
      out << json{{"detector", config.detector},
                  {"dataset", dataset},
                  {"seed", config.seed},
                  {"bundle", art.bundle.string()},
                  {"events", art.assignment.event_count},
                  {"metrics", metrics_json(art.metrics)}}
                 .dump()
          << '\n';
    } else {
      print_metric_table(out,
                         {{"detector", config.detector},
                          {"dataset", dataset},
                          {"seed", std::to_string(config.seed)},
                          {"events", std::to_string(art.assignment.event_count)},
                          {"bundle", art.bundle.string()}},
                         art.metrics);
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  }
}

int cmd_bench(const std::string& spec_path, const std::string& output, const Globals& g, std::ostream& out,
              std::ostream& err) {
  try {
    auto spec = BenchmarkSpec::load(spec_path);
    if (g.seed) spec.seeds = {*g.seed};
    if (!output.empty()) spec.output = fs::absolute(output);
    const auto result = run_benchmark(spec, std::max<std::size_t>(1, g.jobs));
    for (const auto& r : result.runs) {
      if (!r.ok) err << "run failed: " << r.detector << " / " << r.dataset << " / seed " << r.seed << ": " << r.error << '\n';
    }
    print_cells(out, result.cells, g.format);
    const bool any_ok = std::any_of(result.runs.begin(), result.runs.end(), [](const BenchRun& r) { return r.ok; });
    return any_ok ? kExitOk : kExitAllFailed;
  } catch (const Error& e) {
    return report_error(err, e);
  }
}

int cmd_report(const std::string& path, const Globals& g, std::ostream& out, std::ostream& err) {
  try {
    const fs::path dir(path);
    if (fs::exists(dir / "results.json")) {
      print_cells(out, summarize(read_bench_runs(dir)), g.format);
      return kExitOk;
    }
    if (fs::exists(dir / "metrics.json")) {
      const auto metrics = read_bundle_metrics(dir);
      std::string detector = "?";
      if (fs::exists(dir / "config.json")) detector = read_json_file(dir / "config.json").value("detector", "?");
      if (g.format == Format::kRecords) {
        out << json{{"bundle", dir.string()}, {"detector", detector}, {"metrics", metrics_json(metrics)}}.dump() << '\n';
      } else {
        print_metric_table(out, {{"detector", detector}, {"bundle", dir.string()}}, metrics);
      }
      return kExitOk;
    }
    throw Error(ErrorCode::kFileNotFound, path + " is neither a run bundle nor a benchmark directory");
  } catch (const Error& e) {
    return report_error(err, e);
  }
}

}  // namespace

// ---- benchmark ----

BenchmarkSpec BenchmarkSpec::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "benchmark spec must be a JSON object");
  static const std::set<std::string> kKeys = {"detectors", "datasets", "seeds", "output", "tokenizer", "stopwords"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kConfigError, "unknown benchmark key '" + key + "'");
  }
  BenchmarkSpec s;
  s.base_dir = base_dir;
  auto require_array = [&](const char* key) -> const json& {
    if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorCode::kConfigError, std::string("'") + key + "' must be a list");
    if (j[key].empty()) throw Error(ErrorCode::kConfigError, std::string("'") + key + "' is empty");
    return j[key];
  };
  for (const auto& d : require_array("detectors")) {
    BenchDetector bd;
    if (d.is_string()) {
      bd.name = d.get<std::string>();
    } else if (d.is_object() && d.contains("name") && d["name"].is_string()) {
      bd.name = d["name"].get<std::string>();
      if (d.contains("params")) bd.params = d["params"];
      if (d.contains("label")) {
        if (!d["label"].is_string()) throw Error(ErrorCode::kConfigError, "detector label must be a string");
        bd.label = d["label"].get<std::string>();
      }
    } else {
      throw Error(ErrorCode::kConfigError, "detector entries need a name");
    }
    if (bd.label.empty()) bd.label = bd.name;
    s.detectors.push_back(std::move(bd));
  }
  for (const auto& d : require_array("datasets")) {
    BenchDataset bd;
    if (d.is_string()) {
      bd.ref.name = d.get<std::string>();
    } else if (d.is_object()) {
      for (const auto& [key, value] : d.items()) {
        if (!value.is_string()) throw Error(ErrorCode::kConfigError, "dataset." + key + " must be a string");
        if (key == "name") {
          bd.ref.name = value.get<std::string>();
        } else if (key == "path") {
          bd.ref.path = value.get<std::string>();
        } else if (key == "manifest") {
          bd.ref.manifest = value.get<std::string>();
        } else if (key == "label") {
          bd.label = value.get<std::string>();
        } else {
          throw Error(ErrorCode::kConfigError, "unknown dataset key '" + key + "'");
        }
      }
    } else {
      throw Error(ErrorCode::kConfigError, "dataset entries must be names or objects");
    }
    if (!bd.ref.name && !bd.ref.path) throw Error(ErrorCode::kConfigError, "dataset needs a name or a path");
    if (bd.label.empty()) bd.label = bd.ref.name ? *bd.ref.name : bd.ref.path->stem().string();
    s.datasets.push_back(std::move(bd));
  }
  for (const auto& seed : require_array("seeds")) {
    if (!non_negative_integer(seed)) throw Error(ErrorCode::kConfigError, "seeds must be non-negative integers");
    s.seeds.push_back(seed.get<std::uint64_t>());
  }
  if (!j.contains("output") || !j["output"].is_string()) throw Error(ErrorCode::kConfigError, "'output' must be a path");
  s.output = j["output"].get<std::string>();

  // Reuse the run-config parser for the shared tokenizer/stopword sections.
  json probe = {{"detector", "_"}, {"dataset", "_"}, {"seed", 0u}};
  if (j.contains("tokenizer")) probe["tokenizer"] = j["tokenizer"];
  if (j.contains("stopwords")) probe["stopwords"] = j["stopwords"];
  const auto shared = DetectorConfig::from_json(probe, base_dir);
  s.tokenizer = shared.tokenizer;
  s.stopwords_dir = shared.stopwords_dir;

  std::set<std::string> labels;
  for (const auto& d : s.detectors) {
    if (!labels.insert(d.label).second) throw Error(ErrorCode::kDuplicateName, "detector label '" + d.label + "' repeats");
  }
  labels.clear();
  for (const auto& d : s.datasets) {
    if (!labels.insert(d.label).second) throw Error(ErrorCode::kDuplicateName, "dataset label '" + d.label + "' repeats");
  }
  return s;
}

BenchmarkSpec BenchmarkSpec::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "benchmark spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

std::vector<BenchCell> summarize(const std::vector<BenchRun>& runs) {
  std::vector<BenchCell> cells;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.detector, r.dataset);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      cells.push_back({r.detector, r.dataset});
    }
    auto& c = cells[it->second];
    ++c.runs;
    if (!r.ok) {
      ++c.failed;
    } else if (r.metrics) {
      ++c.scored;
      c.nmi += r.metrics->nmi;
      c.ami += r.metrics->ami;
      c.ari += r.metrics->ari;
    }
  }
  for (auto& c : cells) {
    if (c.scored == 0) continue;
    const auto k = static_cast<double>(c.scored);
    c.nmi /= k;
    c.ami /= k;
    c.ari /= k;
  }
  return cells;
}

std::string format_bench_table(const std::vector<BenchCell>& cells) {
  std::string out = "detector\tdataset\truns\tfailed\tnmi\tami\tari\n";
  for (const auto& c : cells) {
    out += c.detector + '\t' + c.dataset + '\t' + std::to_string(c.runs) + '\t' + std::to_string(c.failed);
    for (double v : {c.nmi, c.ami, c.ari}) {
      out += '\t';
      out += c.scored > 0 ? format_double(v) : (c.failed == c.runs ? "failed" : "n/a");
    }
    out += '\n';
  }
  return out;
}

BenchResult run_benchmark(const BenchmarkSpec& spec, std::size_t jobs, const DetectorRegistry& registry) {
  // Everything is resolved up front so a bad name never costs a partial sweep.
  for (const auto& d : spec.detectors) validate_params(registry.schema(d.name), d.params, d.name);
  std::vector<Corpus> corpora;
  for (const auto& d : spec.datasets) corpora.push_back(load_dataset(d.ref, spec.base_dir));

  const fs::path output = resolve(fs::absolute(spec.base_dir), spec.output);
  BenchResult result;
  struct Job {
    std::size_t dataset;
    DetectorConfig config;
  };
  std::vector<Job> work;
  for (const auto& det : spec.detectors) {
    for (std::size_t di = 0; di < spec.datasets.size(); ++di) {
      for (auto seed : spec.seeds) {
        DetectorConfig c;
        c.detector = det.name;
        c.dataset = spec.datasets[di].ref;
        c.params = det.params;
        c.seed = seed;
        c.base_dir = spec.base_dir;
        c.tokenizer = spec.tokenizer;
        c.stopwords_dir = spec.stopwords_dir;
        c.output_dir = output / "runs" / path_safe(det.label) / path_safe(spec.datasets[di].label) /
                       ("seed-" + std::to_string(seed));
        BenchRun run;
        run.detector = det.label;
        run.dataset = spec.datasets[di].label;
        run.seed = seed;
        run.bundle = c.output_dir;
        result.runs.push_back(std::move(run));
        work.push_back({di, std::move(c)});
      }
    }
  }
  fs::create_directories(output);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      auto& run = result.runs[i];
      try {
        const auto art = run_pipeline(work[i].config, corpora[work[i].dataset], registry);
        run.metrics = art.metrics;
        run.ok = true;
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, jobs), work.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  result.cells = summarize(result.runs);
  std::ofstream(output / "table.tsv", std::ios::binary) << format_bench_table(result.cells);
  json runs = json::array();
  for (const auto& r : result.runs) {
    json j = {{"detector", r.detector},
              {"dataset", r.dataset},
              {"seed", r.seed},
              {"status", r.ok ? "ok" : "failed"},
              {"bundle", fs::relative(r.bundle, output).generic_string()}};
    if (r.ok) {
      j["metrics"] = metrics_json(r.metrics);
    } else {
      j["error"] = r.error;
    }
    runs.push_back(std::move(j));
  }
  json cells = json::array();
  for (const auto& c : result.cells) {
    json j = {{"detector", c.detector}, {"dataset", c.dataset}, {"runs", c.runs}, {"failed", c.failed}};
    if (c.scored > 0) {
      j["nmi"] = c.nmi;
      j["ami"] = c.ami;
      j["ari"] = c.ari;
    }
    cells.push_back(std::move(j));
  }
  std::ofstream(output / "results.json", std::ios::binary) << json{{"runs", runs}, {"cells", cells}}.dump(2) << '\n';
  return result;
}

std::vector<BenchRun> read_bench_runs(const fs::path& dir) {
  const auto j = read_json_file(dir / "results.json");
  std::vector<BenchRun> runs;
  try {
    for (const auto& r : j.at("runs")) {
      BenchRun run;
      run.detector = r.at("detector").get<std::string>();
      run.dataset = r.at("dataset").get<std::string>();
      run.seed = r.at("seed").get<std::uint64_t>();
      run.bundle = dir / r.at("bundle").get<std::string>();
      run.ok = r.at("status").get<std::string>() == "ok";
      if (run.ok) {
        run.metrics = read_bundle_metrics(run.bundle);
      } else {
        run.error = r.value("error", "");
      }
      runs.push_back(std::move(run));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, (dir / "results.json").string() + ": " + e.what());
  }
  return runs;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sedkit: social event detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  std::string format = "table";
  auto* seed_opt = app.add_option("--seed", seed, "override the seed of run configs / benchmark specs");
  app.add_option("--jobs", g.jobs, "concurrent benchmark runs")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"table", "records"}));
  app.add_flag("--strict", g.strict, "ingest: nonzero exit when the data disagrees with the manifest");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "convert a dataset export to canonical JSONL and validate it");
  ingest_cmd->add_option("source", ingest.source, "TSV or JSONL export")->required();
  ingest_cmd->add_option("dataset", ingest.dataset, "built-in dataset name")->required();
  ingest_cmd->add_option("out", ingest.out, "canonical JSONL output")->required();
  ingest_cmd->add_option("--manifest", ingest.manifest, "manifest JSON file instead of a built-in one");
  ingest_cmd->add_option("--input-format", ingest.input_format, "auto, tsv or jsonl")
      ->check(CLI::IsMember({"auto", "tsv", "jsonl"}));

  std::string config_path, run_output;
  auto* run_cmd = app.add_subcommand("run", "run one detector as described by a config file");
  run_cmd->add_option("config", config_path, "run config (JSON)")->required();
  run_cmd->add_option("--output", run_output, "bundle directory (overrides output_dir)");

  std::string spec_path, bench_output;
  auto* bench_cmd = app.add_subcommand("bench", "run a detector x dataset x seed sweep");
  bench_cmd->add_option("spec", spec_path, "benchmark spec (JSON)")->required();
  bench_cmd->add_option("--output", bench_output, "sweep directory (overrides the spec's output)");

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "print metrics of a run bundle or benchmark directory");
  report_cmd->add_option("path", report_path, "bundle or benchmark output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;
  g.format = format == "records" ? Format::kRecords : Format::kTable;

  if (ingest_cmd->parsed()) return cmd_ingest(ingest, g, out, err);
  if (run_cmd->parsed()) return cmd_run(config_path, run_output, g, out, err);
  if (bench_cmd->parsed()) return cmd_bench(spec_path, bench_output, g, out, err);
  if (report_cmd->parsed()) return cmd_report(report_path, g, out, err);
  return kExitUsage;
}

}  // namespace sedkit
