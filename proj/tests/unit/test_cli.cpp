#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "paths.hpp"
#include "sedkit/cli.hpp"

using namespace sedkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sedkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return testpaths::fixture(name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("exit codes by error family") {
  CHECK(exit_code_for(ErrorCode::kUnknownDetector) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::kInvalidHyperparameter) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::kParseError) == kExitParse);
  CHECK(exit_code_for(ErrorCode::kDuplicateId) == kExitParse);
  CHECK(exit_code_for(ErrorCode::kKTooLarge) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::kEmptyGraph) == kExitDetection);
  CHECK(exit_code_for(ErrorCode::kCoverageMismatch) == kExitEvaluation);
  CHECK(exit_code_for(ErrorCode::kLifecycleViolation) == kExitLifecycle);
  CHECK(exit_code_for(ErrorCode::kFileNotFound) == kExitIo);
}

TEST_CASE("cli usage") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"run"}).code == kExitUsage);
  CHECK(cli({"--format", "xml", "report", "."}).code == kExitUsage);
}

TEST_CASE("ingest") {
  const auto dir = testpaths::scratch("cli_ingest");
  const auto out = (dir / "e.jsonl").string();
  const auto plain = cli({"ingest", fx("event2012_truncated.tsv"), "Event2012", out});
  CHECK(plain.code == kExitOk);
  CHECK(plain.out.find("MISMATCH") != std::string::npos);
  CHECK(fs::exists(out));
  CHECK(cli({"--strict", "ingest", fx("event2012_truncated.tsv"), "Event2012", out}).code == kExitManifest);
  const auto fixture = cli({"--strict", "--format", "records", "ingest", fx("event2012_truncated.tsv"), "Event2012",
                            out, "--manifest", fx("event2012_fixture_manifest.json")});
  CHECK(fixture.code == kExitOk);
  const auto record = nlohmann::json::parse(fixture.out);
  CHECK(record.at("matches") == true);
  CHECK(record.at("actual_texts") == 6);
  CHECK(cli({"ingest", fx("event2012_truncated.tsv"), "Event2099", out}).code == kExitUsage);
  CHECK(cli({"ingest", (dir / "missing.tsv").string(), "Event2012", out}).code == kExitIo);

  std::ofstream(dir / "broken.jsonl") << "{\"id\":\"a\",\"text\":\"x\"}\n{not json\n";
  CHECK(cli({"ingest", (dir / "broken.jsonl").string(), "Event2012", out}).code == kExitParse);
}

TEST_CASE("run") {
  const auto dir = testpaths::scratch("cli_run");
  const auto r = cli({"--format", "records", "run", fx("configs/tfidf_kmeans.json"), "--output", (dir / "b").string()});
  REQUIRE(r.code == kExitOk);
  const auto rec = nlohmann::json::parse(r.out);
  CHECK(rec.at("detector") == "tfidf_kmeans");
  CHECK(rec.at("seed") == 7);
  CHECK(rec.at("metrics").at("nmi").get<double>() >= 0.9);
  CHECK(fs::exists(dir / "b" / "assignment.tsv"));

  const auto reseeded = cli({"--seed", "9", "--format", "records", "run", fx("configs/tfidf_kmeans.json"), "--output",
                             (dir / "c").string()});
  CHECK(nlohmann::json::parse(reseeded.out).at("seed") == 9);

  const auto unknown = cli({"run", fx("configs/unknown_detector.json"), "--output", (dir / "u").string()});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("detector registry") != std::string::npos);
  CHECK(cli({"run", (dir / "nope.json").string()}).code == kExitIo);

  const auto table = cli({"report", (dir / "b").string()});
  CHECK(table.code == kExitOk);
  CHECK(table.out.find("nmi") != std::string::npos);
  CHECK(cli({"report", dir.string()}).code == kExitIo);
}

TEST_CASE("bench") {
  const auto dir = testpaths::scratch("cli_bench");
  const auto serial = cli({"--jobs", "1", "bench", fx("bench.json"), "--output", (dir / "serial").string()});
  REQUIRE(serial.code == kExitOk);
  const auto parallel = cli({"--jobs", "3", "bench", fx("bench.json"), "--output", (dir / "parallel").string()});
  REQUIRE(parallel.code == kExitOk);
  CHECK(slurp(dir / "serial" / "table.tsv") == slurp(dir / "parallel" / "table.tsv"));
  CHECK(count_lines(slurp(dir / "serial" / "table.tsv")) == 3);  // header + 2 detectors
  std::size_t bundles = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "serial" / "runs")) {
    if (e.path().filename() == "assignment.tsv") ++bundles;
  }
  CHECK(bundles == 6);
  const auto reported = cli({"report", (dir / "serial").string()});
  CHECK(reported.code == kExitOk);
  CHECK(reported.out == serial.out);

  const auto iso = cli({"bench", fx("bench_isolation.json"), "--output", (dir / "iso").string()});
  CHECK(iso.code == kExitOk);
  CHECK(iso.err.find("UnknownMessageId") != std::string::npos);
  CHECK(slurp(dir / "iso" / "table.tsv").find("failed") != std::string::npos);

  CHECK(cli({"bench", fx("bench_no_seeds.json"), "--output", (dir / "none").string()}).code == kExitUsage);
  CHECK(!fs::exists(dir / "none"));
}
