#include <doctest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "paths.hpp"
#include "sedkit/corpus.hpp"
#include "sedkit/error.hpp"

using namespace sedkit;

namespace {

Message msg(std::string id, std::int64_t ts, std::optional<std::uint32_t> event = std::nullopt) {
  Message m;
  m.id = std::move(id);
  m.text = "text " + m.id;
  m.timestamp = ts;
  m.event_id = event;
  return m;
}

Corpus sequence(std::size_t n) {
  std::vector<Message> ms;
  for (std::size_t i = 0; i < n; ++i) ms.push_back(msg("m" + std::to_string(i), static_cast<std::int64_t>(i)));
  return Corpus::from_messages("seq", ms);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIoError;
}

}  // namespace

TEST_CASE("built-in manifests carry the published dataset statistics") {
  struct Row {
    const char* name;
    std::uint64_t events, texts;
  };
  const Row rows[] = {{"Event2012", 503, 68841},   {"Event2018", 257, 64516},    {"ArabicTwitter", 7, 9070},
                      {"MAVEN", 164, 10242},       {"CrisisLexT26", 26, 27933},  {"CrisisLexT6", 6, 60082},
                      {"CrisisMMD", 7, 18082},     {"CrisisNLP", 11, 25976},     {"HumAID", 19, 76484},
                      {"MixData", 5, 78489},       {"KBP", 100, 85569},          {"Event2012_100", 100, 15019},
                      {"Event2018_100", 100, 19944}, {"Arabic_7", 7, 3022}};
  CHECK(builtin_manifests().size() == 14);
  for (const auto& r : rows) {
    CAPTURE(r.name);
    const auto* m = find_manifest(r.name);
    REQUIRE(m != nullptr);
    CHECK(m->expected_events == r.events);
    CHECK(m->expected_texts == r.texts);
    for (const char* field : {"id", "text", "event_id"}) {
      bool covered = false;
      for (const auto& [src, dst] : m->field_mapping) covered |= dst == field;
      CHECK(covered);
    }
  }
  CHECK(code_of([] { require_manifest("Event2013"); }) == ErrorCode::kUnknownDataset);
}

TEST_CASE("five-record fixture loads with three dense events") {
  const auto manifest = load_manifest_file(testpaths::fixture("five_manifest.json"));
  const auto c = load_corpus(testpaths::fixture("five.jsonl"), manifest);
  CHECK(c.size() == 5);
  CHECK(c.labeled());
  CHECK(c.event_count() == 3);
  CHECK(c.labels() == std::vector<std::uint32_t>{0, 0, 1, 1, 2});
  CHECK(c[1].hashtags == std::vector<std::string>{"fire"});
  CHECK(validate_manifest(c, manifest).matches);
}

TEST_CASE("loader errors") {
  const auto m = identity_manifest("x");
  SUBCASE("missing file") { CHECK(code_of([] { load_corpus("/nonexistent/file.jsonl"); }) == ErrorCode::kFileNotFound); }
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK(code_of([&] { parse_corpus(in, m, "x"); }) == ErrorCode::kEmptyCorpus);
  }
  SUBCASE("bad json reports its line") {
    std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n{broken\n");
    try {
      parse_corpus(in, m, "x");
      FAIL("no throw");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("missing text") {
    std::istringstream in("{\"id\":\"a\"}\n");
    CHECK(code_of([&] { parse_corpus(in, m, "x"); }) == ErrorCode::kSchemaError);
  }
  SUBCASE("duplicate id") {
    std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
    CHECK(code_of([&] { parse_corpus(in, m, "x"); }) == ErrorCode::kDuplicateId);
  }
  SUBCASE("mixed labeling") {
    std::istringstream in("{\"id\":\"a\",\"text\":\"x\",\"event_id\":1}\n{\"id\":\"b\",\"text\":\"y\"}\n");
    CHECK(code_of([&] { parse_corpus(in, m, "x"); }) == ErrorCode::kSchemaError);
  }
  SUBCASE("more events than the manifest allows") {
    DatasetManifest small = identity_manifest("small");
    small.expected_events = 1;
    small.expected_texts = 2;
    std::istringstream in("{\"id\":\"a\",\"text\":\"x\",\"event_id\":1}\n{\"id\":\"b\",\"text\":\"y\",\"event_id\":2}\n");
    CHECK(code_of([&] { parse_corpus(in, small, "small"); }) == ErrorCode::kSchemaError);
  }
}

TEST_CASE("messages are sorted by timestamp then id") {
  const auto c = Corpus::from_messages("s", {msg("b", 5), msg("a", 5), msg("c", 1)});
  CHECK(c[0].id == "c");
  CHECK(c[1].id == "a");
  CHECK(c[2].id == "b");
  CHECK(c.index_of("b") == 2);
}

TEST_CASE("load, serialize, load is the identity") {
  const auto manifest = load_manifest_file(testpaths::fixture("event2012_fixture_manifest.json"));
  std::ifstream tsv(testpaths::fixture("event2012_truncated.tsv"));
  const auto first = convert_tsv(tsv, manifest);
  std::stringstream buf;
  write_corpus(buf, first);
  const auto second = parse_corpus(buf, identity_manifest("again"), "again", false);
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);
  CHECK(validate_manifest(first, manifest).matches);
}

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("1350000000") == 1350000000);
  CHECK(parse_timestamp("2012-10-10 20:19:24") == 1349900364);
  CHECK(parse_timestamp("2012-10-10T20:19:24Z") == 1349900364);
  CHECK(parse_timestamp("Wed Oct 10 20:19:24 +0000 2012") == 1349900364);
  CHECK(parse_timestamp("2012-10-10T22:19:24+02:00") == 1349900364);
  CHECK(parse_timestamp("2012-10-10T20:19:24.250Z") == 1349900364);
  CHECK(parse_timestamp("Wed Oct 10 15:19:24 -0500 2012") == 1349900364);
  CHECK_THROWS_AS(parse_timestamp("2012-10-10T20:19:24 PST"), Error);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("validate_manifest reports mismatches without failing") {
  const auto c = sequence(9);
  DatasetManifest m = identity_manifest("seq");
  m.expected_events = 1;
  m.expected_texts = 10;
  const auto r = validate_manifest(c, m);
  CHECK_FALSE(r.matches);
  CHECK_FALSE(r.texts_match);
  CHECK(r.actual_texts == 9);
  CHECK(r.expected_texts - r.actual_texts == 1);

  const auto* maven = find_manifest("MAVEN");
  const auto subset = sequence(100);
  const auto mr = validate_manifest(subset, *maven);
  CHECK(mr.actual_texts == 100);
  CHECK(mr.expected_texts == 10242);
  CHECK_FALSE(mr.matches);
}

TEST_CASE("split_blocks") {
  const auto c = sequence(10);
  auto sizes = [](const BlockSplit& s) {
    std::vector<std::size_t> out;
    for (const auto& b : s.blocks) out.push_back(b.size());
    return out;
  };
  CHECK(sizes(split_blocks(c, FixedCount{2})) == std::vector<std::size_t>{5, 5});
  CHECK(sizes(split_blocks(c, FixedCount{3})) == std::vector<std::size_t>{4, 3, 3});
  const auto w = split_blocks(c, FixedWindow{5});
  CHECK(sizes(w) == std::vector<std::size_t>{5, 5});
  CHECK(w.boundaries == std::vector<std::int64_t>{0, 5});
  CHECK(code_of([&] { split_blocks(c, FixedCount{0}); }) == ErrorCode::kInvalidPolicy);
  CHECK(code_of([&] { split_blocks(c, FixedCount{11}); }) == ErrorCode::kInvalidPolicy);
  CHECK(code_of([&] { split_blocks(c, FixedWindow{0}); }) == ErrorCode::kInvalidPolicy);

  // Blocks always partition the indices in order.
  for (std::int64_t k = 1; k <= 10; ++k) {
    std::size_t next = 0;
    for (const auto& b : split_blocks(c, FixedCount{k}).blocks) {
      CHECK(b.begin == next);
      next = b.end;
    }
    CHECK(next == c.size());
  }
}
