#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sedkit {

/// One social-media post. Hashtags are stored lowercased without '#'.
struct Message {
  std::string id;
  std::string text;
  std::int64_t timestamp = 0;  // seconds, UTC
  std::string user_id;
  std::vector<std::string> entities;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  std::optional<std::uint32_t> event_id;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Canonical Message field names used by the record format.
inline constexpr std::string_view kMessageFields[] = {
    "id", "text", "timestamp", "user_id", "entities", "hashtags", "mentions", "event_id"};

struct DatasetManifest {
  std::string name;
  std::uint64_t expected_events = 0;
  std::uint64_t expected_texts = 0;
  std::string language;
  // source column -> canonical Message field
  std::map<std::string, std::string> field_mapping;

  // Source column for a canonical field, or the field name itself.
  std::string source_for(std::string_view field) const;
};

/// The built-in dataset catalog (fourteen published social event datasets).
std::span<const DatasetManifest> builtin_manifests();
const DatasetManifest* find_manifest(std::string_view name);
/// Looks up a built-in manifest; throws UnknownDataset.
const DatasetManifest& require_manifest(std::string_view name);
/// Reads a manifest from a JSON object file (fixture manifests).
DatasetManifest load_manifest_file(const std::filesystem::path& path);
/// Identity-mapped manifest placeholder for ad-hoc files.
DatasetManifest identity_manifest(std::string name);

/// Message with its raw, not-yet-densified event label.
struct RawMessage {
  Message message;
  std::optional<std::string> label;
};

class Corpus {
 public:
  Corpus() = default;

  /// Validates, sorts by (timestamp, id), and re-encodes labels densely in
  /// corpus order. Throws DuplicateId, SchemaError (mixed labeling, missing
  /// id, too many events for the manifest) or EmptyCorpus.
  static Corpus build(std::string name, std::vector<RawMessage> raw,
                      const DatasetManifest* manifest = nullptr);
  /// Convenience for programmatic corpora; event_id values are raw labels.
  static Corpus from_messages(std::string name, std::vector<Message> messages,
                              const DatasetManifest* manifest = nullptr);

  const std::string& name() const { return name_; }
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t size() const { return messages_.size(); }
  bool empty() const { return messages_.empty(); }
  bool labeled() const { return labeled_; }
  std::size_t event_count() const { return event_count_; }
  const std::optional<std::string>& manifest_name() const { return manifest_name_; }

  const Message& operator[](std::size_t i) const { return messages_[i]; }
  std::optional<std::size_t> index_of(std::string_view id) const;
  /// Dense event labels in corpus order; requires labeled().
  std::vector<std::uint32_t> labels() const;

 private:
  std::string name_;
  std::vector<Message> messages_;
  std::map<std::string, std::size_t, std::less<>> index_;
  bool labeled_ = false;
  std::size_t event_count_ = 0;
  std::optional<std::string> manifest_name_;
};

/// Loads line-delimited JSON records whose keys follow the manifest's field
/// mapping (canonical field names are accepted as a fallback).
Corpus load_corpus(const std::filesystem::path& path, const DatasetManifest& manifest);
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in, const DatasetManifest& manifest, std::string name,
                    bool attach_manifest = true);

/// Converts a tab-separated export (header row of source columns) into
/// canonical messages using the manifest's field mapping.
Corpus convert_tsv(std::istream& in, const DatasetManifest& manifest);

/// Writes the canonical record format, one JSON object per line.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Parses integer epoch seconds, ISO-8601 ("2012-10-10 20:19:24",
/// "2012-10-10T20:19:24Z") or Twitter's created_at format; all as UTC.
std::int64_t parse_timestamp(std::string_view text);

struct ValidationReport {
  std::string dataset;
  std::uint64_t expected_events = 0;
  std::uint64_t expected_texts = 0;
  std::uint64_t actual_events = 0;
  std::uint64_t actual_texts = 0;
  bool events_match = false;
  bool texts_match = false;
  bool matches = false;
};

ValidationReport validate_manifest(const Corpus& corpus, const DatasetManifest& manifest);
std::string format_report(const ValidationReport& report);

struct FixedCount {
  std::int64_t blocks = 0;
};
struct FixedWindow {
  std::int64_t seconds = 0;
};
using BlockPolicy = std::variant<FixedCount, FixedWindow>;

struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

struct BlockSplit {
  std::vector<std::int64_t> boundaries;  // start timestamp of each block
  std::vector<BlockRange> blocks;
};

/// Temporal blocks over the (sorted) corpus. Fixed-count remainders go to
/// the earliest blocks; fixed windows are anchored at the first timestamp
/// and empty windows are omitted.
BlockSplit split_blocks(const Corpus& corpus, const BlockPolicy& policy);

}  // namespace sedkit
