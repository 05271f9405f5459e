#include "sedkit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "sedkit/error.hpp"
#include "sedkit/text_util.hpp"

namespace sedkit {

namespace {

using Json = nlohmann::json;

std::map<std::string, std::string> tweet_mapping() {
  return {{"tweet_id", "id"},       {"text", "text"},         {"created_at", "timestamp"},
          {"user_id", "user_id"},   {"entities", "entities"}, {"hashtags", "hashtags"},
          {"user_mentions", "mentions"}, {"event_id", "event_id"}};
}

std::map<std::string, std::string> crisis_mapping(std::string text_col, std::string label_col) {
  return {{"tweet_id", "id"}, {std::move(text_col), "text"}, {std::move(label_col), "event_id"},
          {"created_at", "timestamp"}, {"user_id", "user_id"}, {"hashtags", "hashtags"}};
}

std::map<std::string, std::string> document_mapping() {
  return {{"id", "id"}, {"sentence", "text"}, {"event_type", "event_id"}, {"entities", "entities"}};
}

std::vector<DatasetManifest> make_catalog() {
  return {
      {"Event2012", 503, 68841, "en", tweet_mapping()},
      {"Event2018", 257, 64516, "fr", tweet_mapping()},
      {"ArabicTwitter", 7, 9070, "ar", tweet_mapping()},
      {"MAVEN", 164, 10242, "en", document_mapping()},
      {"CrisisLexT26", 26, 27933, "en", crisis_mapping("tweet_text", "event")},
      {"CrisisLexT6", 6, 60082, "en", crisis_mapping("tweet_text", "event")},
      {"CrisisMMD", 7, 18082, "en", crisis_mapping("tweet_text", "event_name")},
      {"CrisisNLP", 11, 25976, "en", crisis_mapping("text", "event")},
      {"HumAID", 19, 76484, "en", crisis_mapping("tweet_text", "event")},
      {"MixData", 5, 78489, "en", crisis_mapping("text", "event")},
      {"KBP", 100, 85569, "en", document_mapping()},
      {"Event2012_100", 100, 15019, "en", tweet_mapping()},
      {"Event2018_100", 100, 19944, "fr", tweet_mapping()},
      {"Arabic_7", 7, 3022, "ar", tweet_mapping()},
  };
}

std::string normalize_hashtag(std::string_view tag) {
  while (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  return to_lower_utf8(tag);
}

void normalize(Message& m) {
  for (auto& h : m.hashtags) h = normalize_hashtag(h);
  std::erase_if(m.hashtags, [](const std::string& h) { return h.empty(); });
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s.front() == '-') ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) throw Error(ErrorCode::kSchemaError, "bad timestamp: " + std::string(s));
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    throw Error(ErrorCode::kSchemaError, "bad timestamp: " + std::string(s));
  }
  return v;
}

std::int64_t to_epoch(int y, unsigned mo, unsigned d, int h, int mi, int sec) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) throw Error(ErrorCode::kSchemaError, "invalid calendar date");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::vector<std::string> split_list_cell(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '[') {
    cell.remove_prefix(1);
    if (!cell.empty() && cell.back() == ']') cell.remove_suffix(1);
  }
  std::vector<std::string> out;
  for (auto part : split(cell, ',')) {
    part = trim(part);
    if (part.size() >= 2 && (part.front() == '\'' || part.front() == '"') && part.back() == part.front()) {
      part = part.substr(1, part.size() - 2);
    }
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::string scalar_to_string(const Json& v, std::string_view field, std::size_t line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  throw ParseError(line, "field '" + std::string(field) + "' must be a string or integer");
}

std::vector<std::string> list_field(const Json& v, std::string_view field, std::size_t line) {
  if (v.is_null()) return {};
  if (v.is_string()) return split_list_cell(v.get<std::string>());
  if (!v.is_array()) throw ParseError(line, "field '" + std::string(field) + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (item.is_null()) continue;
    out.push_back(scalar_to_string(item, field, line));
  }
  return out;
}

// Assigns one canonical field from a JSON value.
void assign_field(RawMessage& raw, std::string_view field, const Json& v, std::size_t line) {
  Message& m = raw.message;
  if (field == "id") {
    m.id = scalar_to_string(v, field, line);
  } else if (field == "text") {
    if (!v.is_string()) throw ParseError(line, "field 'text' must be a string");
    m.text = v.get<std::string>();
  } else if (field == "timestamp") {
    if (v.is_null()) return;
    if (v.is_number_integer()) {
      m.timestamp = v.get<std::int64_t>();
    } else if (v.is_string()) {
      try {
        m.timestamp = parse_timestamp(v.get<std::string>());
      } catch (const Error& e) {
        throw ParseError(line, e.what());
      }
    } else {
      throw ParseError(line, "field 'timestamp' must be an integer or date string");
    }
  } else if (field == "user_id") {
    if (!v.is_null()) m.user_id = scalar_to_string(v, field, line);
  } else if (field == "entities") {
    m.entities = list_field(v, field, line);
  } else if (field == "hashtags") {
    m.hashtags = list_field(v, field, line);
  } else if (field == "mentions") {
    m.mentions = list_field(v, field, line);
  } else if (field == "event_id") {
    if (!v.is_null()) raw.label = scalar_to_string(v, field, line);
  }
}

void assign_cell(RawMessage& raw, std::string_view field, std::string_view cell, std::size_t line) {
  Message& m = raw.message;
  if (field == "id") {
    m.id = std::string(trim(cell));
  } else if (field == "text") {
    m.text = std::string(cell);
  } else if (field == "timestamp") {
    if (trim(cell).empty()) return;
    try {
      m.timestamp = parse_timestamp(cell);
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
  } else if (field == "user_id") {
    m.user_id = std::string(trim(cell));
  } else if (field == "entities") {
    m.entities = split_list_cell(cell);
  } else if (field == "hashtags") {
    m.hashtags = split_list_cell(cell);
  } else if (field == "mentions") {
    m.mentions = split_list_cell(cell);
  } else if (field == "event_id") {
    auto t = trim(cell);
    if (!t.empty()) raw.label = std::string(t);
  }
}

// Seconds east of UTC for "", "Z", "+hh:mm", "+hhmm" or "-hh", after
// optional fractional seconds (dropped).
std::int64_t utc_offset(std::string_view z, std::string_view whole) {
  if (!z.empty() && z[0] == '.') {
    z.remove_prefix(1);
    while (!z.empty() && z[0] >= '0' && z[0] <= '9') z.remove_prefix(1);
  }
  if (z.empty() || z == "Z") return 0;
  std::string digits;
  for (char c : z.substr(1)) {
    if (c != ':') digits += c;
  }
  if ((z[0] != '+' && z[0] != '-') || (digits.size() != 2 && digits.size() != 4) || !all_digits(digits)) {
    throw Error(ErrorCode::kSchemaError, "unrecognized timestamp '" + std::string(whole) + "'");
  }
  const std::int64_t minutes = std::stoll(digits.substr(0, 2)) * 60 + (digits.size() == 4 ? std::stoll(digits.substr(2)) : 0);
  return (z[0] == '-' ? -60 : 60) * minutes;
}

}  // namespace

std::string DatasetManifest::source_for(std::string_view field) const {
  for (const auto& [source, target] : field_mapping) {
    if (target == field) return source;
  }
  return std::string(field);
}

std::span<const DatasetManifest> builtin_manifests() {
  static const std::vector<DatasetManifest> catalog = make_catalog();
  return catalog;
}

const DatasetManifest* find_manifest(std::string_view name) {
  for (const auto& m : builtin_manifests()) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const DatasetManifest& require_manifest(std::string_view name) {
  if (const auto* m = find_manifest(name)) return *m;
  std::string known;
  for (const auto& m : builtin_manifests()) known += (known.empty() ? "" : ", ") + m.name;
  throw Error(ErrorCode::kUnknownDataset, "no manifest named '" + std::string(name) + "' (known: " + known + ")");
}

DatasetManifest load_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.expected_events = j.at("expected_events").get<std::uint64_t>();
    m.expected_texts = j.at("expected_texts").get<std::uint64_t>();
    m.language = j.value("language", "en");
    if (j.contains("field_mapping")) {
      m.field_mapping = j.at("field_mapping").get<std::map<std::string, std::string>>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
  if (m.expected_events == 0 || m.expected_texts == 0) {
    throw Error(ErrorCode::kConfigError, path.string() + ": expected counts must be positive");
  }
  if (m.field_mapping.empty()) {
    for (auto f : kMessageFields) m.field_mapping.emplace(std::string(f), std::string(f));
  }
  for (std::string_view required : {"id", "text", "event_id"}) {
    const bool covered = std::any_of(m.field_mapping.begin(), m.field_mapping.end(),
                                     [&](const auto& kv) { return kv.second == required; });
    if (!covered) {
      throw Error(ErrorCode::kConfigError, path.string() + ": field_mapping lacks '" + std::string(required) + "'");
    }
  }
  return m;
}

DatasetManifest identity_manifest(std::string name) {
  DatasetManifest m;
  m.name = std::move(name);
  m.language = "en";
  for (auto f : kMessageFields) m.field_mapping.emplace(std::string(f), std::string(f));
  return m;
}

Corpus Corpus::build(std::string name, std::vector<RawMessage> raw, const DatasetManifest* manifest) {
  if (raw.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus '" + name + "' has no messages");

  std::size_t with_label = 0;
  for (auto& r : raw) {
    if (r.message.id.empty()) throw Error(ErrorCode::kSchemaError, "message with empty id");
    normalize(r.message);
    if (r.label) ++with_label;
  }
  if (with_label != 0 && with_label != raw.size()) {
    throw Error(ErrorCode::kSchemaError, "mixed labeling: " + std::to_string(with_label) + " of " +
                                             std::to_string(raw.size()) + " messages carry an event_id");
  }

  std::stable_sort(raw.begin(), raw.end(), [](const RawMessage& a, const RawMessage& b) {
    if (a.message.timestamp != b.message.timestamp) return a.message.timestamp < b.message.timestamp;
    return a.message.id < b.message.id;
  });

  Corpus c;
  c.name_ = std::move(name);
  c.labeled_ = with_label != 0;
  c.messages_.reserve(raw.size());
  std::unordered_map<std::string, std::uint32_t> dense;
  for (auto& r : raw) {
    auto [it, inserted] = c.index_.emplace(r.message.id, c.messages_.size());
    if (!inserted) throw Error(ErrorCode::kDuplicateId, r.message.id);
    Message m = std::move(r.message);
    m.event_id.reset();
    if (r.label) {
      auto [slot, fresh] = dense.emplace(*r.label, static_cast<std::uint32_t>(dense.size()));
      m.event_id = slot->second;
    }
    c.messages_.push_back(std::move(m));
  }
  c.event_count_ = dense.size();
  if (manifest) {
    if (c.labeled_ && c.event_count_ > manifest->expected_events) {
      throw Error(ErrorCode::kSchemaError, "corpus has " + std::to_string(c.event_count_) +
                                               " events, manifest '" + manifest->name + "' allows " +
                                               std::to_string(manifest->expected_events));
    }
    c.manifest_name_ = manifest->name;
  }
  return c;
}

Corpus Corpus::from_messages(std::string name, std::vector<Message> messages, const DatasetManifest* manifest) {
  std::vector<RawMessage> raw;
  raw.reserve(messages.size());
  for (auto& m : messages) {
    RawMessage r;
    if (m.event_id) r.label = std::to_string(*m.event_id);
    r.message = std::move(m);
    raw.push_back(std::move(r));
  }
  return build(std::move(name), std::move(raw), manifest);
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> Corpus::labels() const {
  if (!labeled_) throw Error(ErrorCode::kUnlabeledCorpus, "corpus '" + name_ + "' has no event labels");
  std::vector<std::uint32_t> out;
  out.reserve(messages_.size());
  for (const auto& m : messages_) out.push_back(*m.event_id);
  return out;
}

Corpus parse_corpus(std::istream& in, const DatasetManifest& manifest, std::string name, bool attach_manifest) {
  // canonical field -> accepted keys, mapped source first
  std::vector<std::pair<std::string_view, std::vector<std::string>>> keys;
  for (auto field : kMessageFields) {
    std::vector<std::string> accepted{manifest.source_for(field)};
    if (accepted.front() != field) accepted.emplace_back(field);
    keys.emplace_back(field, std::move(accepted));
  }

  std::vector<RawMessage> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    RawMessage r;
    for (const auto& [field, accepted] : keys) {
      const Json* value = nullptr;
      for (const auto& key : accepted) {
        if (auto it = j.find(key); it != j.end()) {
          value = &*it;
          break;
        }
      }
      if (!value) {
        if (field == "id" || field == "text") {
          throw Error(ErrorCode::kSchemaError,
                      "line " + std::to_string(line_no) + ": missing field '" + accepted.front() + "'");
        }
        continue;
      }
      assign_field(r, field, *value, line_no);
    }
    if (r.message.id.empty()) {
      throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": empty id");
    }
    raw.push_back(std::move(r));
  }
  if (raw.empty()) throw Error(ErrorCode::kEmptyCorpus, "'" + name + "' contains no records");
  return Corpus::build(std::move(name), std::move(raw), attach_manifest ? &manifest : nullptr);
}

Corpus load_corpus(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse_corpus(in, manifest, manifest.name);
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse_corpus(in, identity_manifest(path.stem().string()), path.stem().string(), false);
}

Corpus convert_tsv(std::istream& in, const DatasetManifest& manifest) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyCorpus, "tab-separated input has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> columns;
  for (auto c : split(line, '\t')) columns.emplace_back(trim(c));

  std::vector<std::string> field_of(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (auto it = manifest.field_mapping.find(columns[i]); it != manifest.field_mapping.end()) {
      field_of[i] = it->second;
    }
  }
  for (std::string_view required : {"id", "text"}) {
    if (std::find(field_of.begin(), field_of.end(), required) == field_of.end()) {
      throw Error(ErrorCode::kSchemaError,
                  "header lacks column '" + manifest.source_for(required) + "' for field '" + std::string(required) + "'");
    }
  }

  std::vector<RawMessage> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, '\t');
    if (cells.size() != columns.size()) {
      throw ParseError(line_no, "expected " + std::to_string(columns.size()) + " columns, found " +
                                    std::to_string(cells.size()));
    }
    RawMessage r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!field_of[i].empty()) assign_cell(r, field_of[i], cells[i], line_no);
    }
    if (r.message.id.empty()) throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": empty id");
    raw.push_back(std::move(r));
  }
  if (raw.empty()) throw Error(ErrorCode::kEmptyCorpus, "tab-separated input has no records");
  return Corpus::build(manifest.name, std::move(raw), &manifest);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& m : corpus.messages()) {
    Json j = {{"id", m.id},
              {"text", m.text},
              {"timestamp", m.timestamp},
              {"user_id", m.user_id},
              {"entities", m.entities},
              {"hashtags", m.hashtags},
              {"mentions", m.mentions}};
    if (m.event_id) j["event_id"] = *m.event_id;
    out << j.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_corpus(out, corpus);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::int64_t parse_timestamp(std::string_view text) {
  auto s = trim(text);
  if (all_digits(s)) {
    std::int64_t v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
  }
  // 2012-10-10[ T]20:19:24[Z|+00:00]
  if (s.size() >= 19 && s[4] == '-' && s[7] == '-' && (s[10] == ' ' || s[10] == 'T')) {
    return to_epoch(parse_fixed(s, 0, 4), static_cast<unsigned>(parse_fixed(s, 5, 2)),
                    static_cast<unsigned>(parse_fixed(s, 8, 2)), parse_fixed(s, 11, 2), parse_fixed(s, 14, 2),
                    parse_fixed(s, 17, 2)) -
           utc_offset(s.substr(19), text);
  }
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    return to_epoch(parse_fixed(s, 0, 4), static_cast<unsigned>(parse_fixed(s, 5, 2)),
                    static_cast<unsigned>(parse_fixed(s, 8, 2)), 0, 0, 0);
  }
  // Wed Oct 10 20:19:24 +0000 2012
  static constexpr std::string_view kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  auto parts = split(s, ' ');
  std::erase_if(parts, [](std::string_view p) { return p.empty(); });
  if (parts.size() == 6 && parts[3].size() == 8) {
    auto month = std::find(std::begin(kMonths), std::end(kMonths), parts[1]);
    if (month != std::end(kMonths)) {
      const auto mo = static_cast<unsigned>(month - std::begin(kMonths) + 1);
      return to_epoch(parse_fixed(parts[5], 0, 4), mo, static_cast<unsigned>(parse_fixed(parts[2], 0, parts[2].size())),
                      parse_fixed(parts[3], 0, 2), parse_fixed(parts[3], 3, 2), parse_fixed(parts[3], 6, 2)) -
             utc_offset(parts[4], text);
    }
  }
  throw Error(ErrorCode::kSchemaError, "unrecognized timestamp '" + std::string(s) + "'");
}

ValidationReport validate_manifest(const Corpus& corpus, const DatasetManifest& manifest) {
  ValidationReport r;
  r.dataset = manifest.name;
  r.expected_events = manifest.expected_events;
  r.expected_texts = manifest.expected_texts;
  r.actual_events = corpus.event_count();
  r.actual_texts = corpus.size();
  r.events_match = r.actual_events == r.expected_events;
  r.texts_match = r.actual_texts == r.expected_texts;
  r.matches = r.events_match && r.texts_match;
  return r;
}

std::string format_report(const ValidationReport& r) {
  std::ostringstream os;
  os << r.dataset << ": events " << r.actual_events << "/" << r.expected_events
     << (r.events_match ? " ok" : " MISMATCH") << ", texts " << r.actual_texts << "/" << r.expected_texts
     << (r.texts_match ? " ok" : " MISMATCH");
  return os.str();
}

BlockSplit split_blocks(const Corpus& corpus, const BlockPolicy& policy) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot split an empty corpus");
  const auto& msgs = corpus.messages();
  const std::size_t n = msgs.size();
  BlockSplit out;

  if (const auto* fc = std::get_if<FixedCount>(&policy)) {
    if (fc->blocks <= 0) throw Error(ErrorCode::kInvalidPolicy, "block count must be positive");
    const auto k = static_cast<std::size_t>(fc->blocks);
    if (k > n) {
      throw Error(ErrorCode::kInvalidPolicy,
                  "block count " + std::to_string(k) + " exceeds message count " + std::to_string(n));
    }
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t begin = 0;
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t size = base + (b < extra ? 1 : 0);
      out.blocks.push_back({begin, begin + size});
      out.boundaries.push_back(msgs[begin].timestamp);
      begin += size;
    }
    return out;
  }

  const auto& fw = std::get<FixedWindow>(policy);
  if (fw.seconds <= 0) throw Error(ErrorCode::kInvalidPolicy, "window must be positive");
  const std::int64_t origin = msgs.front().timestamp;
  std::size_t begin = 0;
  while (begin < n) {
    const std::int64_t window = (msgs[begin].timestamp - origin) / fw.seconds;
    const std::int64_t window_end = origin + (window + 1) * fw.seconds;
    std::size_t end = begin;
    while (end < n && msgs[end].timestamp < window_end) ++end;
    out.blocks.push_back({begin, end});
    out.boundaries.push_back(origin + window * fw.seconds);
    begin = end;
  }
  return out;
}

}  // namespace sedkit
