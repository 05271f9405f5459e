#include "sedkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <unordered_set>

#include "sedkit/error.hpp"
#include "sedkit/text_util.hpp"

namespace sedkit {

namespace {

bool is_space(char32_t cp) {
  return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

std::size_t codepoint_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) decode_utf8(s, pos);
  return n;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c + 32);
    if (c != static_cast<unsigned char>(prefix[i])) return false;
  }
  return true;
}

class Tokenizer {
 public:
  Tokenizer(const TokenizerConfig& config, TokenList& out) : config_(config), out_(out) {}

  void chunk(std::string_view c) {
    if (c == kUrlToken || c == kUserToken) {
      out_.emplace_back(c);
      return;
    }
    if (starts_with_ci(c, "http://") || starts_with_ci(c, "https://") || starts_with_ci(c, "www.")) {
      switch (config_.urls) {
        case TokenPolicy::kDrop: return;
        case TokenPolicy::kSentinel: out_.emplace_back(kUrlToken); return;
        case TokenPolicy::kKeep: words(c); return;
      }
    }
    if (c.size() > 1 && c.front() == '@') {
      std::size_t pos = 1;
      std::size_t end = 1;
      while (pos < c.size()) {
        std::size_t next = pos;
        if (!is_word_codepoint(decode_utf8(c, next))) break;
        end = pos = next;
      }
      if (end > 1) {
        switch (config_.mentions) {
          case TokenPolicy::kDrop: break;
          case TokenPolicy::kSentinel: out_.emplace_back(kUserToken); break;
          case TokenPolicy::kKeep: words(c.substr(1, end - 1)); break;
        }
        words(c.substr(end));
        return;
      }
    }
    words(c);
  }

 private:
  // Splits on non-word code points; apostrophes inside a word are elided.
  void words(std::string_view s) {
    std::string current;
    std::size_t pos = 0;
    while (pos < s.size()) {
      const char32_t cp = decode_utf8(s, pos);
      if (is_word_codepoint(cp)) {
        append_utf8(current, to_lower(cp));
        continue;
      }
      if (is_apostrophe(cp) && !current.empty() && pos < s.size()) {
        std::size_t peek = pos;
        if (is_word_codepoint(decode_utf8(s, peek))) continue;
      }
      flush(current);
    }
    flush(current);
  }

  void flush(std::string& current) {
    if (!current.empty() && codepoint_length(current) >= config_.min_length) out_.push_back(current);
    current.clear();
  }

  const TokenizerConfig& config_;
  TokenList& out_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> attribute_values(const Message& m, Relation r) {
  std::vector<std::string> values;
  switch (r) {
    case Relation::kHashtag:
      values = m.hashtags;
      break;
    case Relation::kEntity:
      for (const auto& e : m.entities) values.push_back(to_lower_utf8(trim(e)));
      break;
    case Relation::kMention:
      for (auto v : m.mentions) {
        std::string_view t = trim(v);
        while (!t.empty() && t.front() == '@') t.remove_prefix(1);
        values.push_back(to_lower_utf8(t));
      }
      break;
    case Relation::kUser:
      values.push_back(m.user_id);
      break;
  }
  std::erase_if(values, [](const std::string& v) { return v.empty(); });
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

}  // namespace

TokenPolicy parse_token_policy(std::string_view value) {
  if (value == "drop") return TokenPolicy::kDrop;
  if (value == "sentinel") return TokenPolicy::kSentinel;
  if (value == "keep") return TokenPolicy::kKeep;
  throw Error(ErrorCode::kConfigError, "token policy must be drop, sentinel or keep; got '" + std::string(value) + "'");
}

std::string_view to_string(TokenPolicy policy) {
  switch (policy) {
    case TokenPolicy::kDrop:
      return "drop";
    case TokenPolicy::kSentinel:
      return "sentinel";
    case TokenPolicy::kKeep:
      return "keep";
  }
  return "drop";
}

TokenizerConfig TokenizerConfig::parse(std::istream& in) {
  TokenizerConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const auto key = trim(t.substr(0, eq));
    const auto value = trim(t.substr(eq + 1));
    if (key == "urls") {
      config.urls = parse_token_policy(value);
    } else if (key == "mentions") {
      config.mentions = parse_token_policy(value);
    } else if (key == "min_length") {
      try {
        config.min_length = std::stoul(std::string(value));
      } catch (const std::exception&) {
        throw ParseError(line_no, "min_length must be a non-negative integer");
      }
    } else {
      throw ParseError(line_no, "unknown tokenizer key '" + std::string(key) + "'");
    }
  }
  return config;
}

TokenizerConfig TokenizerConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse(in);
}

TokenList tokenize_text(std::string_view text, const TokenizerConfig& config) {
  TokenList out;
  Tokenizer tokenizer(config, out);
  std::size_t pos = 0;
  std::size_t chunk_begin = 0;
  while (pos < text.size()) {
    const std::size_t at = pos;
    if (is_space(decode_utf8(text, pos))) {
      if (at > chunk_begin) tokenizer.chunk(text.substr(chunk_begin, at - chunk_begin));
      chunk_begin = pos;
    }
  }
  if (text.size() > chunk_begin) tokenizer.chunk(text.substr(chunk_begin));
  return out;
}

std::vector<TokenList> tokenize_corpus(const Corpus& corpus, const TokenizerConfig& config) {
  std::vector<TokenList> docs;
  docs.reserve(corpus.size());
  for (const auto& m : corpus.messages()) docs.push_back(tokenize_text(m.text, config));
  return docs;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.insert(to_lower_utf8(t));
  }
  return words;
}

StopwordSet stopwords_for_language(const std::filesystem::path& dir, std::string_view language) {
  const auto path = dir / (std::string(language) + ".txt");
  if (!std::filesystem::exists(path)) return {};
  return load_stopwords(path);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint32_t> document_frequency,
                       std::size_t documents)
    : tokens_(std::move(tokens)), df_(std::move(document_frequency)), documents_(documents) {
  if (tokens_.size() != df_.size()) throw Error(ErrorCode::kDimensionMismatch, "token/frequency count mismatch");
  lookup_.reserve(tokens_.size());
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
    if (!lookup_.emplace(tokens_[i], i).second) throw Error(ErrorCode::kDuplicateName, "token '" + tokens_[i] + "'");
  }
}

std::optional<std::uint32_t> Vocabulary::index(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::idf(std::uint32_t index) const {
  return std::log((1.0 + static_cast<double>(documents_)) / (1.0 + static_cast<double>(df_[index]))) + 1.0;
}

std::vector<std::uint32_t> Vocabulary::encode(const TokenList& doc) const {
  std::vector<std::uint32_t> out;
  out.reserve(doc.size());
  for (const auto& t : doc) {
    if (auto i = index(t)) out.push_back(*i);
  }
  return out;
}

Vocabulary build_vocabulary(std::span<const TokenList> docs, std::size_t min_count, const StopwordSet& stopwords) {
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot build a vocabulary from zero documents");
  if (min_count == 0) throw Error(ErrorCode::kInvalidArgument, "min_count must be positive");
  std::unordered_map<std::string, std::uint32_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : doc) {
      if (seen.insert(t).second) ++df[t];
    }
  }
  std::vector<std::pair<std::string, std::uint32_t>> kept;
  for (auto& [token, count] : df) {
    if (count >= min_count && !stopwords.contains(token)) kept.emplace_back(token, count);
  }
  if (kept.empty()) throw Error(ErrorCode::kEmptyVocabulary, "no token reaches min_count " + std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  std::vector<std::uint32_t> freqs;
  for (auto& [token, count] : kept) {
    tokens.push_back(std::move(token));
    freqs.push_back(count);
  }
  return Vocabulary(std::move(tokens), std::move(freqs), docs.size());
}

double DocVector::norm() const {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return std::sqrt(s);
}

std::vector<double> DocVector::dense() const {
  std::vector<double> out(dimension, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = weights[i];
  return out;
}

std::vector<DocVector> tfidf_vectorize(std::span<const TokenList> docs, const Vocabulary& vocab) {
  std::vector<DocVector> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    std::map<std::uint32_t, double> tf;
    for (auto i : vocab.encode(doc)) tf[i] += 1.0;
    DocVector v;
    v.dimension = vocab.size();
    for (const auto& [i, count] : tf) {
      v.indices.push_back(i);
      v.weights.push_back(count * vocab.idf(i));
    }
    if (const double n = v.norm(); n > 0.0) {
      for (double& w : v.weights) w /= n;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<double>> to_dense(std::span<const DocVector> docs) {
  std::vector<std::vector<double>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.dense());
  return out;
}

RelationSet all_relations() {
  return {Relation::kHashtag, Relation::kEntity, Relation::kMention, Relation::kUser};
}

RelationSet parse_relations(std::string_view spec) {
  RelationSet out;
  for (auto part : split(spec, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    if (part == "hashtag" || part == "hashtags") {
      out.insert(Relation::kHashtag);
    } else if (part == "entity" || part == "entities") {
      out.insert(Relation::kEntity);
    } else if (part == "mention" || part == "mentions") {
      out.insert(Relation::kMention);
    } else if (part == "user") {
      out.insert(Relation::kUser);
    } else {
      throw Error(ErrorCode::kConfigError, "unknown relation '" + std::string(part) + "'");
    }
  }
  return out;
}

std::string to_string(const RelationSet& relations) {
  std::string out;
  for (auto r : relations) {
    if (!out.empty()) out += ',';
    switch (r) {
      case Relation::kHashtag: out += "hashtag"; break;
      case Relation::kEntity: out += "entity"; break;
      case Relation::kMention: out += "mention"; break;
      case Relation::kUser: out += "user"; break;
    }
  }
  return out;
}

MessageGraph construct_graph(const Corpus& corpus, const RelationSet& relations,
                             std::optional<SemanticKnn> semantic_knn) {
  const auto& msgs = corpus.messages();
  const std::size_t n = msgs.size();
  if (semantic_knn) {
    if (semantic_knn->vectors.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, std::to_string(semantic_knn->vectors.size()) + " vectors for " +
                                                     std::to_string(n) + " messages");
    }
    if (semantic_knn->k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    if (semantic_knn->k >= n) {
      throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(semantic_knn->k) + " needs more than " +
                                             std::to_string(n) + " messages");
    }
  }

  std::vector<std::string> names;
  names.reserve(n);
  for (const auto& m : msgs) names.push_back(m.id);
  GraphBuilder builder(names);

  // Each (relation, value) bucket links all of its members pairwise.
  std::map<std::pair<Relation, std::string>, std::vector<std::uint32_t>> buckets;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (auto r : relations) {
      for (auto& v : attribute_values(msgs[i], r)) buckets[{r, std::move(v)}].push_back(i);
    }
  }
  for (const auto& [key, members] : buckets) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) builder.add(members[a], members[b], 1.0);
    }
  }

  if (semantic_knn) {
    const auto& vecs = semantic_knn->vectors;
    const std::size_t dim = vecs.front().size();
    for (const auto& v : vecs) {
      if (v.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "semantic vectors have ragged dimensions");
    }
    std::set<std::pair<std::uint32_t, std::uint32_t>> knn_edges;
    std::vector<std::pair<double, std::uint32_t>> scored;
    for (std::uint32_t u = 0; u < n; ++u) {
      scored.clear();
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v != u) scored.emplace_back(cosine(vecs[u], vecs[v]), v);
      }
      // Ties resolve by message id so the result does not depend on input order.
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(semantic_knn->k), scored.end(),
                        [&](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return msgs[a.second].id < msgs[b.second].id;
                        });
      for (std::size_t j = 0; j < semantic_knn->k; ++j) knn_edges.insert(std::minmax(u, scored[j].second));
    }
    for (const auto& [u, v] : knn_edges) builder.add(u, v, 1.0);
  }
  return std::move(builder).build();
}

MessageGraph build_keyword_graph(std::span<const TokenList> docs, const Vocabulary& vocab, std::uint32_t min_cooccur) {
  if (vocab.empty()) throw Error(ErrorCode::kEmptyVocabulary, "keyword graph needs a non-empty vocabulary");
  if (min_cooccur == 0) throw Error(ErrorCode::kInvalidArgument, "min_cooccur must be positive");
  GraphBuilder builder(vocab.tokens());
  for (const auto& doc : docs) {
    auto ids = vocab.encode(doc);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) builder.add(ids[a], ids[b], 1.0);
    }
  }
  builder.prune_below(static_cast<double>(min_cooccur));
  return std::move(builder).build();
}

}  // namespace sedkit
