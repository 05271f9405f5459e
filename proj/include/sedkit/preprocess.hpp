#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sedkit/corpus.hpp"
#include "sedkit/graph.hpp"

namespace sedkit {

using TokenList = std::vector<std::string>;
using StopwordSet = std::set<std::string, std::less<>>;

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

enum class TokenPolicy { kDrop, kSentinel, kKeep };
/// "drop", "sentinel" or "keep"; anything else throws ConfigError.
TokenPolicy parse_token_policy(std::string_view value);
std::string_view to_string(TokenPolicy policy);

struct TokenizerConfig {
  TokenPolicy urls = TokenPolicy::kDrop;
  TokenPolicy mentions = TokenPolicy::kDrop;
  std::size_t min_length = 1;  // in code points

  /// Plain-text "key = value" lines; keys: urls, mentions, min_length.
  static TokenizerConfig parse(std::istream& in);
  static TokenizerConfig load(const std::filesystem::path& path);
};

/// Lowercases, strips punctuation, keeps hashtag words (without '#') and
/// handles URLs / @mentions per config. Sentinel tokens re-tokenize to
/// themselves, so tokenization is idempotent on its joined output.
TokenList tokenize_text(std::string_view text, const TokenizerConfig& config = {});
std::vector<TokenList> tokenize_corpus(const Corpus& corpus, const TokenizerConfig& config = {});

/// One token per line; '#' starts a comment.
StopwordSet load_stopwords(const std::filesystem::path& path);
/// `<dir>/<language>.txt`, or an empty set when no list exists.
StopwordSet stopwords_for_language(const std::filesystem::path& dir, std::string_view language);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint32_t> document_frequency,
             std::size_t documents);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t documents() const { return documents_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::uint32_t index) const { return tokens_[index]; }
  std::uint32_t document_frequency(std::uint32_t index) const { return df_[index]; }
  std::optional<std::uint32_t> index(std::string_view token) const;

  /// ln((1 + N) / (1 + df)) + 1
  double idf(std::uint32_t index) const;

  /// In-vocabulary token indices of a document, order preserved.
  std::vector<std::uint32_t> encode(const TokenList& doc) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint32_t> df_;
  std::size_t documents_ = 0;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

/// Indices ordered by descending document frequency, then token. Throws
/// EmptyVocabulary when nothing survives min_count and stopword filtering.
Vocabulary build_vocabulary(std::span<const TokenList> docs, std::size_t min_count,
                            const StopwordSet& stopwords = {});

struct DocVector {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> weights;
  std::size_t dimension = 0;

  double norm() const;
  std::vector<double> dense() const;
};

std::vector<DocVector> tfidf_vectorize(std::span<const TokenList> docs, const Vocabulary& vocab);
std::vector<std::vector<double>> to_dense(std::span<const DocVector> docs);

enum class Relation { kHashtag, kEntity, kMention, kUser };
using RelationSet = std::set<Relation>;

RelationSet all_relations();
/// Comma-separated names: hashtag, entity, mention, user.
RelationSet parse_relations(std::string_view spec);
std::string to_string(const RelationSet& relations);

struct SemanticKnn {
  std::span<const std::vector<double>> vectors;
  std::size_t k = 0;
};

/// Message graph: one edge per pair sharing selected attributes, weighted by
/// the number of shared attribute values, plus 1 when either message is
/// among the other's k nearest cosine neighbours.
MessageGraph construct_graph(const Corpus& corpus, const RelationSet& relations,
                             std::optional<SemanticKnn> semantic_knn = std::nullopt);

/// Keyword co-occurrence graph over vocabulary tokens; an edge's weight is
/// the number of documents containing both tokens.
MessageGraph build_keyword_graph(std::span<const TokenList> docs, const Vocabulary& vocab,
                                 std::uint32_t min_cooccur);

}  // namespace sedkit
