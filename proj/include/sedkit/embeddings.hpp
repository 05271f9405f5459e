#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sedkit/corpus.hpp"
#include "sedkit/preprocess.hpp"

namespace sedkit {

/// Token -> dense vector of a fixed dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, std::size_t dimension, std::vector<double> values);

  std::size_t size() const { return tokens_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::uint32_t> index(std::string_view token) const;
  std::span<const double> vector(std::uint32_t row) const { return {values_.data() + row * dimension_, dimension_}; }

  /// Header "V d", then "token v1 ... vd" per line. Headerless files (GloVe
  /// text format) are accepted on load.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static EmbeddingTable load(std::istream& in);
  static EmbeddingTable load(const std::filesystem::path& path);

  /// Rows restricted to tokens of the vocabulary, in vocabulary order.
  EmbeddingTable restrict_to(const Vocabulary& vocab) const;

 private:
  std::vector<std::string> tokens_;
  std::size_t dimension_ = 0;
  std::vector<double> values_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct SgnsOptions {
  std::size_t dimension = 50;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

/// Skip-gram with negative sampling (unigram^0.75 noise), single-threaded.
/// Rows follow vocabulary order.
EmbeddingTable train_embeddings(std::span<const TokenList> docs, const Vocabulary& vocab, const SgnsOptions& options);

/// Mean of in-table token vectors; the zero vector when none is in the table.
std::vector<double> document_embedding(const TokenList& doc, const EmbeddingTable& table);
std::vector<std::vector<double>> document_embeddings(std::span<const TokenList> docs, const EmbeddingTable& table);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Precomputed per-message vectors ("message_id v1 ... vd" per line),
/// returned in corpus order.
std::vector<std::vector<double>> load_external_embeddings(const std::filesystem::path& path, const Corpus& corpus);
std::vector<std::vector<double>> parse_external_embeddings(std::istream& in, const Corpus& corpus);

}  // namespace sedkit
