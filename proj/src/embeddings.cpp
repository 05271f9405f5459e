#include "sedkit/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sedkit/error.hpp"
#include "sedkit/graph.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/text_util.hpp"

namespace sedkit {

namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

double parse_number(std::string_view s, std::size_t line) {
  // from_chars for double is available in libstdc++ 11.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

bool is_unsigned(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

double sigmoid(double x) {
  if (x > 20.0) return 1.0;
  if (x < -20.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, std::size_t dimension, std::vector<double> values)
    : tokens_(std::move(tokens)), dimension_(dimension), values_(std::move(values)) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  if (values_.size() != tokens_.size() * dimension_) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding values do not match tokens x dimension");
  }
  lookup_.reserve(tokens_.size());
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
    if (!lookup_.emplace(tokens_[i], i).second) throw Error(ErrorCode::kDuplicateName, "token '" + tokens_[i] + "'");
  }
}

std::optional<std::uint32_t> EmbeddingTable::index(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingTable::save(std::ostream& out) const {
  out << size() << ' ' << dimension_ << '\n';
  for (std::uint32_t i = 0; i < size(); ++i) {
    out << tokens_[i];
    for (double v : vector(i)) out << ' ' << format_double(v);
    out << '\n';
  }
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  save(out);
}

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::size_t dim = 0;
  std::optional<std::size_t> declared_rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = fields(line);
    if (f.empty()) continue;
    if (line_no == 1 && f.size() == 2 && is_unsigned(f[0]) && is_unsigned(f[1])) {
      declared_rows = std::stoul(std::string(f[0]));
      dim = std::stoul(std::string(f[1]));
      continue;
    }
    if (f.size() < 2) throw ParseError(line_no, "expected a token followed by values");
    if (dim == 0) dim = f.size() - 1;
    if (f.size() - 1 != dim) {
      throw Error(ErrorCode::kRaggedDimensions, "line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(dim) + " values, found " + std::to_string(f.size() - 1));
    }
    tokens.emplace_back(f[0]);
    for (std::size_t j = 1; j < f.size(); ++j) values.push_back(parse_number(f[j], line_no));
  }
  if (declared_rows && *declared_rows != tokens.size()) {
    throw Error(ErrorCode::kRowCountMismatch, "header declares " + std::to_string(*declared_rows) + " rows, found " +
                                                  std::to_string(tokens.size()));
  }
  if (tokens.empty()) throw Error(ErrorCode::kEmptyVocabulary, "embedding table has no rows");
  return EmbeddingTable(std::move(tokens), dim, std::move(values));
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return load(in);
}

EmbeddingTable EmbeddingTable::restrict_to(const Vocabulary& vocab) const {
  std::vector<std::string> tokens;
  std::vector<double> values;
  for (const auto& t : vocab.tokens()) {
    if (auto row = index(t)) {
      tokens.push_back(t);
      auto v = vector(*row);
      values.insert(values.end(), v.begin(), v.end());
    }
  }
  if (tokens.empty()) throw Error(ErrorCode::kEmptyVocabulary, "no vocabulary token has an embedding");
  return EmbeddingTable(std::move(tokens), dimension_, std::move(values));
}

EmbeddingTable train_embeddings(std::span<const TokenList> docs, const Vocabulary& vocab, const SgnsOptions& options) {
  if (vocab.empty()) throw Error(ErrorCode::kEmptyVocabulary, "cannot train embeddings without a vocabulary");
  if (options.dimension == 0 || options.window == 0 || options.negatives == 0 || options.epochs == 0) {
    throw Error(ErrorCode::kInvalidHyperparameter, "dimension, window, negatives and epochs must be at least 1");
  }
  if (!(options.learning_rate > 0.0)) throw Error(ErrorCode::kInvalidHyperparameter, "learning_rate must be positive");

  const std::size_t V = vocab.size();
  const std::size_t dim = options.dimension;
  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(docs.size());
  std::vector<double> counts(V, 0.0);
  std::size_t total_tokens = 0;
  for (const auto& d : docs) {
    encoded.push_back(vocab.encode(d));
    for (auto w : encoded.back()) counts[w] += 1.0;
    total_tokens += encoded.back().size();
  }

  std::vector<double> noise(V);
  double acc = 0.0;
  for (std::size_t w = 0; w < V; ++w) {
    acc += std::pow(counts[w], 0.75);
    noise[w] = acc;
  }

  Rng rng(options.seed);
  std::vector<double> input(V * dim);
  std::vector<double> output(V * dim, 0.0);
  for (double& v : input) v = (rng.uniform() - 0.5) / static_cast<double>(dim);

  auto draw_negative = [&]() -> std::uint32_t {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(noise.begin(), noise.end(), u);
    return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - noise.begin(), static_cast<std::ptrdiff_t>(V - 1)));
  };

  const double total_steps = static_cast<double>(std::max<std::size_t>(1, total_tokens * options.epochs));
  double processed = 0.0;
  std::vector<double> grad(dim);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& doc : encoded) {
      for (std::size_t pos = 0; pos < doc.size(); ++pos) {
        const double lr = std::max(options.learning_rate * 1e-4, options.learning_rate * (1.0 - processed / total_steps));
        processed += 1.0;
        const std::size_t lo = pos >= options.window ? pos - options.window : 0;
        const std::size_t hi = std::min(doc.size(), pos + options.window + 1);
        for (std::size_t c = lo; c < hi; ++c) {
          if (c == pos) continue;
          double* in = input.data() + static_cast<std::size_t>(doc[c]) * dim;
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t s = 0; s <= options.negatives; ++s) {
            std::uint32_t target;
            double label;
            if (s == 0) {
              target = doc[pos];
              label = 1.0;
            } else {
              target = draw_negative();
              if (target == doc[pos]) continue;
              label = 0.0;
            }
            double* out = output.data() + static_cast<std::size_t>(target) * dim;
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += in[j] * out[j];
            const double g = (label - sigmoid(dot)) * lr;
            for (std::size_t j = 0; j < dim; ++j) {
              grad[j] += g * out[j];
              out[j] += g * in[j];
            }
          }
          for (std::size_t j = 0; j < dim; ++j) in[j] += grad[j];
        }
      }
    }
  }
  return EmbeddingTable(vocab.tokens(), dim, std::move(input));
}

std::vector<double> document_embedding(const TokenList& doc, const EmbeddingTable& table) {
  std::vector<double> out(table.dimension(), 0.0);
  std::size_t found = 0;
  for (const auto& t : doc) {
    if (auto row = table.index(t)) {
      auto v = table.vector(*row);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[j];
      ++found;
    }
  }
  if (found > 0) {
    for (double& v : out) v /= static_cast<double>(found);
  }
  return out;
}

std::vector<std::vector<double>> document_embeddings(std::span<const TokenList> docs, const EmbeddingTable& table) {
  std::vector<std::vector<double>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(document_embedding(d, table));
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::vector<double>> parse_external_embeddings(std::istream& in, const Corpus& corpus) {
  std::vector<std::vector<double>> out(corpus.size());
  std::vector<bool> filled(corpus.size(), false);
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = fields(line);
    if (f.empty()) continue;
    if (f.size() < 2) throw ParseError(line_no, "expected a message id followed by values");
    if (rows == 0) dim = f.size() - 1;
    if (f.size() - 1 != dim) {
      throw Error(ErrorCode::kRaggedDimensions, "line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(dim) + " values, found " + std::to_string(f.size() - 1));
    }
    ++rows;
    const auto idx = corpus.index_of(f[0]);
    if (!idx) throw Error(ErrorCode::kUnknownMessageId, std::string(f[0]));
    if (filled[*idx]) throw Error(ErrorCode::kDuplicateId, std::string(f[0]));
    filled[*idx] = true;
    auto& v = out[*idx];
    v.reserve(dim);
    for (std::size_t j = 1; j < f.size(); ++j) v.push_back(parse_number(f[j], line_no));
  }
  if (rows != corpus.size()) {
    throw Error(ErrorCode::kRowCountMismatch,
                std::to_string(rows) + " embedding rows for " + std::to_string(corpus.size()) + " messages");
  }
  return out;
}

std::vector<std::vector<double>> load_external_embeddings(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse_external_embeddings(in, corpus);
}

}  // namespace sedkit
