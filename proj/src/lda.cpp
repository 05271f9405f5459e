#include "sedkit/lda.hpp"

#include <algorithm>

#include "sedkit/error.hpp"
#include "sedkit/rng.hpp"

namespace sedkit {

TopicModel::TopicModel(std::size_t topics, std::size_t vocab_size, std::size_t documents, double alpha, double beta)
    : topics_(topics),
      vocab_size_(vocab_size),
      documents_(documents),
      alpha_(alpha),
      beta_(beta),
      phi_(topics * vocab_size, 0.0),
      theta_(documents * topics, 0.0) {}

std::span<const double> TopicModel::phi_row(std::size_t topic) const {
  return {phi_.data() + topic * vocab_size_, vocab_size_};
}

std::span<const double> TopicModel::theta_row(std::size_t doc) const {
  return {theta_.data() + doc * topics_, topics_};
}

std::vector<std::uint32_t> TopicModel::dominant_topics() const {
  std::vector<std::uint32_t> out(documents_);
  for (std::size_t d = 0; d < documents_; ++d) {
    auto row = theta_row(d);
    out[d] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

TopicModel lda_fit(std::span<const std::vector<std::uint32_t>> docs, std::size_t vocab_size, const LdaOptions& options) {
  const std::size_t K = options.topics;
  const std::size_t V = vocab_size;
  if (V == 0) throw Error(ErrorCode::kEmptyVocabulary, "LDA needs a non-empty vocabulary");
  if (K == 0) throw Error(ErrorCode::kInvalidHyperparameter, "topic count must be at least 1");
  if (options.iterations == 0) throw Error(ErrorCode::kInvalidHyperparameter, "iterations must be at least 1");
  if (!(options.alpha > 0.0) || !(options.beta > 0.0)) {
    throw Error(ErrorCode::kInvalidHyperparameter, "alpha and beta must be positive");
  }
  for (const auto& doc : docs) {
    for (auto w : doc) {
      if (w >= V) throw Error(ErrorCode::kInvalidArgument, "word index out of vocabulary range");
    }
  }

  const double alpha = options.alpha;
  const double beta = options.beta;
  const double v_beta = static_cast<double>(V) * beta;
  Rng rng(options.seed);

  std::vector<std::uint32_t> n_kw(K * V, 0);  // topic-word counts
  std::vector<std::uint32_t> n_k(K, 0);
  std::vector<std::uint32_t> n_dk(docs.size() * K, 0);
  std::vector<std::vector<std::uint32_t>> z(docs.size());

  for (std::size_t d = 0; d < docs.size(); ++d) {
    z[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const auto k = static_cast<std::uint32_t>(rng.below(K));
      z[d][i] = k;
      ++n_kw[k * V + docs[d][i]];
      ++n_k[k];
      ++n_dk[d * K + k];
    }
  }

  std::vector<double> cumulative(K);
  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::uint32_t* doc_counts = n_dk.data() + d * K;
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const std::uint32_t w = docs[d][i];
        std::uint32_t k = z[d][i];
        --n_kw[k * V + w];
        --n_k[k];
        --doc_counts[k];

        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (doc_counts[t] + alpha) * (n_kw[t * V + w] + beta) / (n_k[t] + v_beta);
          cumulative[t] = total;
        }
        const double u = rng.uniform() * total;
        k = static_cast<std::uint32_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        if (k >= K) k = static_cast<std::uint32_t>(K - 1);

        z[d][i] = k;
        ++n_kw[k * V + w];
        ++n_k[k];
        ++doc_counts[k];
      }
    }
  }

  TopicModel model(K, V, docs.size(), alpha, beta);
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = n_k[k] + v_beta;
    for (std::size_t w = 0; w < V; ++w) model.phi_[k * V + w] = (n_kw[k * V + w] + beta) / denom;
  }
  const double k_alpha = static_cast<double>(K) * alpha;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double denom = static_cast<double>(docs[d].size()) + k_alpha;
    for (std::size_t k = 0; k < K; ++k) model.theta_[d * K + k] = (n_dk[d * K + k] + alpha) / denom;
  }
  return model;
}

}  // namespace sedkit
