#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sedkit {

struct LdaOptions {
  std::size_t topics = 10;
  double alpha = 0.1;
  double beta = 0.01;
  std::size_t iterations = 200;
  std::uint64_t seed = 0;
};

/// Point estimates from the final Gibbs state, Dirichlet-smoothed.
class TopicModel {
 public:
  TopicModel(std::size_t topics, std::size_t vocab_size, std::size_t documents, double alpha, double beta);

  std::size_t topics() const { return topics_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t documents() const { return documents_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double phi(std::size_t topic, std::size_t word) const { return phi_[topic * vocab_size_ + word]; }
  double theta(std::size_t doc, std::size_t topic) const { return theta_[doc * topics_ + topic]; }
  std::span<const double> phi_row(std::size_t topic) const;
  std::span<const double> theta_row(std::size_t doc) const;

  /// argmax_k theta[d][k], ties to the lowest topic.
  std::vector<std::uint32_t> dominant_topics() const;

 private:
  friend TopicModel lda_fit(std::span<const std::vector<std::uint32_t>>, std::size_t, const LdaOptions&);

  std::size_t topics_;
  std::size_t vocab_size_;
  std::size_t documents_;
  double alpha_;
  double beta_;
  std::vector<double> phi_;    // topics x vocab
  std::vector<double> theta_;  // documents x topics
};

/// Collapsed Gibbs sampling, single chain, tokens swept in document order.
/// `docs` hold word indices in [0, vocab_size).
TopicModel lda_fit(std::span<const std::vector<std::uint32_t>> docs, std::size_t vocab_size, const LdaOptions& options);

}  // namespace sedkit
