#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sedkit/assignment.hpp"
#include "sedkit/corpus.hpp"

namespace sedkit {

class ContingencyTable {
 public:
  /// Labels are re-encoded densely; both vectors must be equal-length and non-empty.
  ContingencyTable(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted);

  std::size_t rows() const { return row_sums_.size(); }
  std::size_t cols() const { return col_sums_.size(); }
  std::uint64_t at(std::size_t r, std::size_t c) const { return counts_[r * cols() + c]; }
  std::uint64_t row_sum(std::size_t r) const { return row_sums_[r]; }
  std::uint64_t col_sum(std::size_t c) const { return col_sums_[c]; }
  std::uint64_t total() const { return total_; }

  /// Both labelings describe the same partition.
  bool identical_partitions() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> row_sums_;
  std::vector<std::uint64_t> col_sums_;
  std::uint64_t total_ = 0;
};

// Entropies and mutual information in nats.
double entropy(std::span<const std::uint64_t> sizes, std::uint64_t total);
double mutual_information(const ContingencyTable& table);
/// E[I] under the permutation (hypergeometric) model.
double expected_mutual_information(const ContingencyTable& table);

/// 2 I / (H(T) + H(P)); identical partitions give 1, a single zero entropy gives 0.
double nmi(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted);
/// (I - E[I]) / (mean(H(T), H(P)) - E[I]) with the same degenerate conventions.
double ami(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted);
/// Pair-counting form with exact 128-bit integer intermediates.
double ari(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted);

/// Fraction of messages on the diagonal of the best one-to-one cluster
/// matching (Hungarian). Extension beyond the clustering indices.
double matched_accuracy(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted);

struct MetricReport {
  double nmi = 0.0;
  double ami = 0.0;
  double ari = 0.0;
  std::optional<double> accuracy;  // only when both cluster counts <= kMaxMatchedClusters
  std::size_t predicted_clusters = 0;
  std::size_t true_clusters = 0;
  std::size_t n = 0;
};

inline constexpr std::size_t kMaxMatchedClusters = 1000;

MetricReport compute_metrics(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted);

/// Aligns the assignment with the corpus by message id. Throws
/// UnlabeledCorpus or CoverageMismatch.
MetricReport evaluate(const EventAssignment& assignment, const Corpus& corpus);

/// Flat "key=value" lines.
std::string to_key_value(const MetricReport& report);
/// Single-line JSON object.
std::string to_json_record(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);

}  // namespace sedkit
