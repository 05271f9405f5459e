#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sedkit/embeddings.hpp"
#include "sedkit/preprocess.hpp"

namespace sedkit {

/// Exact balanced transportation problem over integer masses.
/// `cost` is row-major supply.size() x demand.size(); totals must agree.
/// Returns the minimal sum of flow * cost.
double solve_transport(std::span<const std::uint64_t> supply, std::span<const std::uint64_t> demand,
                       std::span<const double> cost);

/// Normalized bag-of-words over in-table tokens. Weights are kept as
/// integer counts so transport can run in exact integer flow.
struct WordDistribution {
  std::vector<std::uint32_t> rows;     // embedding-table rows, ascending
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  double weight(std::size_t i) const { return static_cast<double>(counts[i]) / static_cast<double>(total); }
};

/// Throws NoSupportedTokens when no token is in the table.
WordDistribution make_distribution(const TokenList& tokens, const EmbeddingTable& table);
std::optional<WordDistribution> try_make_distribution(const TokenList& tokens, const EmbeddingTable& table);

double wmd_distance(const WordDistribution& a, const WordDistribution& b, const EmbeddingTable& table);
double wmd_distance(const TokenList& a, const TokenList& b, const EmbeddingTable& table);

/// max of the two one-sided relaxations; never exceeds wmd_distance.
double rwmd_distance(const WordDistribution& a, const WordDistribution& b, const EmbeddingTable& table);
double rwmd_distance(const TokenList& a, const TokenList& b, const EmbeddingTable& table);

struct WmdClustering {
  std::vector<std::uint32_t> labels;  // dense, first appearance
  std::size_t clusters = 0;
  std::optional<std::uint32_t> residual_cluster;  // messages with no in-table token
  std::size_t residual_size = 0;
  std::size_t exact_evaluations = 0;
  std::size_t pruned_candidates = 0;
};

/// Single pass in input order: join the cluster whose medoid is nearest by
/// WMD if within `threshold`, otherwise open a new cluster. Medoids minimize
/// total intra-cluster WMD and are refreshed on every insertion.
WmdClustering wmd_cluster(std::span<const TokenList> docs, const EmbeddingTable& table, double threshold);

}  // namespace sedkit
