#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sedkit/assignment.hpp"
#include "sedkit/corpus.hpp"
#include "sedkit/graph.hpp"
#include "sedkit/preprocess.hpp"

namespace sedkit {

/// Node -> community, dense ids in order of first appearance by node index.
struct Partition {
  std::vector<std::uint32_t> community;
  std::size_t count = 0;

  static Partition singletons(std::size_t nodes);
  static Partition whole(std::size_t nodes);
  static Partition from_labels(std::span<const std::int64_t> labels);

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// "node<TAB>community" per node.
void write_partition(std::ostream& out, const MessageGraph& graph, const Partition& partition);

/// -sum_v (d_v / 2m) log2(d_v / 2m). Throws EmptyGraph.
double structural_entropy_1d(const MessageGraph& graph);

/// Two-level encoding tree entropy of a flat partition:
/// sum_C [ -sum_{v in C} (d_v/2m) log2(d_v/V_C) - (g_C/2m) log2(V_C/2m) ].
double structural_entropy_2d(const MessageGraph& graph, const Partition& partition);

/// Greedy agglomeration from singletons: always merge the edge-connected
/// community pair with the largest strict decrease of the 2-D entropy; ties
/// go to the smaller merged community, then to the smallest community ids
/// (a community's id is its smallest node index). A refinement pass then
/// repeatedly dissolves the community whose members, re-homed one best move
/// at a time into neighbouring communities, lower the entropy most. `seed`
/// is unused by the deterministic path.
Partition minimize_se(const MessageGraph& graph, std::uint64_t seed = 0);

/// Greedy modularity agglomeration over non-isolated nodes. Isolated nodes
/// get std::nullopt.
std::vector<std::optional<std::uint32_t>> greedy_modularity(const MessageGraph& graph);

struct KeywordCommunities {
  std::vector<std::uint32_t> labels;  // per document, dense
  std::size_t keyword_communities = 0;
  std::optional<std::uint32_t> residual_event;
  std::size_t residual_size = 0;
};

/// Documents join the keyword community sharing the most distinct tokens
/// with them (ties: lower community id); documents without overlap form a
/// residual event.
KeywordCommunities keyword_communities(const MessageGraph& keyword_graph, std::span<const TokenList> docs);

/// Message graph construction followed by structural-entropy minimization.
EventAssignment se_detect(const Corpus& corpus, const RelationSet& relations,
                          std::optional<SemanticKnn> semantic_knn = std::nullopt, std::uint64_t seed = 0);

}  // namespace sedkit
