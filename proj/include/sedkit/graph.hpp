#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sedkit {

/// Immutable weighted undirected graph with named nodes. No self-loops,
/// strictly positive symmetric weights, cached weighted degrees.
class MessageGraph {
 public:
  struct Neighbor {
    std::uint32_t node;
    double weight;
  };
  struct Edge {
    std::uint32_t u;  // u < v
    std::uint32_t v;
    double weight;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  MessageGraph() = default;

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::uint32_t u) const { return names_[u]; }

  std::span<const Neighbor> neighbors(std::uint32_t u) const;
  double degree(std::uint32_t u) const { return degree_[u]; }
  /// Sum of weighted degrees (twice the total edge weight).
  double volume() const { return volume_; }
  double weight(std::uint32_t u, std::uint32_t v) const;

  /// Edges with u < v, ordered by (u, v).
  std::vector<Edge> edges() const;

  /// Recomputes degrees and symmetry from the adjacency lists.
  bool check_invariants() const;

  /// Scaled copy (all weights multiplied by factor > 0).
  MessageGraph scaled(double factor) const;

 private:
  friend class GraphBuilder;

  std::vector<std::string> names_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<double> degree_;
  double volume_ = 0.0;
  std::size_t edge_count_ = 0;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(std::vector<std::string> names);

  /// Accumulates weight onto the undirected edge {u, v}.
  void add(std::uint32_t u, std::uint32_t v, double weight);
  /// Drops accumulated edges whose weight is below the threshold.
  void prune_below(double threshold);

  MessageGraph build() &&;

 private:
  std::vector<std::string> names_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> weights_;
};

/// "node_a<TAB>node_b<TAB>weight" per edge.
void write_edge_list(std::ostream& out, const MessageGraph& graph);

std::string format_double(double value);

}  // namespace sedkit
