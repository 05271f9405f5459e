#include "sedkit/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "sedkit/error.hpp"

namespace sedkit {

std::span<const MessageGraph::Neighbor> MessageGraph::neighbors(std::uint32_t u) const {
  return {adjacency_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
}

double MessageGraph::weight(std::uint32_t u, std::uint32_t v) const {
  auto adj = neighbors(u);
  auto it = std::lower_bound(adj.begin(), adj.end(), v,
                             [](const Neighbor& n, std::uint32_t target) { return n.node < target; });
  return (it != adj.end() && it->node == v) ? it->weight : 0.0;
}

std::vector<MessageGraph::Edge> MessageGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::uint32_t u = 0; u < node_count(); ++u) {
    for (const auto& n : neighbors(u)) {
      if (n.node > u) out.push_back({u, n.node, n.weight});
    }
  }
  return out;
}

bool MessageGraph::check_invariants() const {
  double volume = 0.0;
  for (std::uint32_t u = 0; u < node_count(); ++u) {
    double d = 0.0;
    for (const auto& n : neighbors(u)) {
      if (n.node == u || !(n.weight > 0.0)) return false;
      if (weight(n.node, u) != n.weight) return false;
      d += n.weight;
    }
    if (std::abs(d - degree_[u]) > 1e-9 * std::max(1.0, d)) return false;
    volume += d;
  }
  return std::abs(volume - volume_) <= 1e-9 * std::max(1.0, volume);
}

MessageGraph MessageGraph::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale factor must be positive");
  GraphBuilder b(names_);
  for (const auto& e : edges()) b.add(e.u, e.v, e.weight * factor);
  return std::move(b).build();
}

GraphBuilder::GraphBuilder(std::vector<std::string> names) : names_(std::move(names)) {}

void GraphBuilder::add(std::uint32_t u, std::uint32_t v, double weight) {
  if (u >= names_.size() || v >= names_.size()) throw Error(ErrorCode::kInvalidArgument, "edge endpoint out of range");
  if (u == v) throw Error(ErrorCode::kInvalidArgument, "self-loop on '" + names_[u] + "'");
  if (!(weight > 0.0)) throw Error(ErrorCode::kInvalidArgument, "edge weight must be positive");
  weights_[std::minmax(u, v)] += weight;
}

void GraphBuilder::prune_below(double threshold) {
  std::erase_if(weights_, [threshold](const auto& kv) { return kv.second < threshold; });
}

MessageGraph GraphBuilder::build() && {
  MessageGraph g;
  const std::size_t n = names_.size();
  g.names_ = std::move(names_);
  std::vector<std::size_t> count(n + 1, 0);
  for (const auto& [key, w] : weights_) {
    ++count[key.first + 1];
    ++count[key.second + 1];
  }
  for (std::size_t i = 1; i <= n; ++i) count[i] += count[i - 1];
  g.offsets_ = count;
  g.adjacency_.resize(count[n]);
  g.degree_.assign(n, 0.0);
  std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
  // weights_ iterates in (u, v) order, so every adjacency list comes out sorted.
  for (const auto& [key, w] : weights_) {
    g.adjacency_[cursor[key.first]++] = {key.second, w};
  }
  for (const auto& [key, w] : weights_) {
    g.adjacency_[cursor[key.second]++] = {key.first, w};
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    auto begin = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]);
    auto end = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]);
    std::sort(begin, end, [](const auto& a, const auto& b) { return a.node < b.node; });
    double d = 0.0;
    for (auto it = begin; it != end; ++it) d += it->weight;
    g.degree_[u] = d;
    g.volume_ += d;
  }
  g.edge_count_ = weights_.size();
  weights_.clear();
  return g;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_edge_list(std::ostream& out, const MessageGraph& graph) {
  for (const auto& e : graph.edges()) {
    out << graph.name(e.u) << '\t' << graph.name(e.v) << '\t' << format_double(e.weight) << '\n';
  }
}

}  // namespace sedkit
