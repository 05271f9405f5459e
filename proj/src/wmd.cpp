#include "sedkit/wmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "sedkit/assignment.hpp"
#include "sedkit/error.hpp"

namespace sedkit {

namespace {

// Successive shortest paths with Johnson potentials on the bipartite network
// source -> supply i -> demand j -> sink. Capacities are integral, so every
// augmentation moves an exact integer amount.
class TransportSolver {
 public:
  TransportSolver(std::span<const std::uint64_t> supply, std::span<const std::uint64_t> demand,
                  std::span<const double> cost)
      : n_(supply.size()), m_(demand.size()), cost_(cost), supply_left_(supply.begin(), supply.end()),
        demand_left_(demand.begin(), demand.end()), flow_(n_ * m_, 0) {}

  double solve() {
    // Node layout: supplies [0, n), demands [n, n + m), source, sink.
    const std::size_t source = n_ + m_;
    const std::size_t sink = source + 1;
    const std::size_t nodes = sink + 1;
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> potential(nodes, 0.0);
    std::vector<double> dist(nodes);
    std::vector<std::size_t> parent(nodes);
    std::vector<bool> done(nodes);

    auto relax = [&](std::size_t u, std::size_t v, double arc_cost) {
      const double reduced = std::max(0.0, arc_cost + potential[u] - potential[v]);
      if (!done[v] && dist[u] + reduced < dist[v]) {
        dist[v] = dist[u] + reduced;
        parent[v] = u;
      }
    };

    while (true) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(parent.begin(), parent.end(), kNone);
      std::fill(done.begin(), done.end(), false);
      dist[source] = 0.0;

      while (true) {
        std::size_t u = kNone;
        for (std::size_t v = 0; v < nodes; ++v) {
          if (!done[v] && dist[v] < kInf && (u == kNone || dist[v] < dist[u])) u = v;
        }
        if (u == kNone || u == sink) break;
        done[u] = true;
        if (u == source) {
          for (std::size_t i = 0; i < n_; ++i) {
            if (supply_left_[i] > 0) relax(u, i, 0.0);
          }
        } else if (u < n_) {
          for (std::size_t j = 0; j < m_; ++j) relax(u, n_ + j, c(u, j));
        } else {
          const std::size_t j = u - n_;
          for (std::size_t i = 0; i < n_; ++i) {
            if (flow_[i * m_ + j] > 0) relax(u, i, -c(i, j));
          }
          if (demand_left_[j] > 0) relax(u, sink, 0.0);
        }
      }
      if (dist[sink] == kInf) break;

      for (std::size_t v = 0; v < nodes; ++v) {
        potential[v] += std::min(dist[v], dist[sink]);
      }

      std::uint64_t amount = std::numeric_limits<std::uint64_t>::max();
      for (std::size_t v = sink; v != source; v = parent[v]) {
        const std::size_t u = parent[v];
        if (v == sink) {
          amount = std::min(amount, demand_left_[u - n_]);
        } else if (u == source) {
          amount = std::min(amount, supply_left_[v]);
        } else if (u >= n_) {
          amount = std::min(amount, flow_[v * m_ + (u - n_)]);
        }
      }
      for (std::size_t v = sink; v != source; v = parent[v]) {
        const std::size_t u = parent[v];
        if (v == sink) {
          demand_left_[u - n_] -= amount;
        } else if (u == source) {
          supply_left_[v] -= amount;
        } else if (u < n_) {
          flow_[u * m_ + (v - n_)] += amount;
        } else {
          flow_[v * m_ + (u - n_)] -= amount;
        }
      }
    }
    for (auto left : supply_left_) {
      if (left != 0) throw Error(ErrorCode::kInvalidArgument, "transport problem is infeasible");
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) total += static_cast<double>(flow_[i * m_ + j]) * c(i, j);
    }
    return total;
  }

 private:
  double c(std::size_t i, std::size_t j) const { return cost_[i * m_ + j]; }

  std::size_t n_;
  std::size_t m_;
  std::span<const double> cost_;
  std::vector<std::uint64_t> supply_left_;
  std::vector<std::uint64_t> demand_left_;
  std::vector<std::uint64_t> flow_;
};

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> ground_costs(const WordDistribution& a, const WordDistribution& b, const EmbeddingTable& table) {
  std::vector<double> cost(a.rows.size() * b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (std::size_t j = 0; j < b.rows.size(); ++j) {
      cost[i * b.rows.size() + j] = euclidean(table.vector(a.rows[i]), table.vector(b.rows[j]));
    }
  }
  return cost;
}

}  // namespace

double solve_transport(std::span<const std::uint64_t> supply, std::span<const std::uint64_t> demand,
                       std::span<const double> cost) {
  if (cost.size() != supply.size() * demand.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix does not match supply x demand");
  }
  const auto s = std::accumulate(supply.begin(), supply.end(), std::uint64_t{0});
  const auto d = std::accumulate(demand.begin(), demand.end(), std::uint64_t{0});
  if (s != d) throw Error(ErrorCode::kInvalidArgument, "unbalanced transport problem");
  for (double c : cost) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::kInvalidArgument, "ground costs must be finite and >= 0");
  }
  if (s == 0) return 0.0;
  return TransportSolver(supply, demand, cost).solve();
}

std::optional<WordDistribution> try_make_distribution(const TokenList& tokens, const EmbeddingTable& table) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (const auto& t : tokens) {
    if (auto row = table.index(t)) ++counts[*row];
  }
  if (counts.empty()) return std::nullopt;
  WordDistribution d;
  for (const auto& [row, count] : counts) {
    d.rows.push_back(row);
    d.counts.push_back(count);
    d.total += count;
  }
  return d;
}

WordDistribution make_distribution(const TokenList& tokens, const EmbeddingTable& table) {
  auto d = try_make_distribution(tokens, table);
  if (!d) throw Error(ErrorCode::kNoSupportedTokens, "document has no token in the embedding table");
  return std::move(*d);
}

double wmd_distance(const WordDistribution& a, const WordDistribution& b, const EmbeddingTable& table) {
  // Scale both histograms to the common total a.total * b.total.
  std::vector<std::uint64_t> supply(a.counts.size());
  std::vector<std::uint64_t> demand(b.counts.size());
  for (std::size_t i = 0; i < supply.size(); ++i) supply[i] = a.counts[i] * b.total;
  for (std::size_t j = 0; j < demand.size(); ++j) demand[j] = b.counts[j] * a.total;
  const auto cost = ground_costs(a, b, table);
  const double scale = static_cast<double>(a.total) * static_cast<double>(b.total);
  return solve_transport(supply, demand, cost) / scale;
}

double wmd_distance(const TokenList& a, const TokenList& b, const EmbeddingTable& table) {
  return wmd_distance(make_distribution(a, table), make_distribution(b, table), table);
}

double rwmd_distance(const WordDistribution& a, const WordDistribution& b, const EmbeddingTable& table) {
  const auto cost = ground_costs(a, b, table);
  const std::size_t m = b.rows.size();
  double left = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) best = std::min(best, cost[i * m + j]);
    left += a.weight(i) * best;
  }
  double right = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.rows.size(); ++i) best = std::min(best, cost[i * m + j]);
    right += b.weight(j) * best;
  }
  return std::max(left, right);
}

double rwmd_distance(const TokenList& a, const TokenList& b, const EmbeddingTable& table) {
  return rwmd_distance(make_distribution(a, table), make_distribution(b, table), table);
}

WmdClustering wmd_cluster(std::span<const TokenList> docs, const EmbeddingTable& table, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::kInvalidHyperparameter, "WMD threshold must be positive");

  struct Cluster {
    std::vector<std::size_t> members;
    std::vector<double> total_distance;  // per member, to all other members
    std::size_t medoid = 0;              // position in members
  };

  std::vector<std::optional<WordDistribution>> dists;
  dists.reserve(docs.size());
  for (const auto& d : docs) dists.push_back(try_make_distribution(d, table));

  WmdClustering out;
  std::vector<Cluster> clusters;
  std::vector<std::int64_t> raw(docs.size(), -1);
  std::vector<std::size_t> residual;
  std::vector<std::pair<double, std::size_t>> candidates;

  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!dists[i]) {
      residual.push_back(i);
      continue;
    }
    const auto& doc = *dists[i];

    candidates.clear();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const auto& medoid = *dists[clusters[c].members[clusters[c].medoid]];
      const double lower = rwmd_distance(doc, medoid, table);
      if (lower <= threshold) {
        candidates.emplace_back(lower, c);
      } else {
        ++out.pruned_candidates;
      }
    }
    std::sort(candidates.begin(), candidates.end());

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_cluster = clusters.size();
    for (const auto& [lower, c] : candidates) {
      if (lower > best) {
        ++out.pruned_candidates;
        continue;
      }
      const double d = wmd_distance(doc, *dists[clusters[c].members[clusters[c].medoid]], table);
      ++out.exact_evaluations;
      if (d <= threshold && (d < best || (d == best && c < best_cluster))) {
        best = d;
        best_cluster = c;
      }
    }

    if (best_cluster == clusters.size()) {
      clusters.push_back({{i}, {0.0}, 0});
      raw[i] = static_cast<std::int64_t>(best_cluster);
      continue;
    }

    Cluster& cl = clusters[best_cluster];
    double own_total = 0.0;
    for (std::size_t p = 0; p < cl.members.size(); ++p) {
      const double d = wmd_distance(doc, *dists[cl.members[p]], table);
      ++out.exact_evaluations;
      cl.total_distance[p] += d;
      own_total += d;
    }
    cl.members.push_back(i);
    cl.total_distance.push_back(own_total);
    cl.medoid = static_cast<std::size_t>(
        std::min_element(cl.total_distance.begin(), cl.total_distance.end()) - cl.total_distance.begin());
    raw[i] = static_cast<std::int64_t>(best_cluster);
  }

  if (!residual.empty()) {
    const auto residual_raw = static_cast<std::int64_t>(clusters.size());
    for (auto i : residual) raw[i] = residual_raw;
  }
  out.labels = densify(std::span<const std::int64_t>(raw));
  for (auto l : out.labels) out.clusters = std::max<std::size_t>(out.clusters, l + 1);
  if (!residual.empty()) {
    out.residual_cluster = out.labels[residual.front()];
    out.residual_size = residual.size();
  }
  return out;
}

}  // namespace sedkit
