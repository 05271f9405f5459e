#include "sedkit/community.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "sedkit/error.hpp"

namespace sedkit {

namespace {

constexpr double kTieTolerance = 1e-12;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void require_edges(const MessageGraph& graph) {
  if (graph.edge_count() == 0) throw Error(ErrorCode::kEmptyGraph, "graph has no edges");
}

// Communities keyed by their smallest node index; merging keeps the smaller key.
struct Community {
  double volume = 0.0;
  double degree_entropy = 0.0;  // sum of d log2 d over members
  double cut = 0.0;
  std::size_t size = 0;
  std::map<std::uint32_t, double> links;  // neighbouring community -> weight
  std::vector<std::uint32_t> members;
  bool alive = false;
};

class Agglomerator {
 public:
  explicit Agglomerator(const MessageGraph& graph) : graph_(graph), communities_(graph.node_count()) {
    for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
      auto& c = communities_[u];
      c.volume = graph.degree(u);
      c.degree_entropy = xlog2x(graph.degree(u));
      c.cut = graph.degree(u);
      c.size = 1;
      c.members = {u};
      c.alive = true;
      for (const auto& n : graph.neighbors(u)) c.links[n.node] = n.weight;
    }
  }

  const Community& at(std::uint32_t id) const { return communities_[id]; }
  std::size_t node_count() const { return communities_.size(); }

  template <typename Visit>
  void for_each_pair(Visit&& visit) const {
    for (std::uint32_t a = 0; a < communities_.size(); ++a) {
      if (!communities_[a].alive) continue;
      for (auto it = communities_[a].links.upper_bound(a); it != communities_[a].links.end(); ++it) {
        visit(a, it->first, it->second);
      }
    }
  }

  void merge(std::uint32_t a, std::uint32_t b) {
    if (b < a) std::swap(a, b);
    Community& ca = communities_[a];
    Community& cb = communities_[b];
    const double between = ca.links.at(b);
    ca.volume += cb.volume;
    ca.degree_entropy += cb.degree_entropy;
    ca.cut += cb.cut - 2.0 * between;
    ca.size += cb.size;
    ca.links.erase(b);
    for (const auto& [x, w] : cb.links) {
      if (x == a) continue;
      ca.links[x] += w;
      auto& xl = communities_[x].links;
      xl.erase(b);
      xl[a] += w;
    }
    ca.members.insert(ca.members.end(), cb.members.begin(), cb.members.end());
    cb = Community{};
  }

  Partition partition() const {
    std::vector<std::int64_t> raw(communities_.size(), 0);
    for (std::uint32_t id = 0; id < communities_.size(); ++id) {
      for (auto u : communities_[id].members) raw[u] = id;
    }
    return Partition::from_labels(raw);
  }

 private:
  const MessageGraph& graph_;
  std::vector<Community> communities_;
};

// One community's share of the 2-D entropy, written with the additive
// degree-entropy sum so merges are O(1) to score.
double community_term(double volume, double degree_entropy, double cut, double two_m) {
  if (volume <= 0.0) return 0.0;
  return (xlog2x(volume) - degree_entropy - cut * std::log2(volume / two_m)) / two_m;
}


// Flat label state with per-community sums, for node moves.
class Refiner {
 public:
  Refiner(const MessageGraph& graph, const Partition& start)
      : graph_(graph), two_m_(graph.volume()), label_(start.community) {
    // Room for every node to be split off into its own fresh community.
    const std::size_t slots = start.count + graph.node_count();
    volume_.assign(slots, 0.0);
    degree_entropy_.assign(slots, 0.0);
    cut_.assign(slots, 0.0);
    size_.assign(slots, 0);
    for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
      const auto c = label_[u];
      volume_[c] += graph.degree(u);
      degree_entropy_[c] += xlog2x(graph.degree(u));
      ++size_[c];
      for (const auto& n : graph.neighbors(u)) {
        if (label_[n.node] != c) cut_[c] += n.weight;
      }
    }
    for (std::uint32_t c = 0; c < slots; ++c) {
      if (size_[c] == 0) free_.insert(c);
    }
  }

  // Dissolving a community sends each member to the neighbouring community
  // (other than the dissolved one) that lowers the entropy most, best move
  // first; members without an improving move stay alone. Each round applies
  // the dissolve with the largest strict decrease.
  void run() {
    while (true) {
      double best = -kTieTolerance;
      std::optional<std::uint32_t> chosen;
      for (std::uint32_t c = 0; c < size_.size(); ++c) {
        if (size_[c] < 2 && !has_links(c)) continue;
        if (size_[c] == 0) continue;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> undo;
        const double delta = dissolve(c, undo);
        for (auto it = undo.rbegin(); it != undo.rend(); ++it) move(it->first, it->second);
        if (delta < best - kTieTolerance) {
          best = delta;
          chosen = c;
        }
      }
      if (!chosen) return;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> undo;
      dissolve(*chosen, undo);
    }
  }

  Partition partition() const {
    return Partition::from_labels(std::vector<std::int64_t>(label_.begin(), label_.end()));
  }

 private:
  bool has_links(std::uint32_t c) const {
    for (std::uint32_t u = 0; u < label_.size(); ++u) {
      if (label_[u] == c && graph_.degree(u) > 0.0) return true;
    }
    return false;
  }

  double dissolve(std::uint32_t c, std::vector<std::pair<std::uint32_t, std::uint32_t>>& undo) {
    std::vector<std::uint32_t> pending;
    for (std::uint32_t u = 0; u < label_.size(); ++u) {
      if (label_[u] == c) pending.push_back(u);
    }
    double total = 0.0;
    std::set<std::uint32_t> split_off;  // former members may not regroup
    for (auto v : pending) {
      undo.emplace_back(v, c);
      total += move(v, *free_.begin());
      split_off.insert(label_[v]);
    }
    while (!pending.empty()) {
      double best = -kTieTolerance;
      std::size_t pick = 0;
      std::optional<std::uint32_t> target;
      for (std::size_t i = 0; i < pending.size(); ++i) {
        const auto v = pending[i];
        for (const auto& [x, w] : links_of(v)) {
          if (x == c || split_off.count(x)) continue;
          const double d = join_delta(v, x, w);
          if (d < best - kTieTolerance) {
            best = d;
            pick = i;
            target = x;
          }
        }
      }
      if (!target) break;
      const auto v = pending[pick];
      undo.emplace_back(v, label_[v]);
      total += move(v, *target);
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return total;
  }

  double term(std::uint32_t c) const { return community_term(volume_[c], degree_entropy_[c], cut_[c], two_m_); }

  std::map<std::uint32_t, double> links_of(std::uint32_t v) const {
    std::map<std::uint32_t, double> links;
    for (const auto& n : graph_.neighbors(v)) links[label_[n.node]] += n.weight;
    return links;
  }

  // Entropy change of adding the lone node v to community x (w: weight between them).
  double join_delta(std::uint32_t v, std::uint32_t x, double w) const {
    const double d = graph_.degree(v);
    const double merged = community_term(volume_[x] + d, degree_entropy_[x] + xlog2x(d), cut_[x] + d - 2.0 * w, two_m_);
    return merged - term(x) - term(label_[v]);
  }

  // Moves v and returns the entropy change.
  double move(std::uint32_t v, std::uint32_t to) {
    const auto from = label_[v];
    if (from == to) return 0.0;
    const double d = graph_.degree(v);
    double w_from = 0.0, w_to = 0.0;
    for (const auto& n : graph_.neighbors(v)) {
      if (label_[n.node] == from) w_from += n.weight;
      if (label_[n.node] == to) w_to += n.weight;
    }
    const double before = term(from) + term(to);
    volume_[from] -= d;
    degree_entropy_[from] -= xlog2x(d);
    cut_[from] += 2.0 * w_from - d;
    --size_[from];
    volume_[to] += d;
    degree_entropy_[to] += xlog2x(d);
    cut_[to] += d - 2.0 * w_to;
    if (size_[to]++ == 0) free_.erase(to);
    label_[v] = to;
    if (size_[from] == 0) {
      volume_[from] = degree_entropy_[from] = cut_[from] = 0.0;
      free_.insert(from);
    }
    return term(from) + term(to) - before;
  }

  const MessageGraph& graph_;
  double two_m_;
  std::vector<std::uint32_t> label_;
  std::vector<double> volume_, degree_entropy_, cut_;
  std::vector<std::size_t> size_;
  std::set<std::uint32_t> free_;  // empty community slots
};

}  // namespace

Partition Partition::singletons(std::size_t nodes) {
  Partition p;
  p.community.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) p.community[i] = static_cast<std::uint32_t>(i);
  p.count = nodes;
  return p;
}

Partition Partition::whole(std::size_t nodes) {
  Partition p;
  p.community.assign(nodes, 0);
  p.count = nodes > 0 ? 1 : 0;
  return p;
}

Partition Partition::from_labels(std::span<const std::int64_t> labels) {
  Partition p;
  p.community = densify(labels);
  for (auto c : p.community) p.count = std::max<std::size_t>(p.count, c + 1);
  return p;
}

void write_partition(std::ostream& out, const MessageGraph& graph, const Partition& partition) {
  for (std::uint32_t u = 0; u < graph.node_count(); ++u) out << graph.name(u) << '\t' << partition.community[u] << '\n';
}

double structural_entropy_1d(const MessageGraph& graph) {
  require_edges(graph);
  const double two_m = graph.volume();
  double h = 0.0;
  for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
    const double p = graph.degree(u) / two_m;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double structural_entropy_2d(const MessageGraph& graph, const Partition& partition) {
  require_edges(graph);
  if (partition.community.size() != graph.node_count()) {
    throw Error(ErrorCode::kPartitionMismatch, std::to_string(partition.community.size()) + " assignments for " +
                                                   std::to_string(graph.node_count()) + " nodes");
  }
  for (auto c : partition.community) {
    if (c >= partition.count) throw Error(ErrorCode::kPartitionMismatch, "community id out of range");
  }
  const double two_m = graph.volume();
  std::vector<double> volume(partition.count, 0.0);
  std::vector<double> cut(partition.count, 0.0);
  for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
    const auto cu = partition.community[u];
    volume[cu] += graph.degree(u);
    for (const auto& n : graph.neighbors(u)) {
      if (partition.community[n.node] != cu) cut[cu] += n.weight;
    }
  }
  double h = 0.0;
  for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
    const double d = graph.degree(u);
    if (d > 0.0) h -= (d / two_m) * std::log2(d / volume[partition.community[u]]);
  }
  for (std::size_t c = 0; c < partition.count; ++c) {
    if (volume[c] > 0.0) h -= (cut[c] / two_m) * std::log2(volume[c] / two_m);
  }
  return h;
}

Partition minimize_se(const MessageGraph& graph, std::uint64_t /*seed*/) {
  require_edges(graph);
  const double two_m = graph.volume();
  Agglomerator agg(graph);

  while (true) {
    bool found = false;
    double best_delta = 0.0;
    std::size_t best_size = 0;
    std::uint32_t best_a = 0, best_b = 0;
    agg.for_each_pair([&](std::uint32_t a, std::uint32_t b, double between) {
      const auto& ca = agg.at(a);
      const auto& cb = agg.at(b);
      const double merged = community_term(ca.volume + cb.volume, ca.degree_entropy + cb.degree_entropy,
                                           ca.cut + cb.cut - 2.0 * between, two_m);
      const double delta = merged - community_term(ca.volume, ca.degree_entropy, ca.cut, two_m) -
                           community_term(cb.volume, cb.degree_entropy, cb.cut, two_m);
      if (delta >= -kTieTolerance) return;
      const std::size_t size = ca.size + cb.size;
      // Pairs arrive in ascending (a, b) order, so equal keys keep the first.
      if (!found || delta < best_delta - kTieTolerance ||
          (std::abs(delta - best_delta) <= kTieTolerance && size < best_size)) {
        found = true;
        best_delta = delta;
        best_size = size;
        best_a = a;
        best_b = b;
      }
    });
    if (!found) break;
    agg.merge(best_a, best_b);
  }
  Refiner refiner(graph, agg.partition());
  refiner.run();
  return refiner.partition();
}

std::vector<std::optional<std::uint32_t>> greedy_modularity(const MessageGraph& graph) {
  require_edges(graph);
  const double m = graph.volume() / 2.0;
  Agglomerator agg(graph);
  while (true) {
    bool found = false;
    double best_gain = 0.0;
    std::uint32_t best_a = 0, best_b = 0;
    agg.for_each_pair([&](std::uint32_t a, std::uint32_t b, double between) {
      const double gain = between / m - agg.at(a).volume * agg.at(b).volume / (2.0 * m * m);
      if (gain <= kTieTolerance) return;
      if (!found || gain > best_gain + kTieTolerance) {
        found = true;
        best_gain = gain;
        best_a = a;
        best_b = b;
      }
    });
    if (!found) break;
    agg.merge(best_a, best_b);
  }

  std::vector<std::optional<std::uint32_t>> out(graph.node_count());
  std::uint32_t next = 0;
  for (std::uint32_t id = 0; id < agg.node_count(); ++id) {
    const auto& c = agg.at(id);
    if (!c.alive || c.volume <= 0.0) continue;
    for (auto u : c.members) out[u] = next;
    ++next;
  }
  return out;
}

KeywordCommunities keyword_communities(const MessageGraph& keyword_graph, std::span<const TokenList> docs) {
  const auto community = greedy_modularity(keyword_graph);
  std::unordered_map<std::string_view, std::uint32_t> node_of;
  std::uint32_t count = 0;
  for (std::uint32_t u = 0; u < keyword_graph.node_count(); ++u) {
    node_of.emplace(keyword_graph.name(u), u);
    if (community[u]) count = std::max(count, *community[u] + 1);
  }

  KeywordCommunities out;
  out.keyword_communities = count;
  const auto residual = static_cast<std::int64_t>(count);
  std::vector<std::int64_t> raw(docs.size(), residual);
  std::vector<std::uint32_t> overlap(count, 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::fill(overlap.begin(), overlap.end(), 0);
    std::unordered_set<std::string_view> seen;
    for (const auto& t : docs[d]) {
      if (!seen.insert(t).second) continue;
      auto it = node_of.find(t);
      if (it != node_of.end() && community[it->second]) ++overlap[*community[it->second]];
    }
    std::uint32_t best = 0;
    std::uint32_t best_overlap = 0;
    for (std::uint32_t c = 0; c < count; ++c) {
      if (overlap[c] > best_overlap) {
        best_overlap = overlap[c];
        best = c;
      }
    }
    if (best_overlap > 0) {
      raw[d] = best;
    } else {
      ++out.residual_size;
    }
  }
  out.labels = densify(std::span<const std::int64_t>(raw));
  if (out.residual_size > 0) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (raw[d] == residual) {
        out.residual_event = out.labels[d];
        break;
      }
    }
  }
  return out;
}

EventAssignment se_detect(const Corpus& corpus, const RelationSet& relations, std::optional<SemanticKnn> semantic_knn,
                          std::uint64_t seed) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "se_detect needs at least one message");
  std::optional<SemanticKnn> knn = corpus.size() > 1 ? semantic_knn : std::nullopt;
  const auto graph = construct_graph(corpus, relations, knn);
  if (graph.edge_count() == 0) {
    const auto p = Partition::singletons(graph.node_count());
    return make_assignment(corpus, std::span<const std::uint32_t>(p.community));
  }
  const auto p = minimize_se(graph, seed);
  return make_assignment(corpus, std::span<const std::uint32_t>(p.community));
}

}  // namespace sedkit
