// Brute-force reference implementations. They are deliberately written from
// the textbook definitions and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

using Labels = std::vector<std::uint32_t>;

inline double entropy(const Labels& x) {
  std::map<std::uint32_t, double> count;
  for (auto v : x) count[v] += 1.0;
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (const auto& [v, c] : count) h -= (c / n) * std::log(c / n);
  return h;
}

inline double mutual_information(const Labels& t, const Labels& p) {
  const double n = static_cast<double>(t.size());
  std::map<std::uint32_t, double> ct, cp;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ct[t[i]] += 1.0;
    cp[p[i]] += 1.0;
    joint[{t[i], p[i]}] += 1.0;
  }
  double mi = 0.0;
  for (const auto& [key, c] : joint) mi += (c / n) * std::log((c / n) / ((ct[key.first] / n) * (cp[key.second] / n)));
  return std::max(0.0, mi);
}

inline bool same_partition(const Labels& a, const Labels& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

inline double nmi(const Labels& t, const Labels& p) {
  if (same_partition(t, p)) return 1.0;
  const double ht = entropy(t), hp = entropy(p);
  if (ht == 0.0 || hp == 0.0) return 0.0;
  return 2.0 * mutual_information(t, p) / (ht + hp);
}

inline double choose(double n, double k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= static_cast<int>(k); ++i) r = r * (n - k + i) / i;
  return r;
}

/// E[I] by averaging over all n! permutations of the predicted labels.
inline double expected_mi_by_permutation(const Labels& t, const Labels& p) {
  std::vector<std::size_t> sigma(p.size());
  std::iota(sigma.begin(), sigma.end(), 0);
  Labels shuffled(p.size());
  double total = 0.0;
  double count = 0.0;
  do {
    for (std::size_t i = 0; i < p.size(); ++i) shuffled[i] = p[sigma[i]];
    total += mutual_information(t, shuffled);
    count += 1.0;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total / count;
}

/// E[I] from the hypergeometric law written with binomial coefficients.
inline double expected_mi_by_binomials(const Labels& t, const Labels& p) {
  std::map<std::uint32_t, double> ct, cp;
  for (auto v : t) ct[v] += 1.0;
  for (auto v : p) cp[v] += 1.0;
  const double n = static_cast<double>(t.size());
  double e = 0.0;
  for (const auto& [i, a] : ct) {
    for (const auto& [j, b] : cp) {
      for (double k = std::max(1.0, a + b - n); k <= std::min(a, b); k += 1.0) {
        const double prob = choose(a, k) * choose(n - a, b - k) / choose(n, b);
        e += prob * (k / n) * std::log(n * k / (a * b));
      }
    }
  }
  return e;
}

inline double ami(const Labels& t, const Labels& p, bool by_permutation) {
  if (same_partition(t, p)) return 1.0;
  const double ht = entropy(t), hp = entropy(p);
  if (ht == 0.0 || hp == 0.0) return 0.0;
  const double e = by_permutation ? expected_mi_by_permutation(t, p) : expected_mi_by_binomials(t, p);
  const double denom = 0.5 * (ht + hp) - e;
  if (std::abs(denom) < 1e-15) return 0.0;
  return (mutual_information(t, p) - e) / denom;
}

/// Adjusted Rand index from explicit enumeration of all unordered pairs.
inline double ari(const Labels& t, const Labels& p) {
  double both = 0, in_t = 0, in_p = 0, pairs = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const bool st = t[i] == t[j], sp = p[i] == p[j];
      both += (st && sp) ? 1 : 0;
      in_t += st ? 1 : 0;
      in_p += sp ? 1 : 0;
      pairs += 1;
    }
  }
  if (pairs == 0) return 1.0;
  const double expected = in_t * in_p / pairs;
  const double max_index = 0.5 * (in_t + in_p);
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

/// All set partitions of {0..n-1} as restricted-growth label vectors.
inline std::vector<Labels> set_partitions(std::size_t n) {
  std::vector<Labels> out;
  Labels cur(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i, std::uint32_t max_label) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t l = 0; l <= max_label + 1 && (i > 0 || l == 0); ++l) {
      cur[i] = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  if (n > 0) {
    cur[0] = 0;
    rec(1, 0);
  }
  return out;
}

struct WeightedEdge {
  std::uint32_t u, v;
  double w;
};

/// Two-level structural entropy evaluated straight from the formula.
inline double se2(std::size_t n, const std::vector<WeightedEdge>& edges, const Labels& part) {
  std::vector<double> d(n, 0.0);
  double vol = 0.0;
  for (const auto& e : edges) {
    d[e.u] += e.w;
    d[e.v] += e.w;
    vol += 2.0 * e.w;
  }
  std::map<std::uint32_t, double> V, g;
  for (std::size_t i = 0; i < n; ++i) V[part[i]] += d[i];
  for (const auto& e : edges) {
    if (part[e.u] != part[e.v]) {
      g[part[e.u]] += e.w;
      g[part[e.v]] += e.w;
    }
  }
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) h -= (d[i] / vol) * std::log2(d[i] / V[part[i]]);
  }
  for (const auto& [c, vc] : V) {
    if (vc > 0) h -= (g[c] / vol) * std::log2(vc / vol);
  }
  return h;
}

inline std::pair<double, Labels> se2_optimum(std::size_t n, const std::vector<WeightedEdge>& edges) {
  double best = std::numeric_limits<double>::infinity();
  Labels arg;
  for (const auto& p : set_partitions(n)) {
    const double h = se2(n, edges, p);
    if (h < best) {
      best = h;
      arg = p;
    }
  }
  return {best, arg};
}

/// Minimum cost over the vertices of the transportation polytope
/// {x >= 0 : row sums = a, column sums = b}, found by trying every basis.
inline double transport_by_vertices(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<double>& cost) {
  const std::size_t m = a.size(), n = b.size(), cells = m * n, rank = m + n - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (pick.size() == rank) {
      // Solve the (m + n) x rank system restricted to the picked cells.
      const std::size_t rows = m + n, cols = rank;
      std::vector<std::vector<double>> A(rows, std::vector<double>(cols + 1, 0.0));
      for (std::size_t c = 0; c < cols; ++c) {
        A[pick[c] / n][c] = 1.0;
        A[m + pick[c] % n][c] = 1.0;
      }
      for (std::size_t i = 0; i < m; ++i) A[i][cols] = a[i];
      for (std::size_t j = 0; j < n; ++j) A[m + j][cols] = b[j];
      std::size_t r = 0;
      std::vector<std::size_t> pivot_col;
      for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        for (std::size_t i = r; i < rows; ++i) {
          if (std::abs(A[i][c]) > std::abs(A[piv][c])) piv = i;
        }
        if (std::abs(A[piv][c]) < 1e-12) return;  // singular: not a basis
        std::swap(A[piv], A[r]);
        for (std::size_t i = 0; i < rows; ++i) {
          if (i == r) continue;
          const double f = A[i][c] / A[r][c];
          for (std::size_t k = c; k <= cols; ++k) A[i][k] -= f * A[r][k];
        }
        pivot_col.push_back(c);
        ++r;
      }
      for (std::size_t i = r; i < rows; ++i) {
        if (std::abs(A[i][cols]) > 1e-9) return;  // inconsistent
      }
      double total = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        const double x = A[k][cols] / A[k][pivot_col[k]];
        if (x < -1e-12) return;
        total += x * cost[pick[pivot_col[k]]];
      }
      best = std::min(best, total);
      return;
    }
    for (std::size_t c = start; c < cells; ++c) {
      pick.push_back(c);
      rec(c + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace oracle
