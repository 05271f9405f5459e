#include "sedkit/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "sedkit/error.hpp"
#include "sedkit/rng.hpp"

namespace sedkit {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<std::vector<double>> seed_plus_plus(std::span<const std::vector<double>> points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

KMeansResult lloyd(std::span<const std::vector<double>> points, std::vector<std::vector<double>> centroids,
                   std::size_t max_iters) {
  const std::size_t n = points.size();
  const std::size_t k = centroids.size();
  const std::size_t dim = points.front().size();
  KMeansResult r;
  r.labels.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  std::vector<std::uint32_t> previous;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i], centroids[c]);
        if (d < best) {
          best = d;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      r.labels[i] = arg;
      dist[i] = best;
      inertia += best;
    }
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = iter + 1;
    if (r.labels == previous) break;
    previous = r.labels;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[r.labels[i]];
      for (std::size_t j = 0; j < dim; ++j) s[j] += points[i][j];
      ++counts[r.labels[i]];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        continue;
      }
      std::size_t far = n;
      double far_d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far < n) {
        taken[far] = true;
        centroids[c] = points[far];
      }
    }
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

KMeansResult kmeans(std::span<const std::vector<double>> points, const KMeansOptions& options) {
  const std::size_t n = points.size();
  if (options.k == 0) throw Error(ErrorCode::kInvalidHyperparameter, "k must be at least 1");
  if (options.max_iters == 0) throw Error(ErrorCode::kInvalidHyperparameter, "max_iters must be at least 1");
  if (options.k > n) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(options.k) + " exceeds " + std::to_string(n) + " points");
  }
  const std::size_t dim = points.front().size();
  bool all_zero = true;
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "points have ragged dimensions");
    all_zero = all_zero && std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; });
  }
  if (all_zero && options.k > 1) {
    throw Error(ErrorCode::kZeroVectorsOnly, "all input vectors are zero; cannot form " + std::to_string(options.k) + " clusters");
  }

  Rng rng(options.seed);
  KMeansResult best;
  bool have_best = false;
  for (std::size_t run = 0; run < std::max<std::size_t>(1, options.restarts); ++run) {
    auto result = lloyd(points, seed_plus_plus(points, options.k, rng), options.max_iters);
    if (!have_best || result.inertia < best.inertia) {
      best = std::move(result);
      have_best = true;
    }
  }
  return best;
}

}  // namespace sedkit
