#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sedkit {

struct KMeansOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  // Independent k-means++ starts; the lowest-inertia run wins (ties: earliest).
  std::size_t restarts = 10;
};

struct KMeansResult {
  std::vector<std::uint32_t> labels;
  std::vector<std::vector<double>> centroids;
  /// Inertia after each assignment step of the winning run.
  std::vector<double> inertia_history;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Clusters that empty out are
/// re-seeded with the point farthest from its centroid.
KMeansResult kmeans(std::span<const std::vector<double>> points, const KMeansOptions& options);

}  // namespace sedkit
