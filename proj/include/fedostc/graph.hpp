#pragma once

#include "fedostc/common.hpp"

#include <string>
#include <vector>

namespace fedostc {

/// Directed transportation graph over clients. Immutable after
/// construction; neighbor sets are in-neighbors (column readers of the
/// adjacency matrix) and always contain the node itself, in ascending
/// index order.
class TrafficGraph {
 public:
  static TrafficGraph from_adjacency(const AdjMat& adjacency);

  /// Fully disconnected graph (self-loops only).
  static TrafficGraph self_only(int n_clients);

  int n_clients() const { return static_cast<int>(adjacency_.rows()); }
  const AdjMat& adjacency() const { return adjacency_; }
  const std::vector<int>& neighbors(int n) const;

 private:
  TrafficGraph() = default;
  AdjMat adjacency_;
  std::vector<std::vector<int>> neighbor_sets_;
};

/// Thresholded Gaussian kernel over pairwise distances:
/// edge(m,n) = 1 iff exp(-d(m,n)^2 / sigma^2) >= threshold. The diagonal
/// is always 1.
AdjMat gaussian_kernel_adjacency(const Mat& distances, double sigma, double threshold);

/// Sample standard deviation of the off-diagonal pairwise distances,
/// the default kernel bandwidth.
double default_kernel_sigma(const Mat& distances);

/// N rows of N comma-separated 0/1 values, no header.
AdjMat load_adjacency_csv(const std::string& path);

/// N rows of N comma-separated nonnegative reals, no header.
Mat load_distance_csv(const std::string& path);

void save_matrix_csv(const std::string& path, const Mat& m);

}  // namespace fedostc
