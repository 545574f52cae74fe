#include "fedostc/graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fedostc {

TrafficGraph TrafficGraph::from_adjacency(const AdjMat& adjacency) {
  require(adjacency.rows() == adjacency.cols() && adjacency.rows() >= 1, Errc::non_square,
          "adjacency matrix must be square and nonempty");
  const int n = static_cast<int>(adjacency.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      require(adjacency(i, j) == 0 || adjacency(i, j) == 1, Errc::non_binary_entry,
              "adjacency entry at (" + std::to_string(i) + "," + std::to_string(j) +
                  ") is not 0/1");

  TrafficGraph g;
  g.adjacency_ = adjacency;
  g.adjacency_.diagonal().setOnes();
  g.neighbor_sets_.resize(n);
  for (int col = 0; col < n; ++col) {
    auto& set = g.neighbor_sets_[col];
    for (int row = 0; row < n; ++row)
      if (g.adjacency_(row, col) == 1) set.push_back(row);
  }
  return g;
}

TrafficGraph TrafficGraph::self_only(int n_clients) {
  require(n_clients >= 1, Errc::non_square, "need at least one client");
  AdjMat eye = AdjMat::Identity(n_clients, n_clients);
  return from_adjacency(eye);
}

const std::vector<int>& TrafficGraph::neighbors(int n) const {
  require(n >= 0 && n < n_clients(), Errc::out_of_range_input,
          "client index " + std::to_string(n) + " out of range");
  return neighbor_sets_[n];
}

AdjMat gaussian_kernel_adjacency(const Mat& distances, double sigma, double threshold) {
  require(distances.rows() == distances.cols() && distances.rows() >= 1, Errc::non_square,
          "distance matrix must be square");
  require(sigma > 0.0, Errc::out_of_range_input, "sigma must be positive");
  require(threshold > 0.0 && threshold <= 1.0, Errc::out_of_range_input,
          "threshold must lie in (0,1]");
  const int n = static_cast<int>(distances.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      require(distances(i, j) >= 0.0, Errc::negative_distance, "distances must be nonnegative");
      require(distances(i, j) == distances(j, i), Errc::asymmetric_input,
              "distance matrix must be symmetric");
    }
  }
  AdjMat adj = AdjMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = distances(i, j);
      adj(i, j) = std::exp(-(d * d) / (sigma * sigma)) >= threshold ? 1 : 0;
    }
  }
  adj.diagonal().setOnes();
  return adj;
}

double default_kernel_sigma(const Mat& distances) {
  const int n = static_cast<int>(distances.rows());
  std::vector<double> off;
  off.reserve(static_cast<size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) off.push_back(distances(i, j));
  if (off.size() < 2) return 1.0;
  double mean = 0.0;
  for (double d : off) mean += d;
  mean /= static_cast<double>(off.size());
  double ss = 0.0;
  for (double d : off) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(off.size() - 1));
  return sd > 0.0 ? sd : 1.0;
}

namespace {

std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::empty_file, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  require(!rows.empty(), Errc::empty_file, path + " is empty");
  return rows;
}

}  // namespace

AdjMat load_adjacency_csv(const std::string& path) {
  auto rows = read_csv_cells(path);
  const auto n = rows.size();
  AdjMat adj(n, n);
  for (size_t i = 0; i < n; ++i) {
    require(rows[i].size() == n, Errc::ragged_rows,
            path + " row " + std::to_string(i) + " has wrong width");
    for (size_t j = 0; j < n; ++j) {
      const std::string& c = rows[i][j];
      require(c == "0" || c == "1", Errc::non_binary_entry,
              path + " entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not 0/1");
      adj(static_cast<int>(i), static_cast<int>(j)) = c == "1" ? 1 : 0;
    }
  }
  return adj;
}

Mat load_distance_csv(const std::string& path) {
  auto rows = read_csv_cells(path);
  const auto n = rows.size();
  Mat d(n, n);
  for (size_t i = 0; i < n; ++i) {
    require(rows[i].size() == n, Errc::ragged_rows,
            path + " row " + std::to_string(i) + " has wrong width");
    for (size_t j = 0; j < n; ++j)
      d(static_cast<int>(i), static_cast<int>(j)) = std::stod(rows[i][j]);
  }
  return d;
}

void save_matrix_csv(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  require(out.good(), Errc::bad_config, "cannot write " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", m(i, j));
      out << buf << (j + 1 < m.cols() ? "," : "");
    }
    out << "\n";
  }
}

}  // namespace fedostc
