#include "nrsfm/trajectory.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace nrsfm {

std::vector<std::pair<int, int>> AdjacencyTable::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int n = 0; n < size(); ++n)
    for (int m : neighbors[n])
      if (n < m) out.emplace_back(n, m);
  return out;
}

TrajectoryBasis make_dct_basis(int frames, int rank) {
  if (frames < 1 || rank < 1) throw InvalidInput("make_dct_basis: F and K must be >= 1");
  if (rank > frames) throw InvalidInput("make_dct_basis: K must not exceed F");
  Eigen::MatrixXd theta(frames, rank);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int t = 1; t <= frames; ++t) {
    for (int k = 1; k <= rank; ++k) {
      const double sigma = (k == 1) ? 1.0 : std::sqrt(2.0);
      theta(t - 1, k - 1) =
          sigma * inv_sqrt2 * std::cos(M_PI / (2.0 * frames) * (2 * t - 1) * (k - 1));
    }
  }
  return TrajectoryBasis{frames, rank, std::move(theta)};
}

AdjacencyTable build_adjacency_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidInput("build_adjacency_grid: empty grid");
  AdjacencyTable table;
  table.neighbors.assign(static_cast<size_t>(rows) * cols, {});
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        table.neighbors[id(r, c)].push_back(id(r, c + 1));
        table.neighbors[id(r, c + 1)].push_back(id(r, c));
      }
      if (r + 1 < rows) {
        table.neighbors[id(r, c)].push_back(id(r + 1, c));
        table.neighbors[id(r + 1, c)].push_back(id(r, c));
      }
    }
  }
  for (auto& list : table.neighbors) std::sort(list.begin(), list.end());
  return table;
}

AdjacencyTable build_adjacency_edges(int points,
                                     const std::vector<std::pair<int, int>>& edge_list) {
  if (points < 1) throw InvalidInput("build_adjacency_edges: need at least one point");
  std::set<std::pair<int, int>> unique_edges;
  for (const auto& [a, b] : edge_list) {
    if (a < 0 || b < 0 || a >= points || b >= points)
      throw InvalidInput("build_adjacency_edges: endpoint out of range");
    if (a == b) throw InvalidInput("build_adjacency_edges: duplicate point ids in edge");
    unique_edges.emplace(std::min(a, b), std::max(a, b));
  }
  AdjacencyTable table;
  table.neighbors.assign(points, {});
  for (const auto& [a, b] : unique_edges) {
    table.neighbors[a].push_back(b);
    table.neighbors[b].push_back(a);
  }
  for (auto& list : table.neighbors) std::sort(list.begin(), list.end());
  return table;
}

AdjacencyTable empty_adjacency(int points) {
  if (points < 1) throw InvalidInput("empty_adjacency: need at least one point");
  AdjacencyTable table;
  table.neighbors.assign(points, {});
  return table;
}

}  // namespace nrsfm
