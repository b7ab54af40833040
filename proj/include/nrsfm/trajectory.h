#pragma once

#include <utility>
#include <vector>

#include "nrsfm/types.h"

namespace nrsfm {

/// DCT trajectory basis Theta (F x K):
///   theta(t, k) = sigma_k / sqrt(2) * cos(pi/(2F) * (2t - 1)(k - 1)),
/// with sigma_1 = 1 and sigma_k = sqrt(2) otherwise. Columns satisfy
/// Theta^T Theta = (F/2) I.
struct TrajectoryBasis {
  int frames = 0;
  int rank = 0;
  Eigen::MatrixXd theta;  // F x K
};

/// Coefficients A (3K x N): column n holds the K per-axis coefficients that
/// approximate point n's 3D trajectory in the basis.
struct TrajectoryCoefficients {
  Eigen::MatrixXd data;  // 3K x N
};

/// Symmetric point-neighborhood table derived from the spatial arrangement of
/// the points in the reference frame. Edges carry no weights.
struct AdjacencyTable {
  std::vector<std::vector<int>> neighbors;

  int size() const { return static_cast<int>(neighbors.size()); }
  /// Each undirected edge once, as (n, m) with n < m.
  std::vector<std::pair<int, int>> edges() const;
};

TrajectoryBasis make_dct_basis(int frames, int rank);

/// 4-neighborhood over a rows x cols grid; point index n = r * cols + c.
AdjacencyTable build_adjacency_grid(int rows, int cols);

/// Explicit undirected edge list over `points` points. Duplicate edges are
/// collapsed; self-loops and out-of-range endpoints are rejected.
AdjacencyTable build_adjacency_edges(int points, const std::vector<std::pair<int, int>>& edge_list);

/// Empty table (no spatial coupling); used for sparse, unstructured tracks.
AdjacencyTable empty_adjacency(int points);

}  // namespace nrsfm
