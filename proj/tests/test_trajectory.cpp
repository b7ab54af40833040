#include <doctest.h>

#include <cmath>

#include "nrsfm/synthgen.h"
#include "nrsfm/trajectory.h"

using namespace nrsfm;

TEST_CASE("dct basis values") {
  const TrajectoryBasis b = make_dct_basis(5, 3);
  for (int t = 0; t < 5; ++t) CHECK(b.theta(t, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));

  const TrajectoryBasis b2 = make_dct_basis(2, 2);
  CHECK(b2.theta(0, 1) == doctest::Approx(std::cos(M_PI / 4)));
  CHECK(b2.theta(1, 1) == doctest::Approx(std::cos(3 * M_PI / 4)));

  CHECK_THROWS_AS(make_dct_basis(4, 5), InvalidInput);
  CHECK_THROWS_AS(make_dct_basis(0, 1), InvalidInput);
}

TEST_CASE("dct basis orthogonality") {
  const TrajectoryBasis b = make_dct_basis(64, 16);
  const Eigen::MatrixXd gram = b.theta.transpose() * b.theta;
  const Eigen::MatrixXd expected = 32.0 * Eigen::MatrixXd::Identity(16, 16);
  CHECK((gram - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("grid adjacency") {
  const AdjacencyTable small = build_adjacency_grid(2, 2);
  for (int n = 0; n < 4; ++n) CHECK(small.neighbors[n].size() == 2);

  const AdjacencyTable nine = build_adjacency_grid(3, 3);
  CHECK(nine.neighbors[4].size() == 4);  // center point
  CHECK(nine.neighbors[0].size() == 2);  // corner
  CHECK(nine.edges().size() == 12);
}

TEST_CASE("edge-list adjacency is symmetric and rejects bad input") {
  Rng rng(5);
  const int points = 12;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 30; ++i) {
    const int a = static_cast<int>(rng.bounded(points));
    int b = static_cast<int>(rng.bounded(points));
    if (a == b) b = (b + 1) % points;
    edges.emplace_back(a, b);
  }
  const AdjacencyTable table = build_adjacency_edges(points, edges);
  for (int n = 0; n < points; ++n) {
    for (int m : table.neighbors[n]) {
      CHECK(m != n);
      const auto& back = table.neighbors[m];
      CHECK(std::find(back.begin(), back.end(), n) != back.end());
    }
  }

  CHECK_THROWS_AS(build_adjacency_edges(4, {{1, 1}}), InvalidInput);
  CHECK_THROWS_AS(build_adjacency_edges(4, {{0, 4}}), InvalidInput);
}
