#include <doctest.h>

#include "nrsfm/geomcore.h"
#include "nrsfm/rigidinit.h"
#include "support.h"

using namespace nrsfm;

namespace {

MeasurementMatrix project_rigid(const Eigen::MatrixXd& shape,
                                const std::vector<CameraPose>& poses) {
  const int f_count = static_cast<int>(poses.size());
  const int n_count = static_cast<int>(shape.cols());
  Eigen::MatrixXd w(2 * f_count, n_count);
  for (int f = 0; f < f_count; ++f)
    w.middleRows(2 * f, 2) = orthographic_project(poses[f], shape);
  return MeasurementMatrix::create(f_count, n_count, std::move(w));
}

Eigen::MatrixXd cube_corners() {
  Eigen::MatrixXd shape(3, 8);
  int idx = 0;
  for (int x = -1; x <= 1; x += 2)
    for (int y = -1; y <= 1; y += 2)
      for (int z = -1; z <= 1; z += 2) {
        shape.col(idx++) = Eigen::Vector3d(x, y, z);
      }
  return shape;
}

}  // namespace

TEST_CASE("rigid factorization recovers a cube") {
  Rng rng(21);
  const Eigen::MatrixXd shape = cube_corners();
  std::vector<CameraPose> poses;
  for (int f = 0; f < 20; ++f) poses.push_back(testsupport::random_rotation(rng));
  const MeasurementMatrix w = project_rigid(shape, poses);

  const RigidInitResult result = rigid_factorize(w);
  CHECK(result.poses.size() == 20);
  CHECK(result.rest_shape.rowwise().mean().norm() < 1e-9);

  // Shape up to similarity with reflection allowed.
  CHECK(testsupport::similarity_align_error(shape, result.rest_shape) < 1e-6);

  // Reprojection consistency of the factorization itself.
  Eigen::MatrixXd reproj(2 * 20, 8);
  for (int f = 0; f < 20; ++f)
    reproj.middleRows(2 * f, 2) = orthographic_project(result.poses[f], result.rest_shape);
  CHECK((w.data - reproj).norm() / w.data.norm() < 1e-6);
}

TEST_CASE("planar scenes are degenerate") {
  Rng rng(22);
  Eigen::MatrixXd shape(3, 9);
  int idx = 0;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y) shape.col(idx++) = Eigen::Vector3d(x, y, 0.7);
  std::vector<CameraPose> poses;
  for (int f = 0; f < 10; ++f) poses.push_back(testsupport::random_rotation(rng));
  const MeasurementMatrix w = project_rigid(shape, poses);
  CHECK_THROWS_AS(rigid_factorize(w), DegenerateGeometry);
}

TEST_CASE("motionless sequences are degenerate") {
  Rng rng(23);
  const Eigen::MatrixXd shape = cube_corners();
  const CameraPose pose = testsupport::random_rotation(rng);
  std::vector<CameraPose> poses(12, pose);
  const MeasurementMatrix w = project_rigid(shape, poses);
  CHECK_THROWS_AS(rigid_factorize(w), DegenerateMotion);
}

TEST_CASE("rigid factorization preconditions") {
  Rng rng(24);
  const Eigen::MatrixXd shape = cube_corners();
  std::vector<CameraPose> poses;
  for (int f = 0; f < 2; ++f) poses.push_back(testsupport::random_rotation(rng));
  const MeasurementMatrix w = project_rigid(shape, poses);
  CHECK_THROWS_AS(rigid_factorize(w), InvalidInput);
}
