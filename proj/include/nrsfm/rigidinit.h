#pragma once

#include <vector>

#include "nrsfm/types.h"

namespace nrsfm {

/// Output of the rank-3 rigid factorization. The shape is recovered up to a
/// global rotation and a possible reflection about the z-axis; poses are
/// always proper rotations (the reflection is pushed into the shape).
struct RigidInitResult {
  std::vector<CameraPose> poses;      // F proper rotations
  Eigen::MatrixXd rest_shape;         // 3 x N, zero column mean
  std::vector<Eigen::Vector2d> translations;  // per-frame centroids removed from W
};

/// Tomasi-Kanade orthographic factorization with metric upgrade.
///
/// Centers measurements per frame, truncates the SVD to rank 3, solves the
/// least-squares system on the symmetric Gram matrix enforcing per-frame row
/// orthonormality, and completes each camera block to a rotation.
///
/// Throws DegenerateGeometry when the centered measurements have rank < 3 and
/// DegenerateMotion when the rotation variety is insufficient (all frames
/// identical, or the Gram system is not positive definite).
RigidInitResult rigid_factorize(const MeasurementMatrix& w);

}  // namespace nrsfm
