#pragma once

#include <Eigen/Dense>

#include "nrsfm/types.h"

namespace nrsfm {

/// Unit quaternion, scalar-first component order. The sign convention keeps
/// the scalar part nonnegative; when it is exactly zero the vector part is
/// left as produced by the conversion.
struct UnitQuaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector4d coeffs() const { return {w, x, y, z}; }
  double distance(const UnitQuaternion& other) const {
    return (coeffs() - other.coeffs()).norm();
  }
};

/// sqrt of the sum of squared entries. Throws InvalidInput on non-finite input.
double frobenius_norm(const Eigen::MatrixXd& m);

/// Sum of per-element Huber losses: r^2/2 inside |r| <= epsilon, and
/// epsilon*|r| - epsilon^2/2 outside. Throws InvalidInput on non-finite input
/// or epsilon <= 0.
double huber_loss(const Eigen::MatrixXd& m, double epsilon);

/// Evaluates either huber_loss or frobenius_norm depending on config.mode.
double robust_norm(const Eigen::MatrixXd& m, const RobustNormConfig& config);

/// Nearest rotation in Frobenius distance: with m = U S V^T the result is
/// U diag(1, 1, det(UV^T)) V^T. Throws DegenerateGeometry when the smallest
/// singular value is <= 1e-12.
CameraPose project_to_so3(const Eigen::Matrix3d& m);

/// First two rows of pose.rotation * shape (orthographic camera I_{2x3} R).
Eigen::MatrixXd orthographic_project(const CameraPose& pose, const Eigen::MatrixXd& shape);

/// Rotation -> unit quaternion with nonnegative scalar part.
UnitQuaternion rotation_to_quaternion(const CameraPose& pose);
CameraPose quaternion_to_rotation(const UnitQuaternion& q);

/// Axis-angle codec: encodes to axis*angle with angle in [0, pi]. The axis
/// ambiguity at angle == pi is resolved by flipping the axis so that its
/// first nonzero component is positive.
Eigen::Vector3d to_axis_angle(const CameraPose& pose);
CameraPose from_axis_angle(const Eigen::Vector3d& v);

}  // namespace nrsfm
