#pragma once

#include <Eigen/Dense>

#include "nrsfm/errors.h"

namespace nrsfm {

/// Stacked orthographic observations: two rows (u, v) per frame, one column
/// per tracked point. Entries are pixels.
struct MeasurementMatrix {
  int frames = 0;
  int points = 0;
  Eigen::MatrixXd data;  // 2F x N

  /// Validates shape and finiteness before constructing.
  static MeasurementMatrix create(int frames, int points, Eigen::MatrixXd data);

  Eigen::Block<const Eigen::MatrixXd> frame(int f) const {
    return data.middleRows(2 * f, 2);
  }
  Eigen::Block<Eigen::MatrixXd> frame(int f) { return data.middleRows(2 * f, 2); }
};

/// Stacked world-space point sets: three rows (x, y, z) per frame.
struct ShapeSequence {
  int frames = 0;
  int points = 0;
  Eigen::MatrixXd data;  // 3F x N

  static ShapeSequence create(int frames, int points, Eigen::MatrixXd data);

  Eigen::Block<const Eigen::MatrixXd> frame(int f) const {
    return data.middleRows(3 * f, 3);
  }
  Eigen::Block<Eigen::MatrixXd> frame(int f) { return data.middleRows(3 * f, 3); }
};

/// Proper rotation in SO(3). Construction is checked: R^T R = I and
/// det(R) = +1, both within 1e-9 max-abs deviation.
class CameraPose {
 public:
  static constexpr double kGroupTolerance = 1e-9;

  static CameraPose identity();
  /// Throws InvalidInput if the matrix is not a rotation within tolerance.
  static CameraPose from_matrix(const Eigen::Matrix3d& r);

  const Eigen::Matrix3d& matrix() const { return r_; }

 private:
  explicit CameraPose(const Eigen::Matrix3d& r) : r_(r) {}
  Eigen::Matrix3d r_;
};

/// Robust-norm configuration. `huber` aggregates per-element Huber losses,
/// `frobenius` evaluates the plain Frobenius norm.
struct RobustNormConfig {
  enum class Mode { Huber, Frobenius };
  double epsilon = 0.1;
  Mode mode = Mode::Huber;
};

}  // namespace nrsfm
