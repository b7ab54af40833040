#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

#include "nrsfm/synthgen.h"
#include "nrsfm/types.h"

namespace testsupport {

// Uniform random rotation from a Gaussian quaternion.
inline nrsfm::CameraPose random_rotation(nrsfm::Rng& rng) {
  Eigen::Quaterniond q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
  while (q.norm() < 1e-6)
    q = Eigen::Quaterniond(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
  q.normalize();
  return nrsfm::CameraPose::from_matrix(q.toRotationMatrix());
}

// Rotation by a bounded angle (radians) about a random axis.
inline nrsfm::CameraPose random_small_rotation(nrsfm::Rng& rng, double max_angle) {
  Eigen::Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
  while (axis.norm() < 1e-6)
    axis = Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian());
  axis.normalize();
  const double angle = rng.uniform(-max_angle, max_angle);
  return nrsfm::CameraPose::from_matrix(Eigen::AngleAxisd(angle, axis).toRotationMatrix());
}

inline Eigen::MatrixXd random_matrix(nrsfm::Rng& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.gaussian();
  return m;
}

// Independent similarity-alignment oracle (Umeyama with optional z-reflection):
// returns min over s > 0, R in O(3) of |gt - s R est|_F / |gt|_F after
// removing both centroids. Used to score recovered shapes without relying on
// the library's own alignment code.
inline double similarity_align_error(const Eigen::MatrixXd& gt, const Eigen::MatrixXd& est) {
  Eigen::MatrixXd g = gt;
  Eigen::MatrixXd e = est;
  g.colwise() -= Eigen::Vector3d(gt.rowwise().mean());
  e.colwise() -= Eigen::Vector3d(est.rowwise().mean());

  double best = std::numeric_limits<double>::infinity();
  for (int reflect = 0; reflect < 2; ++reflect) {
    Eigen::MatrixXd src = e;
    if (reflect) src.row(2) *= -1.0;
    Eigen::Matrix3d cov = g * src.transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    const Eigen::Vector3d corr(1.0, 1.0, d);
    Eigen::Matrix3d rot = svd.matrixU() * corr.asDiagonal() * svd.matrixV().transpose();
    const double scale = (svd.singularValues().array() * corr.array()).sum() / src.squaredNorm();
    const double err = (g - scale * rot * src).norm() / g.norm();
    best = std::min(best, err);
  }
  return best;
}

}  // namespace testsupport
