#include "nrsfm/geomcore.h"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace nrsfm {

const char* to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::InvalidInput: return "InvalidInput";
    case ErrorClass::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorClass::DegenerateMotion: return "DegenerateMotion";
    case ErrorClass::NumericalFailure: return "NumericalFailure";
    case ErrorClass::IdWidthOverflow: return "IdWidthOverflow";
    case ErrorClass::CorruptStream: return "CorruptStream";
    case ErrorClass::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

}  // namespace

MeasurementMatrix MeasurementMatrix::create(int frames, int points, Eigen::MatrixXd data) {
  if (frames < 1 || points < 1)
    throw InvalidInput("MeasurementMatrix: need at least one frame and one point");
  if (data.rows() != 2 * frames || data.cols() != points)
    throw InvalidInput("MeasurementMatrix: data must be 2F x N");
  require_finite(data, "MeasurementMatrix");
  return MeasurementMatrix{frames, points, std::move(data)};
}

ShapeSequence ShapeSequence::create(int frames, int points, Eigen::MatrixXd data) {
  if (frames < 1 || points < 1)
    throw InvalidInput("ShapeSequence: need at least one frame and one point");
  if (data.rows() != 3 * frames || data.cols() != points)
    throw InvalidInput("ShapeSequence: data must be 3F x N");
  require_finite(data, "ShapeSequence");
  return ShapeSequence{frames, points, std::move(data)};
}

CameraPose CameraPose::identity() { return CameraPose(Eigen::Matrix3d::Identity()); }

CameraPose CameraPose::from_matrix(const Eigen::Matrix3d& r) {
  if (!r.allFinite()) throw InvalidInput("CameraPose: non-finite entry");
  const double ortho_dev =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_dev > kGroupTolerance)
    throw InvalidInput("CameraPose: matrix is not orthonormal");
  if (std::abs(r.determinant() - 1.0) > kGroupTolerance)
    throw InvalidInput("CameraPose: determinant is not +1");
  return CameraPose(r);
}

double frobenius_norm(const Eigen::MatrixXd& m) {
  require_finite(m, "frobenius_norm");
  return m.norm();
}

double huber_loss(const Eigen::MatrixXd& m, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("huber_loss: epsilon must be positive");
  require_finite(m, "huber_loss");
  double sum = 0.0;
  const double* p = m.data();
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(p[i]);
    sum += (a <= epsilon) ? 0.5 * a * a : epsilon * (a - 0.5 * epsilon);
  }
  return sum;
}

double robust_norm(const Eigen::MatrixXd& m, const RobustNormConfig& config) {
  return config.mode == RobustNormConfig::Mode::Huber ? huber_loss(m, config.epsilon)
                                                      : frobenius_norm(m);
}

CameraPose project_to_so3(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw InvalidInput("project_to_so3: non-finite entry");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= 1e-12)
    throw DegenerateGeometry("project_to_so3: rank-deficient input");
  const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant();
  Eigen::Matrix3d r = svd.matrixU() * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() *
                      svd.matrixV().transpose();
  return CameraPose::from_matrix(r);
}

Eigen::MatrixXd orthographic_project(const CameraPose& pose, const Eigen::MatrixXd& shape) {
  if (shape.rows() != 3) throw InvalidInput("orthographic_project: shape must be 3 x N");
  require_finite(shape, "orthographic_project");
  return pose.matrix().topRows<2>() * shape;
}

UnitQuaternion rotation_to_quaternion(const CameraPose& pose) {
  Eigen::Quaterniond q(pose.matrix());
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return UnitQuaternion{q.w(), q.x(), q.y(), q.z()};
}

CameraPose quaternion_to_rotation(const UnitQuaternion& q) {
  Eigen::Quaterniond eq(q.w, q.x, q.y, q.z);
  eq.normalize();
  return CameraPose::from_matrix(eq.toRotationMatrix());
}

Eigen::Vector3d to_axis_angle(const CameraPose& pose) {
  const UnitQuaternion q = rotation_to_quaternion(pose);
  Eigen::Vector3d v(q.x, q.y, q.z);
  const double sin_half = v.norm();
  if (sin_half < 1e-300) return Eigen::Vector3d::Zero();
  const double angle = 2.0 * std::atan2(sin_half, q.w);  // in [0, pi] since w >= 0
  Eigen::Vector3d axis = v / sin_half;
  if (angle >= M_PI - 1e-12) {
    // Angle-pi ambiguity: pick the axis whose first nonzero component is positive.
    for (int i = 0; i < 3; ++i) {
      if (axis(i) != 0.0) {
        if (axis(i) < 0.0) axis = -axis;
        break;
      }
    }
  }
  return axis * angle;
}

CameraPose from_axis_angle(const Eigen::Vector3d& v) {
  if (!v.allFinite()) throw InvalidInput("from_axis_angle: non-finite entry");
  const double angle = v.norm();
  if (angle < 1e-300) return CameraPose::identity();
  Eigen::AngleAxisd aa(angle, v / angle);
  return CameraPose::from_matrix(aa.toRotationMatrix());
}

}  // namespace nrsfm
