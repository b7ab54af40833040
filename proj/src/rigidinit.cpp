#include "nrsfm/rigidinit.h"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nrsfm/geomcore.h"

namespace nrsfm {

namespace {

// Row vector of the quadratic form a G b^T over the 6 free entries of a
// symmetric 3x3 G, ordered (g11, g12, g13, g22, g23, g33).
Eigen::Matrix<double, 1, 6> gram_row(const Eigen::RowVector3d& a, const Eigen::RowVector3d& b) {
  Eigen::Matrix<double, 1, 6> row;
  row << a(0) * b(0), a(0) * b(1) + a(1) * b(0), a(0) * b(2) + a(2) * b(0),
      a(1) * b(1), a(1) * b(2) + a(2) * b(1), a(2) * b(2);
  return row;
}

}  // namespace

RigidInitResult rigid_factorize(const MeasurementMatrix& w) {
  const int f_count = w.frames;
  const int n_count = w.points;
  if (f_count < 3 || n_count < 4)
    throw InvalidInput("rigid_factorize: need F >= 3 and N >= 4");

  // Center each frame and keep the removed centroids.
  Eigen::MatrixXd centered = w.data;
  std::vector<Eigen::Vector2d> translations(f_count);
  for (int f = 0; f < f_count; ++f) {
    Eigen::Vector2d c = centered.middleRows(2 * f, 2).rowwise().mean();
    centered.middleRows(2 * f, 2).colwise() -= c;
    translations[f] = c;
  }

  // No motion: every frame observes the same 2D configuration, so the metric
  // upgrade has no rotation variety to work with.
  bool all_identical = true;
  for (int f = 1; f < f_count && all_identical; ++f) {
    const double dev = (centered.middleRows(2 * f, 2) - centered.topRows(2)).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * std::max(1.0, centered.cwiseAbs().maxCoeff())) all_identical = false;
  }
  if (all_identical)
    throw DegenerateMotion("rigid_factorize: identical measurements in every frame");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() < 3 || sv(2) <= 1e-9 * std::max(sv(0), 1.0))
    throw DegenerateGeometry("rigid_factorize: centered measurements have rank < 3");

  const Eigen::Vector3d s3 = sv.head<3>();
  Eigen::MatrixXd motion = svd.matrixU().leftCols(3) * s3.cwiseSqrt().asDiagonal();  // 2F x 3
  Eigen::MatrixXd structure = s3.cwiseSqrt().asDiagonal() * svd.matrixV().leftCols(3).transpose();  // 3 x N

  // Metric upgrade: find symmetric G = Q Q^T such that every frame's camera
  // rows m G m^T = n G n^T = 1 and m G n^T = 0 (least squares over 3F rows).
  Eigen::MatrixXd lhs(3 * f_count, 6);
  Eigen::VectorXd rhs(3 * f_count);
  for (int f = 0; f < f_count; ++f) {
    const Eigen::RowVector3d m = motion.row(2 * f);
    const Eigen::RowVector3d n = motion.row(2 * f + 1);
    lhs.row(3 * f) = gram_row(m, m);
    rhs(3 * f) = 1.0;
    lhs.row(3 * f + 1) = gram_row(n, n);
    rhs(3 * f + 1) = 1.0;
    lhs.row(3 * f + 2) = gram_row(m, n);
    rhs(3 * f + 2) = 0.0;
  }
  Eigen::Matrix<double, 6, 1> g = lhs.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);

  Eigen::Matrix3d gram;
  gram << g(0), g(1), g(2), g(1), g(3), g(4), g(2), g(4), g(5);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(gram);
  Eigen::Vector3d evals = eig.eigenvalues();
  const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1.0);
  if (evals(0) < -1e-6 * scale)
    throw DegenerateMotion("rigid_factorize: Gram matrix not positive definite");
  // Small negative eigenvalues from noise are clamped before factorization.
  evals = evals.cwiseMax(1e-10);
  Eigen::Matrix3d q = eig.eigenvectors() * evals.cwiseSqrt().asDiagonal();

  Eigen::MatrixXd cameras = motion * q;  // 2F x 3, rows approximately orthonormal
  Eigen::MatrixXd rest = q.inverse() * structure;
  rest.colwise() -= Eigen::Vector3d(rest.rowwise().mean());

  RigidInitResult result;
  result.translations = std::move(translations);
  result.rest_shape = std::move(rest);
  result.poses.reserve(f_count);
  for (int f = 0; f < f_count; ++f) {
    const Eigen::RowVector3d r1 = cameras.row(2 * f);
    const Eigen::RowVector3d r2 = cameras.row(2 * f + 1);
    Eigen::RowVector3d r3 = r1.cross(r2);
    const double norm3 = r3.norm();
    if (norm3 <= 1e-12)
      throw DegenerateMotion("rigid_factorize: camera rows collapsed");
    r3 *= 0.5 * (r1.norm() + r2.norm()) / norm3;
    Eigen::Matrix3d candidate;
    candidate << r1, r2, r3;
    result.poses.push_back(project_to_so3(candidate));
  }
  return result;
}

}  // namespace nrsfm
