#include "nrsfm/evalkit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

#include "nrsfm/geomcore.h"

namespace nrsfm {

Eigen::Matrix3d kabsch_rotation(const Eigen::MatrixXd& target, const Eigen::MatrixXd& source) {
  if (target.rows() != 3 || source.rows() != 3 || target.cols() != source.cols())
    throw InvalidInput("kabsch_rotation: point sets must be 3 x M with equal M");
  const Eigen::Matrix3d m = target * source.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant();
  return svd.matrixU() * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() *
         svd.matrixV().transpose();
}

CameraPose reflect_pose(const CameraPose& pose) {
  const Eigen::DiagonalMatrix<double, 3> z(1.0, 1.0, -1.0);
  return CameraPose::from_matrix(z * pose.matrix() * z);
}

double rmse_3d(const ShapeSequence& gt, const ShapeSequence& est, bool align) {
  if (gt.frames != est.frames || gt.points != est.points)
    throw InvalidInput("rmse_3d: sequence dimensions differ");
  for (int f = 0; f < gt.frames; ++f)
    if (gt.frame(f).norm() == 0.0)
      throw InvalidInput("rmse_3d: zero-norm ground-truth frame");

  Eigen::MatrixXd transformed;
  const Eigen::MatrixXd* est_data = &est.data;
  if (align) {
    // One global rotation over the concatenated sequence, with and without a
    // z-reflection of the estimate; whichever leaves a smaller residual wins.
    Eigen::MatrixXd gt_cat(3, static_cast<Eigen::Index>(gt.frames) * gt.points);
    Eigen::MatrixXd est_cat(3, gt_cat.cols());
    for (int f = 0; f < gt.frames; ++f) {
      gt_cat.middleCols(static_cast<Eigen::Index>(f) * gt.points, gt.points) = gt.frame(f);
      est_cat.middleCols(static_cast<Eigen::Index>(f) * gt.points, gt.points) = est.frame(f);
    }
    const Eigen::Matrix3d r_plain = kabsch_rotation(gt_cat, est_cat);
    Eigen::MatrixXd reflected = est_cat;
    reflected.row(2) *= -1.0;
    const Eigen::Matrix3d r_refl = kabsch_rotation(gt_cat, reflected);
    const double res_plain = (gt_cat - r_plain * est_cat).norm();
    const double res_refl = (gt_cat - r_refl * reflected).norm();

    Eigen::Matrix3d r = r_plain;
    bool use_reflection = res_refl < res_plain;
    if (use_reflection) r = r_refl;
    transformed.resize(est.data.rows(), est.data.cols());
    for (int f = 0; f < est.frames; ++f) {
      Eigen::MatrixXd frame = est.frame(f);
      if (use_reflection) frame.row(2) *= -1.0;
      transformed.middleRows(3 * f, 3) = r * frame;
    }
    est_data = &transformed;
  }

  double sum = 0.0;
  for (int f = 0; f < gt.frames; ++f) {
    const double gt_norm = gt.frame(f).norm();
    sum += (gt.frame(f) - est_data->middleRows(3 * f, 3)).norm() / gt_norm;
  }
  return sum / gt.frames;
}

namespace {

double huber_of(double r, double eps) {
  return (r <= eps) ? 0.5 * r * r : eps * (r - 0.5 * eps);
}

struct RobustFit {
  Eigen::Matrix3d rotation;
  double objective;
};

// Iteratively reweighted Procrustes on per-frame residual norms, followed by
// one trimmed refit that discards gross outlier frames. Huber downweights an
// outlier only to eps/|r|, which leaves a bias of order |outliers|/F; the
// trim removes it.
RobustFit robust_procrustes(const std::vector<Eigen::Matrix3d>& gt,
                            const std::vector<Eigen::Matrix3d>& est, double eps) {
  const size_t f_count = gt.size();
  std::vector<double> weights(f_count, 1.0);
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();

  auto solve_weighted = [&]() {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (size_t f = 0; f < f_count; ++f) m += weights[f] * gt[f] * est[f].transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    r = svd.matrixU() * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() * svd.matrixV().transpose();
  };
  auto residuals = [&]() {
    std::vector<double> res(f_count);
    for (size_t f = 0; f < f_count; ++f) res[f] = (gt[f] - r * est[f]).norm();
    return res;
  };
  auto objective = [&](const std::vector<double>& res) {
    double sum = 0.0;
    for (double v : res) sum += huber_of(v, eps);
    return sum;
  };

  solve_weighted();
  double previous = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 20; ++round) {
    const std::vector<double> res = residuals();
    double obj = 0.0;
    for (size_t f = 0; f < f_count; ++f) {
      weights[f] = (res[f] <= eps) ? 1.0 : eps / res[f];
      obj += huber_of(res[f], eps);
    }
    if (previous - obj < 1e-10 * std::max(previous, 1.0)) break;
    previous = obj;
    solve_weighted();
  }

  if (f_count >= 3) {
    std::vector<double> res = residuals();
    std::vector<double> sorted = res;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double cutoff = std::max(3.0 * median, eps);
    size_t kept = 0;
    for (size_t f = 0; f < f_count; ++f) kept += res[f] <= cutoff ? 1 : 0;
    if (kept >= 3 && kept < f_count) {
      for (size_t f = 0; f < f_count; ++f) weights[f] = res[f] <= cutoff ? 1.0 : 0.0;
      solve_weighted();
    }
  }

  // Report the stated objective over all frames at the final rotation.
  return RobustFit{r, objective(residuals())};
}

}  // namespace

AlignmentResult corrective_rotation(const std::vector<CameraPose>& gt_poses,
                                    const std::vector<CameraPose>& est_poses,
                                    double epsilon) {
  if (gt_poses.empty() || gt_poses.size() != est_poses.size())
    throw InvalidInput("corrective_rotation: pose streams must be nonempty and equal-length");
  if (!(epsilon > 0.0)) throw InvalidInput("corrective_rotation: epsilon must be positive");

  std::vector<Eigen::Matrix3d> gt(gt_poses.size());
  std::vector<Eigen::Matrix3d> est(est_poses.size());
  std::vector<Eigen::Matrix3d> est_reflected(est_poses.size());
  for (size_t f = 0; f < gt_poses.size(); ++f) {
    gt[f] = gt_poses[f].matrix();
    est[f] = est_poses[f].matrix();
    est_reflected[f] = reflect_pose(est_poses[f]).matrix();
  }

  const RobustFit plain = robust_procrustes(gt, est, epsilon);
  const RobustFit reflected = robust_procrustes(gt, est_reflected, epsilon);

  AlignmentResult result;
  result.reflected = reflected.objective < plain.objective;
  const RobustFit& best = result.reflected ? reflected : plain;
  result.corrective = CameraPose::from_matrix(best.rotation);
  result.residual = best.objective;
  return result;
}

double quaternionic_error(const std::vector<CameraPose>& gt_poses,
                          const std::vector<CameraPose>& est_poses,
                          const CameraPose& corrective) {
  if (gt_poses.size() != est_poses.size() || gt_poses.empty())
    throw InvalidInput("quaternionic_error: pose streams must be nonempty and equal-length");
  double sum = 0.0;
  for (size_t f = 0; f < gt_poses.size(); ++f) {
    const UnitQuaternion q_gt = rotation_to_quaternion(gt_poses[f]);
    const UnitQuaternion q_est = rotation_to_quaternion(
        CameraPose::from_matrix(corrective.matrix() * est_poses[f].matrix()));
    sum += q_gt.distance(q_est);
  }
  return sum / static_cast<double>(gt_poses.size());
}

double quaternionic_error(const std::vector<CameraPose>& gt_poses,
                          const std::vector<CameraPose>& est_poses,
                          const AlignmentResult& alignment) {
  if (!alignment.reflected) return quaternionic_error(gt_poses, est_poses, alignment.corrective);
  std::vector<CameraPose> reflected;
  reflected.reserve(est_poses.size());
  for (const auto& p : est_poses) reflected.push_back(reflect_pose(p));
  return quaternionic_error(gt_poses, reflected, alignment.corrective);
}

std::vector<int> convergence_pattern(const std::vector<int>& chosen,
                                     const std::vector<int>& gt) {
  if (chosen.size() != gt.size())
    throw InvalidInput("convergence_pattern: index lists must be equal-length");
  std::vector<int> eta(chosen.size());
  for (size_t f = 0; f < chosen.size(); ++f) eta[f] = std::abs(chosen[f] - gt[f]);
  return eta;
}

double compression_ratio(int frames, int dsp_cardinality) {
  if (dsp_cardinality < 1) throw InvalidInput("compression_ratio: Q must be >= 1");
  return static_cast<double>(frames) / static_cast<double>(dsp_cardinality);
}

}  // namespace nrsfm
