#pragma once

#include <vector>

#include "nrsfm/types.h"

namespace nrsfm {

/// Outcome of pose-stream alignment: a single corrective rotation, whether a
/// z-reflection was applied to the estimated stream first, and the final
/// robust objective value.
struct AlignmentResult {
  CameraPose corrective = CameraPose::identity();
  bool reflected = false;
  double residual = 0.0;
};

/// Mean relative per-frame error: (1/F) sum_f |gt_f - est_f|_F / |gt_f|_F.
/// With align = true, one global rotation (and, if it helps, a z-reflection)
/// found by Procrustes on the concatenated sequences is applied to est first.
double rmse_3d(const ShapeSequence& gt, const ShapeSequence& est, bool align = false);

/// Solves min_R sum_f huber(|gt_f - R est_f|_F) by iteratively reweighted
/// orthogonal Procrustes, evaluates the z-reflected variant of est as well,
/// and keeps whichever aligns better. A final trimmed refit drops gross
/// outlier frames so that a planted rotation is recovered exactly.
AlignmentResult corrective_rotation(const std::vector<CameraPose>& gt_poses,
                                    const std::vector<CameraPose>& est_poses,
                                    double epsilon = 1.0);

/// Mean Euclidean distance between sign-normalized unit quaternions of gt_f
/// and corrective * est_f.
double quaternionic_error(const std::vector<CameraPose>& gt_poses,
                          const std::vector<CameraPose>& est_poses,
                          const CameraPose& corrective);
/// Same, but honoring the alignment's reflection flag.
double quaternionic_error(const std::vector<CameraPose>& gt_poses,
                          const std::vector<CameraPose>& est_poses,
                          const AlignmentResult& alignment);

/// Per-frame absolute index distance between chosen and ground-truth states.
std::vector<int> convergence_pattern(const std::vector<int>& chosen,
                                     const std::vector<int>& gt);

/// Frames divided by prior cardinality.
double compression_ratio(int frames, int dsp_cardinality);

/// argmin_R |target - R source|_F over SO(3) for 3 x M point sets.
Eigen::Matrix3d kabsch_rotation(const Eigen::MatrixXd& target, const Eigen::MatrixXd& source);

/// Conjugation by diag(1, 1, -1): the pose change that corresponds to
/// reflecting the reconstruction about the z-axis.
CameraPose reflect_pose(const CameraPose& pose);

}  // namespace nrsfm
