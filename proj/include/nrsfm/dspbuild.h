#pragma once

#include <utility>
#include <vector>

#include "nrsfm/types.h"

namespace nrsfm {

/// Dynamic Shape Prior: an ordered set of canonical 3D states keyed by
/// strictly increasing Frobenius norm. States share one arbitrary reference
/// frame; the poses recovered alongside them are discarded.
struct DynamicShapePrior {
  std::vector<Eigen::MatrixXd> states;  // Q states, each 3 x N
  std::vector<double> norms;            // strictly increasing, norms[i] = |states[i]|_F
  std::vector<int> source_ids;          // original frame index of each retained state
  double mu = 0.0;                      // threshold used to thin the states

  int size() const { return static_cast<int>(states.size()); }
  int points() const { return states.empty() ? 0 : static_cast<int>(states[0].cols()); }
};

/// Per-frame shapes in the solver's reference frame; the recovered poses are
/// intentionally not applied. The overload premultiplies every state by one
/// global pose, which is an allowed free choice of reference frame.
std::vector<Eigen::MatrixXd> canonicalize_states(const ShapeSequence& s,
                                                 const std::vector<CameraPose>& poses);
std::vector<Eigen::MatrixXd> canonicalize_states(const ShapeSequence& s,
                                                 const std::vector<CameraPose>& poses,
                                                 const CameraPose& global_pose);

/// Sorts states by ascending Frobenius norm (ties broken by original index),
/// always keeps the smallest, and thereafter keeps a state iff its norm
/// exceeds the last kept norm by more than mu.
DynamicShapePrior build_dsp(const std::vector<Eigen::MatrixXd>& states, double mu);

/// (mu, Q) pairs over an ascending threshold grid; Q is non-increasing.
std::vector<std::pair<double, int>> dsp_cardinality_curve(
    const std::vector<Eigen::MatrixXd>& states, const std::vector<double>& mu_grid);

}  // namespace nrsfm
