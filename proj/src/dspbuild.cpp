#include "nrsfm/dspbuild.h"

#include <algorithm>
#include <numeric>

#include "nrsfm/geomcore.h"

namespace nrsfm {

std::vector<Eigen::MatrixXd> canonicalize_states(const ShapeSequence& s,
                                                 const std::vector<CameraPose>& poses) {
  return canonicalize_states(s, poses, CameraPose::identity());
}

std::vector<Eigen::MatrixXd> canonicalize_states(const ShapeSequence& s,
                                                 const std::vector<CameraPose>& poses,
                                                 const CameraPose& global_pose) {
  if (static_cast<int>(poses.size()) != s.frames)
    throw InvalidInput("canonicalize_states: pose count must match frame count");
  std::vector<Eigen::MatrixXd> states;
  states.reserve(s.frames);
  const bool is_identity =
      (global_pose.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0;
  for (int f = 0; f < s.frames; ++f) {
    if (is_identity)
      states.emplace_back(s.frame(f));
    else
      states.emplace_back(global_pose.matrix() * s.frame(f));
  }
  return states;
}

namespace {

std::vector<int> norm_order(const std::vector<double>& norms) {
  std::vector<int> order(norms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (norms[a] != norms[b]) return norms[a] < norms[b];
    return a < b;  // tie: earlier frame first
  });
  return order;
}

}  // namespace

DynamicShapePrior build_dsp(const std::vector<Eigen::MatrixXd>& states, double mu) {
  if (states.empty()) throw InvalidInput("build_dsp: no states");
  if (mu < 0.0) throw InvalidInput("build_dsp: mu must be nonnegative");
  const Eigen::Index cols = states[0].cols();
  std::vector<double> norms(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i].rows() != 3 || states[i].cols() != cols)
      throw InvalidInput("build_dsp: states must all be 3 x N");
    norms[i] = frobenius_norm(states[i]);
  }

  const std::vector<int> order = norm_order(norms);
  DynamicShapePrior dsp;
  dsp.mu = mu;
  double last_kept = 0.0;
  for (int idx : order) {
    if (!dsp.states.empty() && !(norms[idx] - last_kept > mu)) continue;
    dsp.states.push_back(states[idx]);
    dsp.norms.push_back(norms[idx]);
    dsp.source_ids.push_back(idx);
    last_kept = norms[idx];
  }
  return dsp;
}

std::vector<std::pair<double, int>> dsp_cardinality_curve(
    const std::vector<Eigen::MatrixXd>& states, const std::vector<double>& mu_grid) {
  if (states.empty()) throw InvalidInput("dsp_cardinality_curve: no states");
  if (!std::is_sorted(mu_grid.begin(), mu_grid.end()))
    throw InvalidInput("dsp_cardinality_curve: mu grid must be ascending");
  std::vector<double> norms(states.size());
  for (size_t i = 0; i < states.size(); ++i) norms[i] = frobenius_norm(states[i]);
  std::vector<int> order = norm_order(norms);

  std::vector<std::pair<double, int>> curve;
  curve.reserve(mu_grid.size());
  for (double mu : mu_grid) {
    if (mu < 0.0) throw InvalidInput("dsp_cardinality_curve: mu must be nonnegative");
    int kept = 0;
    double last = 0.0;
    for (int idx : order) {
      if (kept == 0 || norms[idx] - last > mu) {
        ++kept;
        last = norms[idx];
      }
    }
    curve.emplace_back(mu, kept);
  }
  return curve;
}

}  // namespace nrsfm
