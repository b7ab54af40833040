#include "nrsfm/dspr.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/SVD>

#include "nrsfm/geomcore.h"

namespace nrsfm {

DspIndicator::DspIndicator(int index, int cardinality) : index_(index) {
  if (cardinality < 1) throw InvalidInput("DspIndicator: empty prior");
  if (index < 0 || index >= cardinality)
    throw InvalidInput("DspIndicator: index out of range");
}

double dspr_energy(const Eigen::MatrixXd& w_f, const Eigen::MatrixXd& state,
                   const CameraPose& pose, const Eigen::MatrixXd& s_prev,
                   const DsprWeights& weights) {
  if (w_f.rows() != 2 || state.rows() != 3 || s_prev.rows() != 3 ||
      w_f.cols() != state.cols() || s_prev.cols() != state.cols())
    throw InvalidInput("dspr_energy: dimension mismatch");
  const double data = (w_f - pose.matrix().topRows<2>() * state).norm();
  const double temporal = (state - s_prev).norm();
  return weights.alpha * data + weights.beta * temporal + DspIndicator::gamma_term();
}

CameraPose update_pose(const Eigen::MatrixXd& w_f, const Eigen::MatrixXd& state) {
  if (w_f.rows() != 2 || state.rows() != 3 || w_f.cols() != state.cols())
    throw InvalidInput("update_pose: dimension mismatch");
  const Eigen::Index n = state.cols();
  if (n < 3) throw DegenerateGeometry("update_pose: need at least 3 points");

  // Collinearity is judged on the centered state: a line has rank <= 1 there.
  Eigen::MatrixXd centered = state;
  centered.colwise() -= Eigen::Vector3d(state.rowwise().mean());
  Eigen::JacobiSVD<Eigen::MatrixXd> centered_svd(centered);
  const Eigen::VectorXd& csv = centered_svd.singularValues();
  if (csv(1) <= 1e-12 * std::max(csv(0), 1.0))
    throw DegenerateGeometry("update_pose: collinear state");

  // min_M |W - M S|_F via SVD-backed least squares (tolerates planar states).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(state.transpose(),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::Matrix<double, 3, 2> m_t = svd.solve(w_f.transpose());
  const Eigen::RowVector3d r1 = m_t.col(0).transpose();
  const Eigen::RowVector3d r2 = m_t.col(1).transpose();
  Eigen::RowVector3d r3 = r1.cross(r2);
  const double norm3 = r3.norm();
  if (norm3 <= 1e-12 * std::max(1.0, r1.norm() * r2.norm()))
    throw DegenerateGeometry("update_pose: affine camera rows are parallel");
  r3 *= 0.5 * (r1.norm() + r2.norm()) / norm3;
  Eigen::Matrix3d candidate;
  candidate << r1, r2, r3;
  return project_to_so3(candidate);
}

namespace {

// Lazily evaluated per-index energies shared by all seeds of one selection.
class EnergyCache {
 public:
  EnergyCache(const Eigen::MatrixXd& w_f, const CameraPose& pose,
              const DynamicShapePrior& dsp, const Eigen::MatrixXd& s_prev,
              const DsprWeights& weights)
      : w_f_(w_f), pose_(pose), dsp_(dsp), s_prev_(s_prev), weights_(weights),
        values_(dsp.size(), std::numeric_limits<double>::quiet_NaN()) {}

  double at(int i) {
    if (std::isnan(values_[i]))
      values_[i] = dspr_energy(w_f_, dsp_.states[i], pose_, s_prev_, weights_);
    return values_[i];
  }

 private:
  const Eigen::MatrixXd& w_f_;
  const CameraPose& pose_;
  const DynamicShapePrior& dsp_;
  const Eigen::MatrixXd& s_prev_;
  const DsprWeights& weights_;
  std::vector<double> values_;
};

// Discrete descent: step to the strictly lower neighbor until none is left.
int descend(EnergyCache& cache, int start, int q) {
  int i = start;
  double e = cache.at(i);
  while (true) {
    const double left = (i > 0) ? cache.at(i - 1) : std::numeric_limits<double>::infinity();
    const double right =
        (i + 1 < q) ? cache.at(i + 1) : std::numeric_limits<double>::infinity();
    if (left < e && left <= right) {
      i -= 1;
      e = left;
    } else if (right < e) {
      i += 1;
      e = right;
    } else {
      return i;
    }
  }
}

}  // namespace

MsgdResult msgd_select(const Eigen::MatrixXd& w_f, const CameraPose& pose,
                       const DynamicShapePrior& dsp, const Eigen::MatrixXd& s_prev,
                       const DsprWeights& weights, int seeds, int warm_start) {
  const int q = dsp.size();
  if (q == 0) throw InvalidInput("msgd_select: empty prior");
  if (seeds < 1 || seeds > q) throw InvalidInput("msgd_select: seeds must be in [1, Q]");
  if (warm_start >= q) throw InvalidInput("msgd_select: warm start out of range");

  EnergyCache cache(w_f, pose, dsp, s_prev, weights);
  MsgdResult result;
  result.index = -1;
  result.energy = std::numeric_limits<double>::infinity();

  auto run_seed = [&](int start) {
    const int local_min = descend(cache, start, q);
    const double e = cache.at(local_min);
    result.seed_trace.push_back({start, local_min, e});
    if (e < result.energy || (e == result.energy && local_min < result.index)) {
      result.energy = e;
      result.index = local_min;
    }
  };

  if (seeds == 1) {
    run_seed(0);
  } else {
    for (int j = 0; j < seeds; ++j)
      run_seed(static_cast<int>(std::lround(static_cast<double>(j) * (q - 1) / (seeds - 1))));
  }
  if (warm_start >= 0) run_seed(warm_start);
  return result;
}

FrameResult dspr_frame(const Eigen::MatrixXd& w_f, const DynamicShapePrior& dsp,
                       const Eigen::MatrixXd& s_prev, const CameraPose& pose_init,
                       const DsprConfig& config) {
  const int q = dsp.size();
  if (q == 0) throw InvalidInput("dspr_frame: empty prior");
  if (w_f.rows() != 2 || w_f.cols() != dsp.points())
    throw InvalidInput("dspr_frame: measurement must be 2 x N");
  if (config.max_alternations < 1) throw InvalidInput("dspr_frame: need max_alternations >= 1");
  const int seeds = std::min(std::max(config.seeds, 1), q);

  FrameResult result;
  // Near-constant measurements carry no pose information; flag instead of
  // failing and keep the initial pose.
  Eigen::MatrixXd w_centered = w_f;
  w_centered.colwise() -= Eigen::Vector2d(w_f.rowwise().mean());
  result.low_confidence = w_centered.norm() <= 1e-9 * std::max(1.0, w_f.norm());

  CameraPose pose = pose_init;
  // Warm-up half-step: refit the pose of the previous state to the current
  // measurement. Selecting against a pose that is stale by one camera step
  // would bias the choice toward the previous state.
  if (!result.low_confidence) {
    try {
      const CameraPose refit = update_pose(w_f, s_prev);
      if (dspr_energy(w_f, s_prev, refit, s_prev, config.weights) <
          dspr_energy(w_f, s_prev, pose, s_prev, config.weights))
        pose = refit;
    } catch (const DegenerateGeometry&) {
      // keep the initial pose
    }
  }
  int index = -1;
  int previous_index = -1;
  double previous_energy = dspr_energy(w_f, s_prev, pose, s_prev, config.weights);
  double energy = previous_energy;
  int alternations = 0;

  // Refit the pose for one candidate state, gated on strict energy decrease.
  auto try_pose_refit = [&](int candidate_index, CameraPose& io_pose, double& io_energy) {
    if (result.low_confidence) return false;
    try {
      CameraPose candidate = update_pose(w_f, dsp.states[candidate_index]);
      const double candidate_energy =
          dspr_energy(w_f, dsp.states[candidate_index], candidate, s_prev, config.weights);
      if (candidate_energy < io_energy) {
        io_pose = candidate;
        io_energy = candidate_energy;
        return true;
      }
    } catch (const DegenerateGeometry&) {
    }
    return false;
  };

  for (int k = 0; k < config.max_alternations; ++k) {
    ++alternations;
    MsgdResult selection =
        msgd_select(w_f, pose, dsp, s_prev, config.weights, seeds, previous_index);
    index = selection.index;
    energy = selection.energy;
    result.seed_trace = std::move(selection.seed_trace);

    const bool pose_changed = try_pose_refit(index, pose, energy);

    result.energy_trace.push_back(energy);
    const double decrease = previous_energy - energy;
    const bool stalled = index == previous_index && !pose_changed;
    if (stalled ||
        (decrease >= 0.0 && decrease < config.rel_tol * std::max(previous_energy, 1e-30))) {
      // Discrete joint stationarity: a selection at a shared pose resolves
      // neighboring states only down to the pose-misfit scale, so check the
      // index neighbors at their own refit poses before stopping.
      bool escaped = false;
      for (int cand : {index - 1, index + 1}) {
        if (cand < 0 || cand >= q) continue;
        CameraPose cand_pose = pose;
        double cand_energy = energy;
        if (try_pose_refit(cand, cand_pose, cand_energy)) {
          index = cand;
          pose = cand_pose;
          energy = cand_energy;
          result.energy_trace.back() = energy;
          escaped = true;
          break;
        }
      }
      if (!escaped) break;
    }
    previous_energy = energy;
    previous_index = index;
  }

  result.index = index;
  result.pose = pose;
  result.shape = pose.matrix() * dsp.states[index];
  result.energy = dspr_energy(w_f, dsp.states[index], pose, s_prev, config.weights);
  result.iterations = alternations;
  return result;
}

std::vector<FrameResult> dspr_sequence(const MeasurementMatrix& w,
                                       const DynamicShapePrior& dsp,
                                       const DsprConfig& config) {
  if (dsp.size() == 0) throw InvalidInput("dspr_sequence: empty prior");
  if (w.points != dsp.points())
    throw InvalidInput("dspr_sequence: point count differs from the prior");

  // First frame: no previous shape exists, so seed with the state closest in
  // energy under the identity pose (data term only).
  const CameraPose identity = CameraPose::identity();
  int best = 0;
  double best_energy = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dsp.size(); ++i) {
    const double e = (w.frame(0) - dsp.states[i].topRows<2>()).norm();
    if (e < best_energy) {
      best_energy = e;
      best = i;
    }
  }

  Eigen::MatrixXd s_prev = dsp.states[best];
  CameraPose pose_init = identity;
  std::vector<FrameResult> results;
  results.reserve(w.frames);
  for (int f = 0; f < w.frames; ++f) {
    const auto start = std::chrono::steady_clock::now();
    FrameResult fr = dspr_frame(w.frame(f), dsp, s_prev, pose_init, config);
    fr.millis = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    s_prev = dsp.states[fr.index];
    pose_init = fr.pose;
    results.push_back(std::move(fr));
  }
  return results;
}

ShapeSequence to_shape_sequence(const std::vector<FrameResult>& results) {
  if (results.empty()) throw InvalidInput("to_shape_sequence: no frames");
  const int n = static_cast<int>(results[0].shape.cols());
  Eigen::MatrixXd data(3 * results.size(), n);
  for (size_t f = 0; f < results.size(); ++f) data.middleRows(3 * f, 3) = results[f].shape;
  return ShapeSequence::create(static_cast<int>(results.size()), n, std::move(data));
}

std::vector<int> chosen_indices(const std::vector<FrameResult>& results) {
  std::vector<int> ids;
  ids.reserve(results.size());
  for (const auto& r : results) ids.push_back(r.index);
  return ids;
}

std::vector<CameraPose> chosen_poses(const std::vector<FrameResult>& results) {
  std::vector<CameraPose> poses;
  poses.reserve(results.size());
  for (const auto& r : results) poses.push_back(r.pose);
  return poses;
}

double CompressedStream::ratio() const {
  return static_cast<double>(frames) / static_cast<double>(dsp.size());
}

std::size_t CompressedStream::record_payload_bytes() const {
  return static_cast<std::size_t>(frames) * (12 + id_width);
}

CompressedStream compress(const MeasurementMatrix& w, const DynamicShapePrior& dsp,
                          const DsprConfig& config) {
  if (dsp.size() > 65535) throw IdWidthOverflow("compress: prior holds more than 65535 states");
  CompressedStream stream;
  stream.id_width = dsp.size() <= 255 ? 1 : 2;
  stream.frames = w.frames;
  stream.dsp = dsp;
  stream.records.reserve(w.frames);
  for (const FrameResult& fr : dspr_sequence(w, dsp, config)) {
    CompressedStream::Record rec;
    rec.state_id = static_cast<std::uint16_t>(fr.index);
    const Eigen::Vector3d aa = to_axis_angle(fr.pose);
    rec.axis_angle = {static_cast<float>(aa(0)), static_cast<float>(aa(1)),
                      static_cast<float>(aa(2))};
    stream.records.push_back(rec);
  }
  return stream;
}

ShapeSequence decompress(const CompressedStream& stream) {
  if (stream.dsp.size() == 0) throw CorruptStream("decompress: empty prior");
  if (static_cast<int>(stream.records.size()) != stream.frames)
    throw CorruptStream("decompress: record count differs from header");
  const int n = stream.dsp.points();
  Eigen::MatrixXd data(3 * stream.frames, n);
  for (int f = 0; f < stream.frames; ++f) {
    const auto& rec = stream.records[f];
    if (rec.state_id >= stream.dsp.size())
      throw CorruptStream("decompress: state id out of range");
    const Eigen::Vector3d aa(rec.axis_angle[0], rec.axis_angle[1], rec.axis_angle[2]);
    data.middleRows(3 * f, 3) = from_axis_angle(aa).matrix() * stream.dsp.states[rec.state_id];
  }
  return ShapeSequence::create(stream.frames, n, std::move(data));
}

}  // namespace nrsfm
