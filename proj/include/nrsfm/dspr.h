#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nrsfm/dspbuild.h"
#include "nrsfm/types.h"

namespace nrsfm {

/// Weights of the per-frame energy: data term (alpha), temporal smoothness
/// (beta) and the prior-indicator regularizer (gamma). The indicator is
/// realized as a single discrete index, so the gamma term never activates.
struct DsprWeights {
  double alpha = 1.0;
  double beta = 0.01;
  double gamma = 1.0;
};

/// One-hot realization of the prior indicator: exactly one active state.
class DspIndicator {
 public:
  DspIndicator(int index, int cardinality);
  int index() const { return index_; }
  /// gamma * (|lambda|_0 - 1)^2 with |lambda|_0 = 1 by construction.
  static constexpr double gamma_term() { return 0.0; }

 private:
  int index_;
};

struct DsprConfig {
  DsprWeights weights;
  int seeds = 20;            // clamped to the prior cardinality per frame
  int max_alternations = 50;
  double rel_tol = 1e-8;
};

struct SeedOutcome {
  int start = 0;
  int index = 0;
  double energy = 0.0;
};

struct MsgdResult {
  int index = 0;
  double energy = 0.0;
  std::vector<SeedOutcome> seed_trace;
};

struct FrameResult {
  int index = 0;
  CameraPose pose = CameraPose::identity();
  Eigen::MatrixXd shape;  // 3 x N, pose applied to the selected state
  double energy = 0.0;
  int iterations = 0;
  bool low_confidence = false;
  double millis = 0.0;
  std::vector<double> energy_trace;     // energy after every alternation
  std::vector<SeedOutcome> seed_trace;  // from the final alternation
};

/// alpha |W_f - I_{2x3} R_f D|_F + beta |D - S_prev|_F; the indicator term is
/// identically zero for a one-hot indicator.
double dspr_energy(const Eigen::MatrixXd& w_f, const Eigen::MatrixXd& state,
                   const CameraPose& pose, const Eigen::MatrixXd& s_prev,
                   const DsprWeights& weights);

/// Closed-form pose update: unconstrained least squares for the 2x3 affine
/// camera, completed by the cross product of its rows and projected to SO(3).
/// Throws DegenerateGeometry for collinear or rank-deficient states.
CameraPose update_pose(const Eigen::MatrixXd& w_f, const Eigen::MatrixXd& state);

/// Multi-start discrete descent over the norm-ordered prior. Seeds are placed
/// at round(j (Q-1)/(seeds-1)); each descends to the strictly lower neighbor
/// until a local minimum or a range boundary. `warm_start` (if >= 0) adds one
/// extra seed, which makes alternation traces non-increasing.
MsgdResult msgd_select(const Eigen::MatrixXd& w_f, const CameraPose& pose,
                       const DynamicShapePrior& dsp, const Eigen::MatrixXd& s_prev,
                       const DsprWeights& weights, int seeds, int warm_start = -1);

/// One frame: alternate msgd_select (pose fixed) and update_pose (state
/// fixed) until the relative energy decrease drops below rel_tol.
FrameResult dspr_frame(const Eigen::MatrixXd& w_f, const DynamicShapePrior& dsp,
                       const Eigen::MatrixXd& s_prev, const CameraPose& pose_init,
                       const DsprConfig& config);

/// Streams frames in order; s_prev for frame f is the canonical state chosen
/// at frame f-1 (for the first frame, the state closest in energy under the
/// identity pose with beta = 0).
std::vector<FrameResult> dspr_sequence(const MeasurementMatrix& w,
                                       const DynamicShapePrior& dsp,
                                       const DsprConfig& config);

ShapeSequence to_shape_sequence(const std::vector<FrameResult>& results);
std::vector<int> chosen_indices(const std::vector<FrameResult>& results);
std::vector<CameraPose> chosen_poses(const std::vector<FrameResult>& results);

/// Sequential reconstruction serialized as one prior plus per-frame
/// (state id, float32 axis-angle pose) records.
struct CompressedStream {
  struct Record {
    std::uint16_t state_id = 0;
    std::array<float, 3> axis_angle = {0.0f, 0.0f, 0.0f};
  };

  int id_width = 1;  // 1 byte iff Q <= 255, else 2
  int frames = 0;
  DynamicShapePrior dsp;
  std::vector<Record> records;

  double ratio() const;  // F / Q
  std::size_t record_payload_bytes() const;  // F * (12 + id_width)
};

/// Runs dspr_sequence and packs the result. Throws IdWidthOverflow when the
/// prior holds more than 65535 states.
CompressedStream compress(const MeasurementMatrix& w, const DynamicShapePrior& dsp,
                          const DsprConfig& config);

/// Inverse of the storage scheme: frame f = R(axis_angle_f) * states[id_f].
/// Exact up to the float32 quantization of the poses.
ShapeSequence decompress(const CompressedStream& stream);

}  // namespace nrsfm
