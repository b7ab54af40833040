#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nrsfm/types.h"

namespace nrsfm {

/// Seeded generator with explicit output mapping, so that results do not
/// depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next();
  double uniform01();                        // [0, 1)
  double uniform(double lo, double hi);
  std::uint64_t bounded(std::uint64_t n);    // [0, n)
  double gaussian();                         // Box-Muller

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class Schedule { A, B, Custom };

struct SheetConfig {
  int rows = 20;
  int cols = 20;
  double extent = 200.0;    // grid spans [-extent/2, extent/2] in x and y
  double amplitude = 60.0;  // peak of the relief modes
};

struct SceneConfig {
  std::vector<Eigen::MatrixXd> base_shapes;  // interpolation mode when nonempty
  SheetConfig sheet;                         // used when base_shapes is empty
  int frames = 30;
  Schedule schedule = Schedule::A;
  std::vector<CameraPose> custom_poses;      // required for Schedule::Custom
  std::uint64_t seed = 0;
};

struct SyntheticScene {
  ShapeSequence gt_shapes;           // canonical (unposed) per-frame shapes
  std::vector<CameraPose> gt_poses;
  std::vector<int> gt_state_ids;     // nearest base-shape timeline index
  MeasurementMatrix w_clean;
  std::uint64_t seed = 0;

  /// Per-frame shapes with the ground-truth pose applied, as they would be
  /// seen from the camera; this is the reconstruction target.
  ShapeSequence posed_shapes() const;
};

/// Interpolates base shapes along the timeline (or evaluates the built-in
/// deforming sheet), applies the rotation schedule, and projects. The clean
/// measurements satisfy w = orthographic_project(pose_f, shape_f) exactly.
SyntheticScene generate_scene(const SceneConfig& config);

/// Pose of frame f under a built-in schedule. Schedule A is a smooth yaw
/// sweep of +-30 degrees; schedule B combines yaw and pitch oscillations.
CameraPose schedule_pose(Schedule schedule, int frame, int frames);

/// Adds independent uniform noise in [-magnitude, magnitude] to every entry.
MeasurementMatrix perturb_tracks(const MeasurementMatrix& w, double magnitude,
                                 std::uint64_t seed);

enum class KnockoutFill { FrozenReference, Zeros };

struct KnockoutResult {
  MeasurementMatrix tracks;
  std::vector<std::pair<int, int>> mask;  // altered (frame, point) pairs, sorted
};

/// Replaces round(ratio * F * N) point-frame pairs, chosen uniformly without
/// replacement, with the fill policy's value. The mask exists only for
/// evaluation; solvers never see it.
KnockoutResult knockout_tracks(const MeasurementMatrix& w, double ratio, KnockoutFill fill,
                               std::uint64_t seed);

}  // namespace nrsfm
