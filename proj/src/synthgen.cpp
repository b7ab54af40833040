#include "nrsfm/synthgen.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Geometry>

#include "nrsfm/geomcore.h"

namespace nrsfm {

std::uint64_t Rng::next() {
  // splitmix64; fixed here so streams are stable across platforms.
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t Rng::bounded(std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  do {
    u = uniform01();
  } while (u <= 0.0);
  const double v = uniform01();
  const double mag = std::sqrt(-2.0 * std::log(u));
  spare_ = mag * std::sin(2.0 * M_PI * v);
  has_spare_ = true;
  return mag * std::cos(2.0 * M_PI * v);
}

CameraPose schedule_pose(Schedule schedule, int frame, int frames) {
  const double t = static_cast<double>(frame) / std::max(frames, 1);
  const double deg = M_PI / 180.0;
  // Phase offsets keep the first view away from the degenerate frontal pose,
  // where a purely depth-changing deformation projects identically.
  Eigen::Matrix3d r;
  switch (schedule) {
    case Schedule::A: {
      const double yaw = 30.0 * deg * std::sin(2.0 * M_PI * t + 0.5);
      r = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
      break;
    }
    case Schedule::B: {
      const double yaw = 25.0 * deg * std::sin(4.0 * M_PI * t + 0.4);
      const double pitch = 20.0 * deg * std::sin(2.0 * M_PI * t + 1.1);
      r = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
           Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
              .toRotationMatrix();
      break;
    }
    default:
      throw InvalidInput("schedule_pose: custom schedule has no built-in poses");
  }
  return CameraPose::from_matrix(r);
}

namespace {

// Bending sheet: a grid deformed by two spatial modes (a dome and a saddle)
// whose temporal profiles are exact combinations of the first three DCT
// atoms, so the motion lives in a rank-3 trajectory space. Each mode also
// displaces points laterally, as a stretching membrane does; depth-only
// deformation would make different states project identically under a
// frontal view. Mode patterns are orthogonal to the grid coordinates and to
// each other, and both profiles are positive and strictly monotone, which
// keeps per-frame Frobenius norms distinct. Frames are centered.
Eigen::MatrixXd sheet_frame(const SheetConfig& sheet, int frame, int frames) {
  const int n = sheet.rows * sheet.cols;
  Eigen::MatrixXd shape(3, n);
  const double t = 2 * frame + 1;  // DCT sampling point for 1-based frame index
  const double c2 = std::cos(M_PI * t * 1.0 / (2.0 * frames));
  const double c3 = std::cos(M_PI * t * 2.0 / (2.0 * frames));
  const double dome_profile = 0.9 + 0.5 * c2 + 0.1 * c3;
  const double saddle_profile = 0.25 + 0.18 * c2 + 0.03 * c3;

  int idx = 0;
  for (int r = 0; r < sheet.rows; ++r) {
    for (int c = 0; c < sheet.cols; ++c, ++idx) {
      const double x =
          sheet.rows > 1 ? sheet.extent * (static_cast<double>(r) / (sheet.rows - 1) - 0.5)
                         : 0.0;
      const double y =
          sheet.cols > 1 ? sheet.extent * (static_cast<double>(c) / (sheet.cols - 1) - 0.5)
                         : 0.0;
      const double u = x / sheet.extent + 0.5;
      const double v = y / sheet.extent + 0.5;
      const double dome = std::sin(M_PI * u) * std::sin(M_PI * v);
      const double saddle = std::sin(2.0 * M_PI * u) * std::sin(2.0 * M_PI * v);
      const double d1 = sheet.amplitude * dome * dome_profile;
      const double d2 = sheet.amplitude * saddle * saddle_profile;
      shape(0, idx) = x + 0.20 * d1 + 0.15 * d2;
      shape(1, idx) = y + 0.20 * d1 - 0.15 * d2;
      shape(2, idx) = d1 + d2;
    }
  }
  shape.colwise() -= Eigen::Vector3d(shape.rowwise().mean());
  return shape;
}

}  // namespace

SyntheticScene generate_scene(const SceneConfig& config) {
  if (config.frames < 1) throw InvalidInput("generate_scene: need at least one frame");
  const bool interpolated = !config.base_shapes.empty();
  int n_points = 0;
  if (interpolated) {
    if (config.base_shapes.size() < 2)
      throw InvalidInput("generate_scene: need at least two base shapes");
    n_points = static_cast<int>(config.base_shapes[0].cols());
    for (const auto& base : config.base_shapes)
      if (base.rows() != 3 || base.cols() != n_points)
        throw InvalidInput("generate_scene: base shapes must all be 3 x N");
  } else {
    if (config.sheet.rows < 2 || config.sheet.cols < 2)
      throw InvalidInput("generate_scene: sheet grid must be at least 2 x 2");
    n_points = config.sheet.rows * config.sheet.cols;
  }
  if (config.schedule == Schedule::Custom &&
      static_cast<int>(config.custom_poses.size()) != config.frames)
    throw InvalidInput("generate_scene: custom schedule needs one pose per frame");

  SyntheticScene scene;
  scene.seed = config.seed;
  scene.gt_shapes.frames = config.frames;
  scene.gt_shapes.points = n_points;
  scene.gt_shapes.data.resize(3 * config.frames, n_points);
  scene.w_clean.frames = config.frames;
  scene.w_clean.points = n_points;
  scene.w_clean.data.resize(2 * config.frames, n_points);
  scene.gt_poses.reserve(config.frames);
  scene.gt_state_ids.reserve(config.frames);

  const int n_bases = static_cast<int>(config.base_shapes.size());
  for (int f = 0; f < config.frames; ++f) {
    Eigen::MatrixXd shape;
    if (interpolated) {
      const double pos = config.frames > 1
                             ? static_cast<double>(f) * (n_bases - 1) / (config.frames - 1)
                             : 0.0;
      const int i0 = std::min(static_cast<int>(std::floor(pos)), n_bases - 2);
      const double t = pos - i0;
      shape = (1.0 - t) * config.base_shapes[i0] + t * config.base_shapes[i0 + 1];
      scene.gt_state_ids.push_back(static_cast<int>(std::lround(pos)));
    } else {
      shape = sheet_frame(config.sheet, f, config.frames);
      scene.gt_state_ids.push_back(f);
    }
    CameraPose pose = config.schedule == Schedule::Custom
                          ? config.custom_poses[f]
                          : schedule_pose(config.schedule, f, config.frames);
    scene.w_clean.frame(f) = orthographic_project(pose, shape);
    scene.gt_shapes.frame(f) = shape;
    scene.gt_poses.push_back(pose);
  }
  return scene;
}

ShapeSequence SyntheticScene::posed_shapes() const {
  ShapeSequence posed = gt_shapes;
  for (int f = 0; f < gt_shapes.frames; ++f)
    posed.frame(f) = gt_poses[f].matrix() * gt_shapes.frame(f);
  return posed;
}

MeasurementMatrix perturb_tracks(const MeasurementMatrix& w, double magnitude,
                                 std::uint64_t seed) {
  if (magnitude < 0.0) throw InvalidInput("perturb_tracks: magnitude must be >= 0");
  MeasurementMatrix out = w;
  if (magnitude == 0.0) return out;
  Rng rng(seed);
  double* p = out.data.data();
  for (Eigen::Index i = 0; i < out.data.size(); ++i)
    p[i] += rng.uniform(-magnitude, magnitude);
  return out;
}

KnockoutResult knockout_tracks(const MeasurementMatrix& w, double ratio, KnockoutFill fill,
                               std::uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw InvalidInput("knockout_tracks: ratio must be in [0, 1]");
  const std::int64_t total = static_cast<std::int64_t>(w.frames) * w.points;
  const std::int64_t count = std::llround(ratio * static_cast<double>(total));

  // Partial Fisher-Yates over all (frame, point) pairs.
  std::vector<std::int64_t> pairs(total);
  std::iota(pairs.begin(), pairs.end(), 0);
  Rng rng(seed);
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(total - i)));
    std::swap(pairs[i], pairs[j]);
  }

  KnockoutResult result;
  result.tracks = w;
  result.mask.reserve(count);
  for (std::int64_t i = 0; i < count; ++i) {
    const int f = static_cast<int>(pairs[i] / w.points);
    const int n = static_cast<int>(pairs[i] % w.points);
    result.mask.emplace_back(f, n);
  }
  std::sort(result.mask.begin(), result.mask.end());
  for (const auto& [f, n] : result.mask) {
    if (fill == KnockoutFill::FrozenReference) {
      // A stuck tracker keeps reporting the point's first-frame position.
      result.tracks.data(2 * f, n) = w.data(0, n);
      result.tracks.data(2 * f + 1, n) = w.data(1, n);
    } else {
      result.tracks.data(2 * f, n) = 0.0;
      result.tracks.data(2 * f + 1, n) = 0.0;
    }
  }
  return result;
}

}  // namespace nrsfm
