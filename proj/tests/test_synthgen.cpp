#include <doctest.h>

#include <cmath>

#include "nrsfm/geomcore.h"
#include "nrsfm/synthgen.h"
#include "support.h"

using namespace nrsfm;

TEST_CASE("interpolation hits the midpoint") {
  Rng rng(51);
  SceneConfig cfg;
  cfg.base_shapes = {testsupport::random_matrix(rng, 3, 5), testsupport::random_matrix(rng, 3, 5)};
  cfg.frames = 3;
  cfg.schedule = Schedule::Custom;
  cfg.custom_poses.assign(3, CameraPose::identity());
  const SyntheticScene scene = generate_scene(cfg);
  const Eigen::MatrixXd expected = 0.5 * (cfg.base_shapes[0] + cfg.base_shapes[1]);
  CHECK((scene.gt_shapes.frame(1) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(scene.gt_state_ids == std::vector<int>{0, 1, 1});

  cfg.base_shapes.push_back(testsupport::random_matrix(rng, 3, 4));  // mismatched N
  CHECK_THROWS_AS(generate_scene(cfg), InvalidInput);
}

TEST_CASE("schedules decouple shape and pose") {
  SceneConfig cfg;
  cfg.frames = 12;
  cfg.sheet.rows = 6;
  cfg.sheet.cols = 6;
  cfg.schedule = Schedule::A;
  const SyntheticScene a = generate_scene(cfg);
  cfg.schedule = Schedule::B;
  const SyntheticScene b = generate_scene(cfg);

  CHECK(a.gt_shapes.data == b.gt_shapes.data);
  CHECK(a.w_clean.data != b.w_clean.data);

  // Reprojection identity: w_clean is exactly the projected posed shape.
  for (int f = 0; f < cfg.frames; ++f) {
    const Eigen::MatrixXd reproj = orthographic_project(a.gt_poses[f], a.gt_shapes.frame(f));
    CHECK(Eigen::MatrixXd(a.w_clean.frame(f)) == reproj);
  }
}

TEST_CASE("generation is deterministic") {
  SceneConfig cfg;
  cfg.frames = 9;
  cfg.sheet.rows = 5;
  cfg.sheet.cols = 4;
  cfg.seed = 77;
  const SyntheticScene first = generate_scene(cfg);
  const SyntheticScene second = generate_scene(cfg);
  CHECK(first.gt_shapes.data == second.gt_shapes.data);
  CHECK(first.w_clean.data == second.w_clean.data);
}

TEST_CASE("sheet frames have distinct norms and centered coordinates") {
  SceneConfig cfg;
  cfg.frames = 40;
  const SyntheticScene scene = generate_scene(cfg);
  std::vector<double> norms;
  for (int f = 0; f < cfg.frames; ++f) {
    norms.push_back(scene.gt_shapes.frame(f).norm());
    CHECK(scene.gt_shapes.frame(f).rowwise().mean().norm() < 1e-9);
  }
  std::sort(norms.begin(), norms.end());
  for (size_t i = 1; i < norms.size(); ++i) CHECK(norms[i] - norms[i - 1] > 1e-6);
}

TEST_CASE("perturbation bounds and determinism") {
  SceneConfig cfg;
  cfg.frames = 10;
  cfg.sheet.rows = 5;
  cfg.sheet.cols = 5;
  const SyntheticScene scene = generate_scene(cfg);

  const MeasurementMatrix same = perturb_tracks(scene.w_clean, 0.0, 99);
  CHECK(same.data == scene.w_clean.data);

  const double magnitude = 2.5;
  const MeasurementMatrix noisy = perturb_tracks(scene.w_clean, magnitude, 99);
  const Eigen::MatrixXd delta = noisy.data - scene.w_clean.data;
  CHECK(delta.cwiseAbs().maxCoeff() <= magnitude);
  CHECK(perturb_tracks(scene.w_clean, magnitude, 99).data == noisy.data);
  CHECK(perturb_tracks(scene.w_clean, magnitude, 100).data != noisy.data);

  // Empirical mean within 3 sigma of zero for the uniform noise.
  const double count = static_cast<double>(delta.size());
  const double sigma_mean = magnitude / std::sqrt(3.0 * count);
  CHECK(std::abs(delta.mean()) < 3.0 * sigma_mean);

  CHECK_THROWS_AS(perturb_tracks(scene.w_clean, -1.0, 0), InvalidInput);
}

TEST_CASE("knockout counts and containment") {
  SceneConfig cfg;
  cfg.frames = 8;
  cfg.sheet.rows = 5;
  cfg.sheet.cols = 5;
  const SyntheticScene scene = generate_scene(cfg);
  const int total = cfg.frames * scene.w_clean.points;

  const KnockoutResult none = knockout_tracks(scene.w_clean, 0.0, KnockoutFill::FrozenReference, 3);
  CHECK(none.mask.empty());
  CHECK(none.tracks.data == scene.w_clean.data);

  const KnockoutResult all = knockout_tracks(scene.w_clean, 1.0, KnockoutFill::FrozenReference, 3);
  CHECK(static_cast<int>(all.mask.size()) == total);

  const double ratio = 0.37;
  const KnockoutResult some = knockout_tracks(scene.w_clean, ratio, KnockoutFill::Zeros, 3);
  CHECK(static_cast<int>(some.mask.size()) == std::llround(ratio * total));

  // Entries outside the mask are untouched; masked ones follow the policy.
  Eigen::MatrixXd expected = scene.w_clean.data;
  for (const auto& [f, n] : some.mask) {
    expected(2 * f, n) = 0.0;
    expected(2 * f + 1, n) = 0.0;
  }
  CHECK(some.tracks.data == expected);

  const KnockoutResult frozen =
      knockout_tracks(scene.w_clean, ratio, KnockoutFill::FrozenReference, 3);
  for (const auto& [f, n] : frozen.mask) {
    CHECK(frozen.tracks.data(2 * f, n) == scene.w_clean.data(0, n));
    CHECK(frozen.tracks.data(2 * f + 1, n) == scene.w_clean.data(1, n));
  }

  CHECK_THROWS_AS(knockout_tracks(scene.w_clean, 1.5, KnockoutFill::Zeros, 0), InvalidInput);
}
