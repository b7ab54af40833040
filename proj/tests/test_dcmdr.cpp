#include <doctest.h>

#include <cmath>

#include "nrsfm/dcmdr.h"
#include "nrsfm/evalkit.h"
#include "nrsfm/geomcore.h"
#include "nrsfm/synthgen.h"
#include "support.h"

using namespace nrsfm;

namespace {

struct Instance {
  MeasurementMatrix w;
  ShapeSequence s;
  std::vector<CameraPose> poses;
  TrajectoryCoefficients a;
  TrajectoryBasis basis;
  AdjacencyTable adj;
};

Instance random_instance(Rng& rng, int frames, int points, int rank, bool with_edges) {
  Instance inst{
      MeasurementMatrix::create(frames, points, testsupport::random_matrix(rng, 2 * frames, points)),
      ShapeSequence::create(frames, points, testsupport::random_matrix(rng, 3 * frames, points)),
      {},
      TrajectoryCoefficients{testsupport::random_matrix(rng, 3 * rank, points)},
      make_dct_basis(frames, rank),
      empty_adjacency(points)};
  for (int f = 0; f < frames; ++f) inst.poses.push_back(testsupport::random_rotation(rng));
  if (with_edges) {
    std::vector<std::pair<int, int>> edges;
    for (int n = 0; n + 1 < points; ++n) edges.emplace_back(n, n + 1);
    inst.adj = build_adjacency_edges(points, edges);
  }
  return inst;
}

// Central finite differences of one scalar functional over a matrix variable.
template <typename Fn>
Eigen::MatrixXd central_differences(Eigen::MatrixXd& x, Fn fn, double h) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double saved = x(r, c);
      x(r, c) = saved + h;
      const double above = fn();
      x(r, c) = saved - h;
      const double below = fn();
      x(r, c) = saved;
      grad(r, c) = (above - below) / (2.0 * h);
    }
  }
  return grad;
}

double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
}

}  // namespace

TEST_CASE("energy vanishes on a consistent configuration") {
  Rng rng(71);
  const int frames = 4;
  const int points = 6;
  // Constant-in-time shapes project exactly and are spanned by the constant
  // basis atom, so every term is zero when the spatial term has no edges.
  const Eigen::MatrixXd rest = testsupport::random_matrix(rng, 3, points, 2.0);
  ShapeSequence s{frames, points, Eigen::MatrixXd(3 * frames, points)};
  std::vector<CameraPose> poses;
  Eigen::MatrixXd w(2 * frames, points);
  for (int f = 0; f < frames; ++f) {
    poses.push_back(testsupport::random_rotation(rng));
    s.frame(f) = rest;
    w.middleRows(2 * f, 2) = orthographic_project(poses[f], rest);
  }
  const MeasurementMatrix tracks = MeasurementMatrix::create(frames, points, w);
  const TrajectoryBasis basis = make_dct_basis(frames, 2);
  TrajectoryCoefficients a{Eigen::MatrixXd::Zero(6, points)};
  for (int c = 0; c < 3; ++c) a.data.row(c) = std::sqrt(2.0) * rest.row(c);

  const DcmdrWeights weights;
  const DcmdrEnergy e =
      dcmdr_energy(tracks, s, poses, a, basis, empty_adjacency(points), weights);
  CHECK(e.fit < 1e-22);
  CHECK(e.temp == 0.0);
  CHECK(e.linking < 1e-22);
  CHECK(e.reg == 0.0);
  CHECK(e.total < 1e-21);

  // With one point there are no neighbor differences at all.
  const MeasurementMatrix w1 = MeasurementMatrix::create(frames, 1, w.leftCols(1));
  const ShapeSequence s1 = ShapeSequence::create(frames, 1, s.data.leftCols(1));
  const TrajectoryCoefficients a1{a.data.leftCols(1)};
  const DcmdrEnergy e1 = dcmdr_energy(w1, s1, poses, a1, basis, empty_adjacency(1), weights);
  CHECK(e1.reg == 0.0);
}

TEST_CASE("single-entry perturbation changes the fit term by its induced residual") {
  Rng rng(72);
  Instance inst = random_instance(rng, 3, 5, 2, false);
  // Make the fit exact, then bump one shape entry.
  for (int f = 0; f < 3; ++f)
    inst.w.frame(f) = orthographic_project(inst.poses[f], inst.s.frame(f));

  DcmdrWeights weights;
  weights.alpha = 1.0;
  weights.beta = 0.0;
  weights.lambda_link = 0.0;
  weights.rho = 0.0;
  const double before =
      dcmdr_energy(inst.w, inst.s, inst.poses, inst.a, inst.basis, inst.adj, weights).total;
  CHECK(before == 0.0);

  const double delta = 0.37;
  const int f = 1, coord = 2, n = 3;
  inst.s.data(3 * f + coord, n) += delta;
  const double after =
      dcmdr_energy(inst.w, inst.s, inst.poses, inst.a, inst.basis, inst.adj, weights).total;

  // The induced 2D residual is the projected coordinate column times delta.
  Eigen::MatrixXd residual = -delta * inst.poses[f].matrix().topRows<2>().col(coord);
  CHECK(after == doctest::Approx(huber_loss(residual, weights.huber_epsilon)).epsilon(1e-12));
}

TEST_CASE("energy is linear in the term weights") {
  Rng rng(73);
  const Instance inst = random_instance(rng, 4, 6, 3, true);
  DcmdrWeights weights;
  weights.alpha = 0.8;
  weights.beta = 0.3;
  weights.lambda_link = 1.7;
  weights.rho = 0.9;
  const double total =
      dcmdr_energy(inst.w, inst.s, inst.poses, inst.a, inst.basis, inst.adj, weights).total;
  DcmdrWeights doubled = weights;
  doubled.alpha *= 2.0;
  doubled.beta *= 2.0;
  doubled.lambda_link *= 2.0;
  doubled.rho *= 2.0;
  const double total2 =
      dcmdr_energy(inst.w, inst.s, inst.poses, inst.a, inst.basis, inst.adj, doubled).total;
  CHECK(total2 == doctest::Approx(2.0 * total).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(74);
  const DcmdrWeights weights;
  const double h = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    Instance inst = random_instance(rng, 3, 5, 2, true);
    const DcmdrGradients g = dcmdr_energy_gradients(inst.w, inst.s, inst.poses, inst.a,
                                                    inst.basis, inst.adj, weights);
    auto term = [&](auto pick) {
      return pick(
          dcmdr_energy(inst.w, inst.s, inst.poses, inst.a, inst.basis, inst.adj, weights));
    };

    auto fit = [&] { return term([](const DcmdrEnergy& e) { return e.fit; }); };
    auto temp = [&] { return term([](const DcmdrEnergy& e) { return e.temp; }); };
    auto link = [&] { return term([](const DcmdrEnergy& e) { return e.linking; }); };
    auto reg = [&] { return term([](const DcmdrEnergy& e) { return e.reg; }); };

    CHECK(relative_gap(g.fit_s, central_differences(inst.s.data, fit, h)) < 1e-4);
    CHECK(relative_gap(g.temp_s, central_differences(inst.s.data, temp, h)) < 1e-4);
    CHECK(relative_gap(g.link_s, central_differences(inst.s.data, link, h)) < 1e-4);
    CHECK(relative_gap(g.link_a, central_differences(inst.a.data, link, h)) < 1e-4);
    CHECK(relative_gap(g.reg_a, central_differences(inst.a.data, reg, h)) < 1e-4);
  }
}

TEST_CASE("reconstruction of a rigid scene") {
  Rng rng(75);
  const int frames = 10;
  const int points = 20;
  const Eigen::MatrixXd rest = testsupport::random_matrix(rng, 3, points, 1.5);
  Eigen::MatrixXd centered = rest;
  centered.colwise() -= Eigen::Vector3d(rest.rowwise().mean());

  Eigen::MatrixXd w(2 * frames, points);
  ShapeSequence gt{frames, points, Eigen::MatrixXd(3 * frames, points)};
  std::vector<CameraPose> poses;
  for (int f = 0; f < frames; ++f) {
    poses.push_back(testsupport::random_rotation(rng));
    w.middleRows(2 * f, 2) = orthographic_project(poses[f], centered);
    gt.frame(f) = poses[f].matrix() * centered;
  }
  const MeasurementMatrix tracks = MeasurementMatrix::create(frames, points, w);

  DcmdrConfig config;
  config.rank = 1;  // constant trajectories suffice for a rigid scene
  config.max_iterations = 30;
  const DcmdrResult result = dcmdr_reconstruct(tracks, config, empty_adjacency(points));

  ShapeSequence posed = result.shapes;
  for (int f = 0; f < frames; ++f)
    posed.frame(f) = result.poses[f].matrix() * result.shapes.frame(f);
  CHECK(rmse_3d(gt, posed, true) < 1e-3);

  for (size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i] <= result.trace[i - 1] + 1e-12);
}

TEST_CASE("zero iteration budget returns the rigid initialization") {
  SceneConfig scene_cfg;
  scene_cfg.frames = 8;
  scene_cfg.sheet.rows = 5;
  scene_cfg.sheet.cols = 5;
  const SyntheticScene scene = generate_scene(scene_cfg);

  DcmdrConfig config;
  config.rank = 3;
  config.max_iterations = 0;
  const DcmdrResult result =
      dcmdr_reconstruct(scene.w_clean, config, build_adjacency_grid(5, 5));
  const RigidInitResult init = rigid_factorize(scene.w_clean);

  REQUIRE(result.trace.size() == 1);
  for (int f = 0; f < scene_cfg.frames; ++f) {
    CHECK(Eigen::MatrixXd(result.shapes.frame(f)) == init.rest_shape);
    CHECK(result.poses[f].matrix() == init.poses[f].matrix());
  }
}

TEST_CASE("strong linking ties shapes to the trajectory subspace") {
  SceneConfig scene_cfg;
  scene_cfg.frames = 12;
  scene_cfg.sheet.rows = 6;
  scene_cfg.sheet.cols = 6;
  const SyntheticScene scene = generate_scene(scene_cfg);

  DcmdrConfig config;
  config.rank = 4;
  config.max_iterations = 25;
  config.weights.lambda_link = 1e6;
  const DcmdrResult result =
      dcmdr_reconstruct(scene.w_clean, config, build_adjacency_grid(6, 6));

  // Reconstruct (Theta (x) I3) A and compare with S.
  Eigen::MatrixXd fitted(3 * scene_cfg.frames, scene.w_clean.points);
  const TrajectoryBasis basis = make_dct_basis(scene_cfg.frames, config.rank);
  for (int f = 0; f < scene_cfg.frames; ++f)
    for (int c = 0; c < 3; ++c) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(scene.w_clean.points);
      for (int k = 0; k < config.rank; ++k)
        row += basis.theta(f, k) * result.coefficients.data.row(3 * k + c);
      fitted.row(3 * f + c) = row;
    }
  CHECK((result.shapes.data - fitted).norm() / result.shapes.data.norm() < 1e-3);
}

TEST_CASE("deforming sheet is recovered") {
  SceneConfig scene_cfg;
  scene_cfg.frames = 20;
  scene_cfg.sheet.rows = 10;
  scene_cfg.sheet.cols = 10;
  const SyntheticScene scene = generate_scene(scene_cfg);

  DcmdrConfig config;
  config.rank = 5;
  const DcmdrResult result =
      dcmdr_reconstruct(scene.w_clean, config, build_adjacency_grid(10, 10));

  ShapeSequence posed = result.shapes;
  for (int f = 0; f < scene_cfg.frames; ++f)
    posed.frame(f) = result.poses[f].matrix() * result.shapes.frame(f);
  const double e3d = rmse_3d(scene.posed_shapes(), posed, true);
  CHECK(e3d < 0.05);
  for (size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i] <= result.trace[i - 1] + 1e-12);
}
