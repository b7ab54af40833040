#include "nrsfm/dcmdr.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "nrsfm/dspr.h"
#include "nrsfm/geomcore.h"

namespace nrsfm {

namespace {

double huber_value(double r, double eps) {
  const double a = std::abs(r);
  return (a <= eps) ? 0.5 * r * r : eps * (a - 0.5 * eps);
}

double huber_slope(double r, double eps) { return std::clamp(r, -eps, eps); }

// Majorizer weight: quadratic with this factor touches the Huber loss at r.
double huber_weight(double r, double eps) {
  const double a = std::abs(r);
  return (a <= eps) ? 1.0 : eps / a;
}

struct Residuals {
  Eigen::MatrixXd fit;   // 2F x N
  Eigen::MatrixXd temp;  // 3(F-1) x N (empty when F == 1)
  Eigen::MatrixXd link;  // 3F x N
  Eigen::MatrixXd reg;   // 3K x E (one column per undirected edge)
};

void check_dimensions(const MeasurementMatrix& w, const ShapeSequence& s,
                      const std::vector<CameraPose>& poses, const TrajectoryCoefficients& a,
                      const TrajectoryBasis& basis, const AdjacencyTable& adj) {
  if (s.frames != w.frames || s.points != w.points)
    throw InvalidInput("dcmdr: shape stack does not match measurements");
  if (static_cast<int>(poses.size()) != w.frames)
    throw InvalidInput("dcmdr: pose count does not match frame count");
  if (basis.frames != w.frames) throw InvalidInput("dcmdr: basis frame count mismatch");
  if (a.data.rows() != 3 * basis.rank || a.data.cols() != w.points)
    throw InvalidInput("dcmdr: coefficient matrix must be 3K x N");
  if (adj.size() != w.points) throw InvalidInput("dcmdr: adjacency does not cover all points");
}

Residuals compute_residuals(const MeasurementMatrix& w, const ShapeSequence& s,
                            const std::vector<CameraPose>& poses,
                            const TrajectoryCoefficients& a, const TrajectoryBasis& basis,
                            const std::vector<std::pair<int, int>>& edges) {
  const int f_count = w.frames;
  const int n_count = w.points;
  const int k_count = basis.rank;

  Residuals r;
  r.fit.resize(2 * f_count, n_count);
  for (int f = 0; f < f_count; ++f)
    r.fit.middleRows(2 * f, 2) =
        w.frame(f) - poses[f].matrix().topRows<2>() * s.frame(f);

  r.temp.resize(3 * (f_count - 1), n_count);
  for (int f = 1; f < f_count; ++f)
    r.temp.middleRows(3 * (f - 1), 3) = s.frame(f) - s.frame(f - 1);

  // The Kronecker structure decouples the x/y/z channels: channel c of the
  // linking residual is S_c - Theta * A_c.
  r.link.resize(3 * f_count, n_count);
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd s_channel(f_count, n_count);
    for (int f = 0; f < f_count; ++f) s_channel.row(f) = s.data.row(3 * f + c);
    Eigen::MatrixXd a_channel(k_count, n_count);
    for (int k = 0; k < k_count; ++k) a_channel.row(k) = a.data.row(3 * k + c);
    Eigen::MatrixXd res = s_channel - basis.theta * a_channel;
    for (int f = 0; f < f_count; ++f) r.link.row(3 * f + c) = res.row(f);
  }

  r.reg.resize(3 * k_count, static_cast<Eigen::Index>(edges.size()));
  for (size_t e = 0; e < edges.size(); ++e)
    r.reg.col(e) = a.data.col(edges[e].first) - a.data.col(edges[e].second);
  return r;
}

}  // namespace

int default_rank(int frames) {
  const int k = static_cast<int>(std::ceil(0.1 * frames));
  return std::max(1, std::min(k, 32));
}

DcmdrEnergy dcmdr_energy(const MeasurementMatrix& w, const ShapeSequence& s,
                         const std::vector<CameraPose>& poses,
                         const TrajectoryCoefficients& a, const TrajectoryBasis& basis,
                         const AdjacencyTable& adj, const DcmdrWeights& weights) {
  check_dimensions(w, s, poses, a, basis, adj);
  const double eps = weights.huber_epsilon;
  if (!(eps > 0.0)) throw InvalidInput("dcmdr_energy: huber_epsilon must be positive");
  const Residuals r = compute_residuals(w, s, poses, a, basis, adj.edges());

  DcmdrEnergy e;
  e.fit = huber_loss(r.fit, eps);
  e.temp = r.temp.size() > 0 ? huber_loss(r.temp, eps) : 0.0;
  e.linking = huber_loss(r.link, eps);
  e.reg = r.reg.size() > 0 ? huber_loss(r.reg, eps) : 0.0;
  e.total = weights.alpha * e.fit + weights.beta * e.temp + weights.lambda_link * e.linking +
            weights.rho * e.reg;
  return e;
}

DcmdrGradients dcmdr_energy_gradients(const MeasurementMatrix& w, const ShapeSequence& s,
                                      const std::vector<CameraPose>& poses,
                                      const TrajectoryCoefficients& a,
                                      const TrajectoryBasis& basis, const AdjacencyTable& adj,
                                      const DcmdrWeights& weights) {
  check_dimensions(w, s, poses, a, basis, adj);
  const double eps = weights.huber_epsilon;
  const int f_count = w.frames;
  const int n_count = w.points;
  const int k_count = basis.rank;
  const auto edges = adj.edges();
  const Residuals r = compute_residuals(w, s, poses, a, basis, edges);

  DcmdrGradients g;
  g.fit_s = Eigen::MatrixXd::Zero(3 * f_count, n_count);
  g.temp_s = Eigen::MatrixXd::Zero(3 * f_count, n_count);
  g.link_s = Eigen::MatrixXd::Zero(3 * f_count, n_count);
  g.link_a = Eigen::MatrixXd::Zero(3 * k_count, n_count);
  g.reg_a = Eigen::MatrixXd::Zero(3 * k_count, n_count);

  for (int f = 0; f < f_count; ++f) {
    Eigen::MatrixXd psi = r.fit.middleRows(2 * f, 2).unaryExpr(
        [eps](double v) { return huber_slope(v, eps); });
    g.fit_s.middleRows(3 * f, 3) = -poses[f].matrix().topRows<2>().transpose() * psi;
  }

  for (int f = 1; f < f_count; ++f) {
    Eigen::MatrixXd psi = r.temp.middleRows(3 * (f - 1), 3)
                              .unaryExpr([eps](double v) { return huber_slope(v, eps); });
    g.temp_s.middleRows(3 * f, 3) += psi;
    g.temp_s.middleRows(3 * (f - 1), 3) -= psi;
  }

  Eigen::MatrixXd link_psi =
      r.link.unaryExpr([eps](double v) { return huber_slope(v, eps); });
  g.link_s = link_psi;
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd psi_channel(f_count, n_count);
    for (int f = 0; f < f_count; ++f) psi_channel.row(f) = link_psi.row(3 * f + c);
    Eigen::MatrixXd grad = -basis.theta.transpose() * psi_channel;  // K x N
    for (int k = 0; k < k_count; ++k) g.link_a.row(3 * k + c) = grad.row(k);
  }

  for (size_t e = 0; e < edges.size(); ++e) {
    Eigen::VectorXd psi =
        r.reg.col(e).unaryExpr([eps](double v) { return huber_slope(v, eps); });
    g.reg_a.col(edges[e].first) += psi;
    g.reg_a.col(edges[e].second) -= psi;
  }
  return g;
}

namespace {

class DcmdrSolver {
 public:
  DcmdrSolver(const MeasurementMatrix& w, const DcmdrConfig& config, const AdjacencyTable& adj)
      : w_(w), config_(config), adj_(adj), edges_(adj.edges()) {
    if (config.rel_tol < 0.0) throw InvalidInput("dcmdr_reconstruct: rel_tol must be >= 0");
    if (config.max_iterations < 0)
      throw InvalidInput("dcmdr_reconstruct: max_iterations must be >= 0");
    if (adj.size() != w.points)
      throw InvalidInput("dcmdr_reconstruct: adjacency does not cover all points");
    rank_ = config.rank > 0 ? config.rank : default_rank(w.frames);
    if (rank_ > w.frames) throw InvalidInput("dcmdr_reconstruct: K must not exceed F");

    // Incident edges per point: (edge id, neighbor).
    incident_.assign(w.points, {});
    for (size_t e = 0; e < edges_.size(); ++e) {
      incident_[edges_[e].first].push_back({static_cast<int>(e), edges_[e].second});
      incident_[edges_[e].second].push_back({static_cast<int>(e), edges_[e].first});
    }
  }

  DcmdrResult run() {
    const int f_count = w_.frames;
    const int n_count = w_.points;

    const RigidInitResult init = rigid_factorize(w_);
    Eigen::MatrixXd centered_data = w_.data;
    for (int f = 0; f < f_count; ++f)
      centered_data.middleRows(2 * f, 2).colwise() -= init.translations[f];
    centered_ = MeasurementMatrix::create(f_count, n_count, std::move(centered_data));

    basis_ = make_dct_basis(f_count, rank_);
    poses_ = init.poses;
    shapes_.frames = f_count;
    shapes_.points = n_count;
    shapes_.data.resize(3 * f_count, n_count);
    for (int f = 0; f < f_count; ++f) shapes_.frame(f) = init.rest_shape;

    // A := least-squares projection of the initial shapes onto the basis;
    // Theta^T Theta = (F/2) I makes the normal equations explicit.
    coeffs_.data.resize(3 * rank_, n_count);
    project_coefficients();

    DcmdrResult result;
    result.centroids = init.translations;
    double energy = total_energy();
    if (!std::isfinite(energy)) throw NumericalFailure("dcmdr_reconstruct: non-finite energy");
    result.trace.push_back(energy);

    double damping = 1e-3;
    for (int iter = 0; iter < config_.max_iterations; ++iter) {
      update_poses();
      const double after_poses = total_energy();

      // One majorize-minimize step: freeze Huber weights, then descend the
      // weighted quadratic with backtracked diagonal damping.
      Weights weights = compute_weights();
      bool accepted = false;
      double new_energy = after_poses;
      for (int attempt = 0; attempt < 8; ++attempt) {
        ShapeSequence s_candidate = shapes_;
        TrajectoryCoefficients a_candidate = coeffs_;
        sweep(weights, damping, s_candidate, a_candidate);
        const double candidate_energy = total_energy_of(s_candidate, a_candidate);
        if (!std::isfinite(candidate_energy))
          throw NumericalFailure("dcmdr_reconstruct: non-finite energy");
        if (candidate_energy <= after_poses) {
          shapes_ = std::move(s_candidate);
          coeffs_ = std::move(a_candidate);
          new_energy = candidate_energy;
          damping = std::max(damping / 2.0, 1e-12);
          accepted = true;
          break;
        }
        damping = std::min(damping * 10.0, 1e12);
      }

      const double previous = result.trace.back();
      result.trace.push_back(new_energy);
      if (!accepted) break;  // stalled even with strong damping
      if (previous - new_energy < config_.rel_tol * std::max(previous, 1e-30)) break;
    }

    result.shapes = std::move(shapes_);
    result.poses = std::move(poses_);
    result.coefficients = std::move(coeffs_);
    return result;
  }

 private:
  struct Weights {
    Eigen::MatrixXd fit;   // 2F x N
    Eigen::MatrixXd temp;  // 3(F-1) x N
    Eigen::MatrixXd link;  // 3F x N
    Eigen::MatrixXd reg;   // 3K x E
  };

  void project_coefficients() {
    const double scale = 2.0 / w_.frames;
    for (int c = 0; c < 3; ++c) {
      Eigen::MatrixXd s_channel(w_.frames, w_.points);
      for (int f = 0; f < w_.frames; ++f) s_channel.row(f) = shapes_.data.row(3 * f + c);
      Eigen::MatrixXd a_channel = scale * (basis_.theta.transpose() * s_channel);
      for (int k = 0; k < rank_; ++k) coeffs_.data.row(3 * k + c) = a_channel.row(k);
    }
  }

  double total_energy() const { return total_energy_of(shapes_, coeffs_); }

  double total_energy_of(const ShapeSequence& s, const TrajectoryCoefficients& a) const {
    return dcmdr_energy(centered_, s, poses_, a, basis_, adj_, config_.weights).total;
  }

  // Per-frame closed-form update, kept only when it does not increase the
  // frame's fit term (keeps the outer trace monotone).
  void update_poses() {
    const double eps = config_.weights.huber_epsilon;
    for (int f = 0; f < w_.frames; ++f) {
      CameraPose candidate = CameraPose::identity();
      try {
        candidate = update_pose(centered_.frame(f), shapes_.frame(f));
      } catch (const DegenerateGeometry&) {
        continue;
      }
      const Eigen::MatrixXd before =
          centered_.frame(f) - poses_[f].matrix().topRows<2>() * shapes_.frame(f);
      const Eigen::MatrixXd after =
          centered_.frame(f) - candidate.matrix().topRows<2>() * shapes_.frame(f);
      if (huber_loss(after, eps) <= huber_loss(before, eps)) poses_[f] = candidate;
    }
  }

  Weights compute_weights() const {
    const double eps = config_.weights.huber_epsilon;
    const Residuals r = compute_residuals(centered_, shapes_, poses_, coeffs_, basis_, edges_);
    auto to_weight = [eps](double v) { return huber_weight(v, eps); };
    Weights weights;
    weights.fit = r.fit.unaryExpr(to_weight);
    weights.temp = r.temp.unaryExpr(to_weight);
    weights.link = r.link.unaryExpr(to_weight);
    weights.reg = r.reg.unaryExpr(to_weight);
    return weights;
  }

  // Block-Jacobi sweeps: every point solves its damped normal equations over
  // (s_n, a_n) with neighbor coefficients frozen at the previous sweep.
  void sweep(const Weights& weights, double damping, ShapeSequence& s,
             TrajectoryCoefficients& a) const {
    const int f_count = w_.frames;
    const int n_count = w_.points;
    const int dim = 3 * f_count + 3 * rank_;
    const DcmdrWeights& tw = config_.weights;

    Eigen::MatrixXd h(dim, dim);
    Eigen::VectorXd b(dim);

    for (int pass = 0; pass < config_.reg_sweeps; ++pass) {
      const Eigen::MatrixXd a_previous = a.data;
      for (int n = 0; n < n_count; ++n) {
        h.setZero();
        b.setZero();

        for (int f = 0; f < f_count; ++f) {
          const Eigen::Matrix<double, 2, 3> p = poses_[f].matrix().topRows<2>();
          const Eigen::Vector2d res =
              centered_.data.block<2, 1>(2 * f, n) - p * s.data.block<3, 1>(3 * f, n);
          for (int row = 0; row < 2; ++row) {
            const double wt = tw.alpha * weights.fit(2 * f + row, n);
            if (wt == 0.0) continue;
            for (int i = 0; i < 3; ++i) {
              b(3 * f + i) += wt * res(row) * p(row, i);
              for (int j = 0; j < 3; ++j) h(3 * f + i, 3 * f + j) += wt * p(row, i) * p(row, j);
            }
          }
        }

        for (int f = 1; f < f_count; ++f) {
          for (int c = 0; c < 3; ++c) {
            const double wt = tw.beta * weights.temp(3 * (f - 1) + c, n);
            if (wt == 0.0) continue;
            const double res = s.data(3 * f + c, n) - s.data(3 * (f - 1) + c, n);
            const int cur = 3 * f + c;
            const int prev = 3 * (f - 1) + c;
            h(cur, cur) += wt;
            h(prev, prev) += wt;
            h(cur, prev) -= wt;
            h(prev, cur) -= wt;
            b(cur) -= wt * res;
            b(prev) += wt * res;
          }
        }

        for (int f = 0; f < f_count; ++f) {
          for (int c = 0; c < 3; ++c) {
            const double wt = tw.lambda_link * weights.link(3 * f + c, n);
            if (wt == 0.0) continue;
            double fitted = 0.0;
            for (int k = 0; k < rank_; ++k)
              fitted += basis_.theta(f, k) * a.data(3 * k + c, n);
            const double res = s.data(3 * f + c, n) - fitted;
            const int s_idx = 3 * f + c;
            h(s_idx, s_idx) += wt;
            b(s_idx) -= wt * res;
            for (int k = 0; k < rank_; ++k) {
              const int a_idx = 3 * f_count + 3 * k + c;
              const double tk = basis_.theta(f, k);
              h(s_idx, a_idx) -= wt * tk;
              h(a_idx, s_idx) -= wt * tk;
              b(a_idx) += wt * res * tk;
              for (int k2 = 0; k2 < rank_; ++k2)
                h(a_idx, 3 * f_count + 3 * k2 + c) += wt * tk * basis_.theta(f, k2);
            }
          }
        }

        for (const auto& [edge_id, other] : incident_[n]) {
          for (int c = 0; c < 3 * rank_; ++c) {
            const double wt = tw.rho * weights.reg(c, edge_id);
            if (wt == 0.0) continue;
            const double res = a.data(c, n) - a_previous(c, other);
            const int a_idx = 3 * f_count + c;
            h(a_idx, a_idx) += wt;
            b(a_idx) -= wt * res;
          }
        }

        const double diag_floor = 1e-9 * h.diagonal().maxCoeff() + 1e-300;
        for (int i = 0; i < dim; ++i) h(i, i) += damping * std::max(h(i, i), diag_floor);

        const Eigen::VectorXd delta = h.ldlt().solve(b);
        for (int f = 0; f < f_count; ++f)
          s.data.block<3, 1>(3 * f, n) += delta.segment<3>(3 * f);
        for (int k = 0; k < rank_; ++k)
          a.data.block<3, 1>(3 * k, n) += delta.segment<3>(3 * f_count + 3 * k);
      }
    }
  }

  const MeasurementMatrix& w_;
  const DcmdrConfig& config_;
  const AdjacencyTable& adj_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<std::pair<int, int>>> incident_;
  int rank_ = 0;
  MeasurementMatrix centered_;
  TrajectoryBasis basis_;
  ShapeSequence shapes_;
  TrajectoryCoefficients coeffs_;
  std::vector<CameraPose> poses_;
};

}  // namespace

DcmdrResult dcmdr_reconstruct(const MeasurementMatrix& w, const DcmdrConfig& config,
                              const AdjacencyTable& adj) {
  return DcmdrSolver(w, config, adj).run();
}

}  // namespace nrsfm
