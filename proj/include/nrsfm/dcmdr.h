#pragma once

#include <vector>

#include "nrsfm/rigidinit.h"
#include "nrsfm/trajectory.h"
#include "nrsfm/types.h"

namespace nrsfm {

/// Term weights of the batch energy. alpha, lambda_link and rho are usually
/// equivalued with beta an order of magnitude lower.
struct DcmdrWeights {
  double alpha = 1.0;
  double beta = 0.1;
  double lambda_link = 1.0;
  double rho = 1.0;
  double huber_epsilon = 0.1;
};

struct DcmdrConfig {
  int rank = 0;  // trajectory-basis size K; 0 selects min(ceil(0.1 F), 32)
  DcmdrWeights weights;
  int max_iterations = 50;
  double rel_tol = 1e-6;
  int reg_sweeps = 3;  // block-Jacobi sweeps coupling points through E_reg
};

struct DcmdrEnergy {
  double total = 0.0;
  double fit = 0.0;
  double temp = 0.0;
  double linking = 0.0;
  double reg = 0.0;
};

/// Gradients of the unweighted energy terms with respect to the shape stack
/// and the trajectory coefficients.
struct DcmdrGradients {
  Eigen::MatrixXd fit_s;   // 3F x N
  Eigen::MatrixXd temp_s;  // 3F x N
  Eigen::MatrixXd link_s;  // 3F x N
  Eigen::MatrixXd link_a;  // 3K x N
  Eigen::MatrixXd reg_a;   // 3K x N
};

struct DcmdrResult {
  ShapeSequence shapes;  // per-frame reconstructions for the centered tracks
  std::vector<CameraPose> poses;
  TrajectoryCoefficients coefficients;
  std::vector<double> trace;  // energy after init and after every iteration
  std::vector<Eigen::Vector2d> centroids;  // removed from W, reported only
};

int default_rank(int frames);

/// Evaluates the four energy terms; every residual goes through the
/// per-element Huber loss at weights.huber_epsilon. The spatial term sums the
/// coefficient differences across each adjacency edge once.
DcmdrEnergy dcmdr_energy(const MeasurementMatrix& w, const ShapeSequence& s,
                         const std::vector<CameraPose>& poses,
                         const TrajectoryCoefficients& a, const TrajectoryBasis& basis,
                         const AdjacencyTable& adj, const DcmdrWeights& weights);

DcmdrGradients dcmdr_energy_gradients(const MeasurementMatrix& w, const ShapeSequence& s,
                                      const std::vector<CameraPose>& poses,
                                      const TrajectoryCoefficients& a,
                                      const TrajectoryBasis& basis, const AdjacencyTable& adj,
                                      const DcmdrWeights& weights);

/// Batch reconstruction. Starts from the rigid factorization, then alternates
/// closed-form per-frame pose updates with damped Gauss-Newton steps over
/// (S, A); Huber residuals are handled by iteratively reweighted least
/// squares, and spatial coupling by a fixed number of block-Jacobi sweeps.
/// Accepted steps never increase the energy, so the trace is non-increasing.
DcmdrResult dcmdr_reconstruct(const MeasurementMatrix& w, const DcmdrConfig& config,
                              const AdjacencyTable& adj);

}  // namespace nrsfm
