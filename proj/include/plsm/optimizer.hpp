#pragma once

#include "plsm/model.hpp"
#include "plsm/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace plsm {

struct StepSizes {
  double a = 0.0;
  double W = 0.0;
  double U = 0.0;
};

/// Armijo backtracking: each iteration every block restarts from the
/// configured initial step and shrinks by beta until the objective drops by
/// at least c * step * ||block gradient||^2. A block that cannot satisfy the
/// condition within max_shrinks is left unchanged for that iteration.
struct Backtracking {
  double beta = 0.5;
  double c = 1e-4;
  StepSizes init{1.0, 1.0, 1.0};
  int max_shrinks = 60;
};

using StepMode = std::variant<StepSizes, Backtracking>;

struct FitConfig {
  int d = 2;
  int s = 0;                // sparsity budget, count of retained W entries
  int max_iters = 2000;
  double tol = 1e-7;        // relative objective-change stop
  StepMode step_mode = Backtracking{};
  std::uint64_t seed = 0;   // only consumed on degenerate-row re-randomization
};

struct FitReport {
  ModelParams params;
  std::vector<double> objective;   // length iterations + 1, objective[0] = at init
  std::vector<StepSizes> steps;    // accepted per iteration
  bool converged = false;
  int iterations = 0;
  std::vector<double> e_t;         // only when ground truth was supplied
};

/// Keeps the s largest entries of W (ties at the cutoff broken by smallest
/// (row, column) index), zeroes the rest, and clamps kept entries at 0 from
/// below so the result is nonnegative.
Mat truncate(const Mat& W, int s);

/// Divides each row by its Euclidean norm. Throws DegenerateRowError on a
/// zero row.
Mat project_rows_to_sphere(const Mat& U);

/// One projected gradient step with all three blocks evaluated at the
/// incoming iterate:
///   a <- a - eta_a * grad_a
///   W <- truncate(W - eta_W * grad_W, s)
///   U <- project_rows_to_sphere(U - eta_U * grad_U)
ModelParams pgd_step(const ModelParams& p, const MultiEdgeNetwork& net,
                     const ObservationMask& mask, StepSizes steps, int s);

/// Projected gradient descent until the relative objective change falls
/// below config.tol or max_iters is reached. When truth is supplied the
/// report carries the e_t error trace (see metrics).
FitReport fit(const MultiEdgeNetwork& net, const ObservationMask& mask,
              const FitConfig& config, const ModelParams& init,
              const ModelParams* truth = nullptr);

/// Step sizes with guaranteed contraction under the theory's conditions:
///   eta = kappa0^2 * (16 - rho) * exp(M1) / 4
///   eta_a = eta / (4 K n)
///   eta_W = eta / (4 sigma1^2 wmax^2)
///   eta_U = eta / (2 K sigma1^2 wmax^4)
StepSizes theoretical_steps(double sigma1, double wmax, int K, int n,
                            double M1, double kappa0, double rho);

/// Spectral initialization from the pooled empirical edge probabilities:
/// logit of the clipped pooled rate, additive degree fit for a, top-d
/// eigenvectors of the residual for U (deficient directions re-randomized,
/// seeded), and a per-node flat positive W at the scale of the node's
/// scaled-eigenvector row.
ModelParams initialize_svt(const MultiEdgeNetwork& net, int d, int s,
                           std::uint64_t seed = 0);

/// Driver-side helper: runs one backtracking sweep from step 1.0 per block
/// at the initial iterate and returns a Backtracking config whose initial
/// steps are margin times the accepted ones. Cuts the per-iteration shrink
/// count when fit() restarts from the initial step every iteration.
Backtracking calibrate_backtracking(const MultiEdgeNetwork& net,
                                    const ObservationMask& mask,
                                    const ModelParams& init, int s,
                                    Backtracking base = Backtracking{},
                                    double margin = 4.0);

}  // namespace plsm
