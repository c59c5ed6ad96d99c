#include "plsm/optimizer.hpp"

#include "plsm/metrics.hpp"
#include "plsm/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace plsm {

Mat truncate(const Mat& W, int s) {
  const int n = static_cast<int>(W.rows());
  const int K = static_cast<int>(W.cols());
  if (s < 0 || s > n * K) {
    throw std::invalid_argument("sparsity budget s must lie in [0, nK]");
  }
  // order: value descending, ties toward smaller (row, column)
  std::vector<std::tuple<double, int, int>> entries;
  entries.reserve(static_cast<std::size_t>(n) * K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      entries.emplace_back(W(i, k), i, k);
    }
  }
  std::nth_element(entries.begin(), entries.begin() + s, entries.end(),
                   [](const auto& lhs, const auto& rhs) {
                     if (std::get<0>(lhs) != std::get<0>(rhs)) {
                       return std::get<0>(lhs) > std::get<0>(rhs);
                     }
                     return std::tie(std::get<1>(lhs), std::get<2>(lhs)) <
                            std::tie(std::get<1>(rhs), std::get<2>(rhs));
                   });
  Mat out = Mat::Zero(n, K);
  for (int t = 0; t < s; ++t) {
    const auto [v, i, k] = entries[t];
    out(i, k) = std::max(v, 0.0);
  }
  return out;
}

Mat project_rows_to_sphere(const Mat& U) {
  Mat out = U;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double nrm = out.row(i).norm();
    if (nrm == 0.0) throw DegenerateRowError(static_cast<int>(i));
    out.row(i) /= nrm;
  }
  return out;
}

ModelParams pgd_step(const ModelParams& p, const MultiEdgeNetwork& net,
                     const ObservationMask& mask, StepSizes steps, int s) {
  MaskedLikelihood like(net, mask);
  const Gradients g = like.gradients(p);
  ModelParams next;
  next.a = p.a - steps.a * g.a;
  next.W = truncate(p.W - steps.W * g.W, s);
  next.U = project_rows_to_sphere(p.U - steps.U * g.U);
  return next;
}

StepSizes theoretical_steps(double sigma1, double wmax, int K, int n,
                            double M1, double kappa0, double rho) {
  if (sigma1 <= 0 || wmax <= 0 || K <= 0 || n <= 0 || kappa0 <= 0) {
    throw std::invalid_argument("theoretical_steps requires positive inputs");
  }
  if (M1 < 0) throw std::invalid_argument("M1 must be nonnegative");
  if (rho < 0 || rho >= 0.5) {
    throw std::invalid_argument("rho must lie in [0, 1/2)");
  }
  const double eta = kappa0 * kappa0 * (16.0 - rho) * std::exp(M1) / 4.0;
  StepSizes out;
  out.a = eta / (4.0 * K * n);
  out.W = eta / (4.0 * sigma1 * sigma1 * wmax * wmax);
  out.U = eta / (2.0 * K * sigma1 * sigma1 * wmax * wmax * wmax * wmax);
  return out;
}

namespace {

// Normalizes rows in place; rows that collapsed to zero are replaced by a
// seeded random unit vector (measure-zero event, keeps long runs alive).
void normalize_rows_reseeding(Mat& U, Rng& rng) {
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    double nrm = U.row(i).norm();
    while (nrm == 0.0) {
      for (Eigen::Index c = 0; c < U.cols(); ++c) U(i, c) = rng.normal();
      nrm = U.row(i).norm();
    }
    U.row(i) /= nrm;
  }
}

bool has_zero_row(const Mat& U) {
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    if (U.row(i).norm() == 0.0) return true;
  }
  return false;
}

struct BlockSearchState {
  MaskedLikelihood& like;
  double current;  // objective at the accepted configuration so far
};

}  // namespace

FitReport fit(const MultiEdgeNetwork& net, const ObservationMask& mask,
              const FitConfig& config, const ModelParams& init,
              const ModelParams* truth) {
  if (!init.dims_consistent()) {
    throw std::invalid_argument("init parameters have inconsistent shapes");
  }
  if (init.dim() != config.d || config.d < 1 || config.d > net.n) {
    throw std::invalid_argument("latent dimension mismatch");
  }
  if (config.tol <= 0) throw std::invalid_argument("tol must be positive");
  if (config.max_iters < 1) {
    throw std::invalid_argument("max_iters must be positive");
  }
  const int nK = net.n * net.K;
  if (config.s < 1 || config.s > nK) {
    throw std::invalid_argument("sparsity budget s must lie in [1, nK]");
  }

  MaskedLikelihood like(net, mask);
  Rng rng(mix_seed(config.seed, 0x5eedU));

  // e_t constants come from the ground truth when supplied
  double sigma1_star = 0.0, wmax_star = 0.0;
  if (truth) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(truth->U);
    sigma1_star = svd.singularValues()[0];
    wmax_star = truth->W.size() ? truth->W.maxCoeff() : 0.0;
  }
  const auto record_et = [&](const ModelParams& p, FitReport& rep) {
    if (!truth) return;
    rep.e_t.push_back(error_metric_et(p, *truth, sigma1_star, wmax_star));
  };

  FitReport rep;
  ModelParams params = init;
  // iterate 0 must already satisfy the constraint set
  params.W = truncate(params.W, config.s);
  normalize_rows_reseeding(params.U, rng);

  Vec ab;
  Vec gram;
  Mat wiwj;
  like.build_ab(params.a, ab);
  like.build_gram(params.U, gram);
  like.build_wiwj(params.W, wiwj);
  double current = like.value_parts(ab, gram, wiwj);
  if (!std::isfinite(current)) throw DivergenceError(0);
  rep.objective.push_back(current);
  record_et(params, rep);

  const bool fixed_mode = std::holds_alternative<StepSizes>(config.step_mode);

  for (int t = 1; t <= config.max_iters; ++t) {
    const Gradients g = like.gradients_parts(params, ab, gram, wiwj);
    StepSizes accepted;

    if (fixed_mode) {
      const StepSizes eta = std::get<StepSizes>(config.step_mode);
      params.a -= eta.a * g.a;
      params.W = truncate(params.W - eta.W * g.W, config.s);
      params.U -= eta.U * g.U;
      normalize_rows_reseeding(params.U, rng);
      like.build_ab(params.a, ab);
      like.build_gram(params.U, gram);
      like.build_wiwj(params.W, wiwj);
      current = like.value_parts(ab, gram, wiwj);
      accepted = eta;
    } else {
      const auto& bt = std::get<Backtracking>(config.step_mode);

      // a block
      {
        const double g2 = g.a.squaredNorm();
        double eta = bt.init.a;
        Vec ab_try;
        for (int shrink = 0; shrink <= bt.max_shrinks && g2 > 0.0; ++shrink) {
          const Vec a_try = params.a - eta * g.a;
          like.build_ab(a_try, ab_try);
          const double f = like.value_parts(ab_try, gram, wiwj);
          if (std::isfinite(f) && f <= current - bt.c * eta * g2) {
            params.a = a_try;
            ab.swap(ab_try);
            current = f;
            accepted.a = eta;
            break;
          }
          eta *= bt.beta;
        }
      }

      // W block (gradient from the incoming iterate, per the update order)
      {
        const double g2 = g.W.squaredNorm();
        double eta = bt.init.W;
        Mat wiwj_try;
        for (int shrink = 0; shrink <= bt.max_shrinks && g2 > 0.0; ++shrink) {
          Mat w_try = truncate(params.W - eta * g.W, config.s);
          like.build_wiwj(w_try, wiwj_try);
          const double f = like.value_parts(ab, gram, wiwj_try);
          if (std::isfinite(f) && f <= current - bt.c * eta * g2) {
            params.W = std::move(w_try);
            wiwj.swap(wiwj_try);
            current = f;
            accepted.W = eta;
            break;
          }
          eta *= bt.beta;
        }
      }

      // U block
      {
        const double g2 = g.U.squaredNorm();
        double eta = bt.init.U;
        Vec gram_try;
        for (int shrink = 0; shrink <= bt.max_shrinks && g2 > 0.0; ++shrink) {
          Mat u_try = params.U - eta * g.U;
          if (has_zero_row(u_try)) {  // degenerate trial; shrink instead
            eta *= bt.beta;
            continue;
          }
          u_try = project_rows_to_sphere(u_try);
          like.build_gram(u_try, gram_try);
          const double f = like.value_parts(ab, gram_try, wiwj);
          if (std::isfinite(f) && f <= current - bt.c * eta * g2) {
            params.U = std::move(u_try);
            gram.swap(gram_try);
            current = f;
            accepted.U = eta;
            break;
          }
          eta *= bt.beta;
        }
      }
    }

    if (!std::isfinite(current)) {
      rep.objective.push_back(current);
      throw DivergenceError(t, rep.objective);
    }
    const double prev = rep.objective.back();
    rep.objective.push_back(current);
    rep.steps.push_back(accepted);
    record_et(params, rep);
    rep.iterations = t;
    if (std::abs(current - prev) / std::max(1.0, std::abs(prev)) <
        config.tol) {
      rep.converged = true;
      break;
    }
  }

  rep.params = std::move(params);
  return rep;
}

ModelParams initialize_svt(const MultiEdgeNetwork& net, int d, int s,
                           std::uint64_t seed) {
  const int n = net.n;
  const int K = net.K;
  if (d < 1 || d > n) throw std::invalid_argument("need 1 <= d <= n");
  if (s < 0 || s > n * K) throw std::invalid_argument("s out of range");

  // pooled empirical probabilities, clipped away from {0, 1}
  const double eps = 1.0 / (2.0 * n * K);
  Mat M = Mat::Zero(n, n);
  const auto pairs = all_pairs(n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const BinMat& y = net.pairs[p];
    const double pooled =
        (static_cast<double>(y.cast<std::uint32_t>().sum()) + 0.5) /
        (static_cast<double>(K) * static_cast<double>(y.rows()) + 1.0);
    const double clipped = std::min(std::max(pooled, eps), 1.0 - eps);
    const double logit = std::log(clipped / (1.0 - clipped));
    M(i, j) = logit;
    M(j, i) = logit;
  }

  // least squares of M_ij ~ a_i + a_j over i < j:
  // ((n-2) I + 11^T) a = rowsums(M); minimum-norm a = rowsums/2 when n = 2
  const Vec rowsums = M.rowwise().sum();
  Vec a0(n);
  if (n == 2) {
    a0 = rowsums / 2.0;
  } else {
    // Sherman-Morrison inverse of the structured system
    const double total = rowsums.sum();
    a0 = (rowsums.array() - total / (2.0 * n - 2.0)) / (n - 2.0);
  }

  Mat R = M;
  R.rowwise() -= a0.transpose();
  R.colwise() -= a0;
  R.diagonal().setZero();  // no self-pairs; keep the baseline fit exact

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of the residual failed");
  }
  // eigenvalues ascending; take the top d by algebraic value
  const Vec evals = eig.eigenvalues();
  const Eigen::MatrixXd evecs = eig.eigenvectors();
  const double eig_tol =
      1e-12 * std::max(1.0, evals.cwiseAbs().maxCoeff());

  // rows of evecs_d * sqrt(lambda_d) approximate the preferential positions
  // w_i * u_i: their directions seed U and their norms set the per-node W
  // scale. A global scale would grow like sqrt(n) and saturate the model.
  Rng rng(mix_seed(seed, 0x11117ULL));
  Mat U0(n, d);
  Vec wnode = Vec::Zero(n);
  for (int c = 0; c < d; ++c) {
    const int src = n - 1 - c;  // c-th largest
    if (evals[src] > eig_tol) {
      U0.col(c) = evecs.col(src);
      wnode.array() += evals[src] * evecs.col(src).array().square();
    } else {
      // deficient direction: seeded random coordinates, no scale weight
      for (int i = 0; i < n; ++i) U0(i, c) = rng.normal();
    }
  }
  normalize_rows_reseeding(U0, rng);
  wnode = wnode.cwiseSqrt();

  ModelParams out;
  out.a = a0;
  out.W = truncate(wnode.replicate(1, K), s);
  out.U = U0;
  return out;
}

Backtracking calibrate_backtracking(const MultiEdgeNetwork& net,
                                    const ObservationMask& mask,
                                    const ModelParams& init, int s,
                                    Backtracking base, double margin) {
  FitConfig probe;
  probe.d = init.dim();
  probe.s = s;
  probe.max_iters = 1;
  probe.tol = 1e-300;  // never stops on tolerance within one iteration
  probe.step_mode = base;
  const FitReport rep = fit(net, mask, probe, init);
  const StepSizes acc = rep.steps.empty() ? StepSizes{} : rep.steps.front();
  Backtracking tuned = base;
  const auto scale = [&](double eta, double fallback) {
    return eta > 0.0 ? std::min(margin * eta, fallback) : fallback;
  };
  tuned.init.a = scale(acc.a, base.init.a);
  tuned.init.W = scale(acc.W, base.init.W);
  tuned.init.U = scale(acc.U, base.init.U);
  return tuned;
}

}  // namespace plsm
