#pragma once

#include "plsm/types.hpp"

#include <vector>

namespace plsm {

struct ProcrustesResult {
  double distance = 0.0;
  Mat rotation;  // d x d orthogonal minimizer
};

/// dist(U1, U2) = min over orthogonal R of ||U1 - U2 R||_F, with R from the
/// SVD of U2^T U1 (left singular vectors times right transposed).
ProcrustesResult procrustes_distance(const Mat& U1, const Mat& U2);

struct ErrorSummary {
  double rel_a = 0.0;
  double rel_w = 0.0;
  double rel_u = 0.0;     // Procrustes-minimized
  double rel_prob = 0.0;  // mean over topics, diagonal excluded
};

/// Squared relative estimation errors of (a, W, U) and of the edge
/// probability surfaces:
///   rel_a   = ||a_hat - a*||^2 / ||a*||^2
///   rel_w   = ||W_hat - W*||_F^2 / ||W*||_F^2
///   rel_u   = min_R ||U_hat - U* R||_F^2 / ||U*||_F^2
///   rel_prob = (1/K) sum_k ||psi(L_hat^k) - psi(L*^k)||_F^2
///                        / ||psi(L*^k)||_F^2   (diagonals excluded)
ErrorSummary relative_errors(const ModelParams& est, const ModelParams& truth);

/// Combined iterate error
///   2 K n ||a - a*||^2 + sigma1*^2 wmax^2 ||W - W*||_F^2
///     + K sigma1*^2 wmax^4 dist^2(U, U*).
double error_metric_et(const ModelParams& est, const ModelParams& truth,
                       double sigma1_star, double wmax);

struct SupportRates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Support recovery of W against the true support: TPR over true nonzeros,
/// FPR over true zeros, with "estimated nonzero" meaning strictly positive.
SupportRates support_rates(const Mat& w_est, const Mat& w_true);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // ascending threshold
  double auc = 0.0;             // trapezoid over recall
};

/// Precision-recall sweep: a cell is predicted positive when its score is
/// >= the threshold. Default thresholds are the sorted unique scores. The
/// area integrates precision over recall, anchored at recall 0 with the
/// precision of the highest threshold.
PrCurve precision_recall(const Vec& scores, const Vec& ys);
PrCurve precision_recall(const Vec& scores, const Vec& ys,
                         const std::vector<double>& thresholds);

}  // namespace plsm
