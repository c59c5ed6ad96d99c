#include "plsm/metrics.hpp"

#include "plsm/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace plsm {

ProcrustesResult procrustes_distance(const Mat& U1, const Mat& U2) {
  if (U1.rows() != U2.rows() || U1.cols() != U2.cols()) {
    throw std::invalid_argument("procrustes arguments must share a shape");
  }
  const Eigen::MatrixXd c = U2.transpose() * U1;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.distance = (U1 - U2 * out.rotation).norm();
  return out;
}

namespace {

// psi(log odds) over all pairs of one topic, diagonal left at zero
Mat prob_surface(const ModelParams& p, int k) {
  const int n = p.n();
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double lam =
          p.a[i] + p.a[j] + p.W(i, k) * p.W(j, k) * p.U.row(i).dot(p.U.row(j));
      const double v = sigmoid(lam);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

void check_shapes(const ModelParams& est, const ModelParams& truth) {
  if (est.a.size() != truth.a.size() || est.W.rows() != truth.W.rows() ||
      est.W.cols() != truth.W.cols() || est.U.rows() != truth.U.rows() ||
      est.U.cols() != truth.U.cols()) {
    throw std::invalid_argument("estimate and truth shapes disagree");
  }
}

}  // namespace

ErrorSummary relative_errors(const ModelParams& est, const ModelParams& truth) {
  check_shapes(est, truth);
  const double a2 = truth.a.squaredNorm();
  const double w2 = truth.W.squaredNorm();
  const double u2 = truth.U.squaredNorm();
  if (a2 == 0.0 || w2 == 0.0 || u2 == 0.0) {
    throw std::invalid_argument("relative error denominator is zero");
  }
  ErrorSummary out;
  out.rel_a = (est.a - truth.a).squaredNorm() / a2;
  out.rel_w = (est.W - truth.W).squaredNorm() / w2;
  const ProcrustesResult pr = procrustes_distance(est.U, truth.U);
  out.rel_u = pr.distance * pr.distance / u2;

  const int K = truth.num_topics();
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const Mat pt = prob_surface(truth, k);
    const Mat pe = prob_surface(est, k);
    const double denom = pt.squaredNorm();
    if (denom == 0.0) {
      throw std::invalid_argument("relative error denominator is zero");
    }
    acc += (pe - pt).squaredNorm() / denom;
  }
  out.rel_prob = acc / K;
  return out;
}

double error_metric_et(const ModelParams& est, const ModelParams& truth,
                       double sigma1_star, double wmax) {
  check_shapes(est, truth);
  if (sigma1_star <= 0.0 || wmax <= 0.0) {
    throw std::invalid_argument("e_t scalars must be positive");
  }
  const int K = truth.num_topics();
  const int n = truth.n();
  const double dist = procrustes_distance(est.U, truth.U).distance;
  const double s1sq = sigma1_star * sigma1_star;
  const double wm2 = wmax * wmax;
  return 2.0 * K * n * (est.a - truth.a).squaredNorm() +
         s1sq * wm2 * (est.W - truth.W).squaredNorm() +
         K * s1sq * wm2 * wm2 * dist * dist;
}

SupportRates support_rates(const Mat& w_est, const Mat& w_true) {
  if (w_est.rows() != w_true.rows() || w_est.cols() != w_true.cols()) {
    throw std::invalid_argument("support_rates shapes disagree");
  }
  long tp = 0, fp = 0, pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < w_true.rows(); ++i) {
    for (Eigen::Index k = 0; k < w_true.cols(); ++k) {
      const bool truth_on = w_true(i, k) > 0.0;
      const bool est_on = w_est(i, k) > 0.0;
      if (truth_on) {
        ++pos;
        if (est_on) ++tp;
      } else {
        ++neg;
        if (est_on) ++fp;
      }
    }
  }
  if (pos == 0) throw UndefinedRateError("W* has no nonzero entries");
  if (neg == 0) throw UndefinedRateError("W* has no zero entries");
  return {static_cast<double>(tp) / pos, static_cast<double>(fp) / neg};
}

PrCurve precision_recall(const Vec& scores, const Vec& ys) {
  std::vector<double> thresholds(scores.data(), scores.data() + scores.size());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  return precision_recall(scores, ys, thresholds);
}

PrCurve precision_recall(const Vec& scores, const Vec& ys,
                         const std::vector<double>& thresholds) {
  const Eigen::Index N = scores.size();
  if (N == 0 || ys.size() != N) {
    throw std::invalid_argument("scores and outcomes must match and be nonempty");
  }
  if (thresholds.empty()) {
    throw std::invalid_argument("need at least one threshold");
  }
  long positives = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (ys[i] != 0.0 && ys[i] != 1.0) {
      throw std::invalid_argument("outcomes must be 0 or 1");
    }
    if (ys[i] == 1.0) ++positives;
  }
  if (positives == 0) {
    throw UndefinedRateError("no positive outcomes among evaluated cells");
  }

  std::vector<double> sorted_thr = thresholds;
  std::sort(sorted_thr.begin(), sorted_thr.end());

  // one pass over cells sorted by score gives TP/FP counts at every
  // threshold: a cell counts for thresholds <= its score
  std::vector<Eigen::Index> order(N);
  for (Eigen::Index i = 0; i < N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
    return scores[l] > scores[r];
  });

  PrCurve curve;
  curve.points.resize(sorted_thr.size());
  long tp = 0, fp = 0;
  std::size_t cell = 0;
  for (std::size_t t = sorted_thr.size(); t-- > 0;) {
    const double thr = sorted_thr[t];
    while (cell < order.size() && scores[order[cell]] >= thr) {
      if (ys[order[cell]] == 1.0) {
        ++tp;
      } else {
        ++fp;
      }
      ++cell;
    }
    PrPoint& pt = curve.points[t];
    pt.threshold = thr;
    pt.recall = static_cast<double>(tp) / positives;
    pt.precision =
        (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
  }

  // trapezoid over recall, thresholds descending, anchored at recall 0
  double auc = 0.0;
  double prev_recall = 0.0;
  double prev_precision = curve.points.back().precision;
  for (std::size_t t = curve.points.size(); t-- > 0;) {
    const PrPoint& pt = curve.points[t];
    auc += (pt.recall - prev_recall) * (pt.precision + prev_precision) / 2.0;
    prev_recall = pt.recall;
    prev_precision = pt.precision;
  }
  curve.auc = auc;
  return curve;
}

}  // namespace plsm
