#pragma once

#include "plsm/types.hpp"

#include <cmath>

namespace plsm {

/// Logistic link psi(x) = 1 / (1 + exp(-x)).
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + exp(x)) evaluated as max(x,0) + log1p(exp(-|x|)); finite for
/// |x| up to the overflow limit of exp.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// Log odds of an edge between i and j on topic k:
/// a_i + a_j + W_ik * W_jk * <u_i, u_j>. Symmetric in (i, j).
double log_odds(const ModelParams& p, int i, int j, int k);

/// sigmoid(log_odds), clamped to the open interval (0, 1) at the
/// representable boundary.
double edge_probability(const ModelParams& p, int i, int j, int k);

struct Gradients {
  Vec a;  // n
  Mat W;  // n x K
  Mat U;  // n x d
};

/// Per-cell likelihood terms aggregated per (pair, topic): with the mask
/// fixed the negative log-likelihood and its gradients only need the masked
/// cell count and masked response sum for each (i, j, k). Built once and
/// reused across iterate evaluations.
class MaskedLikelihood {
 public:
  MaskedLikelihood(const MultiEdgeNetwork& net, const ObservationMask& mask);

  int num_nodes() const { return n_; }
  int num_topics() const { return K_; }
  const std::vector<std::pair<int, int>>& pair_nodes() const { return ij_; }
  const Mat& cell_count() const { return cnt_; }
  const Mat& cell_ysum() const { return ysum_; }
  /// Masked counts/sums are mutable so tests can run continuous-relaxation
  /// checks with fractional responses.
  Mat& cell_count() { return cnt_; }
  Mat& cell_ysum() { return ysum_; }

  double value(const ModelParams& p);
  Gradients gradients(const ModelParams& p);

  // Cached-component evaluation used by the optimizer's line searches: the
  // objective is a function of ab_p = a_i + a_j, gram_p = <u_i, u_j> and
  // wiwj_pk = W_ik * W_jk, and a block update only invalidates one of them.
  void build_ab(const Vec& a, Vec& ab) const;
  void build_gram(const Mat& U, Vec& gram) const;
  void build_wiwj(const Mat& W, Mat& wiwj) const;
  double value_parts(const Vec& ab, const Vec& gram, const Mat& wiwj);
  Gradients gradients_parts(const ModelParams& p, const Vec& ab,
                            const Vec& gram, const Mat& wiwj);

 private:
  int n_ = 0;
  int K_ = 0;
  std::vector<std::pair<int, int>> ij_;
  Mat cnt_;    // P x K masked cell count c_pk
  Mat ysum_;   // P x K masked response sum s_pk
  Vec inv_m_;  // P, 1 / m_ij
  // workspaces (reused across evaluations; instances are not thread-safe)
  Mat lam_, sp_;
  Vec ab_, gram_;
  Mat wiwj_;
};

/// Negative log-likelihood over the masked cells:
///   sum over (i<j, l, k) in mask of (1/m_ij) * [softplus(L) - y * L],
/// the sign-flipped Bernoulli log-likelihood with L = log_odds(i, j, k).
double neg_log_likelihood(const ModelParams& p, const MultiEdgeNetwork& net,
                          const ObservationMask& mask);

/// Analytic gradients of neg_log_likelihood. With the per-pair-topic
/// residual r_ijk = (1/m_ij) * sum over masked l of (psi(L) - y):
///   grad_a[i]   = sum_k sum_{j != i} r_ijk
///   grad_W[i,k] = sum_{j != i} r_ijk * W_jk * <u_i, u_j>
///   grad_U[i,.] = sum_k sum_{j != i} r_ijk * W_ik * W_jk * u_j
Gradients gradients(const ModelParams& p, const MultiEdgeNetwork& net,
                    const ObservationMask& mask);

/// Per-condition evaluation of the constrained parameter space with
/// envelope M1 and slack constant C in (0, 1).
struct ParameterSpaceCheck {
  double M1 = 0.0;
  double C = 0.0;
  bool a_bound_ok = false;       // ||a||_inf <= M1/4
  bool w_row_bound_ok = false;   // max_i sum_k W_ik^2 <= M1/2
  bool w_sparsity_ok = false;    // ||W||_0 < nK
  bool unit_rows_ok = false;     // each ||u_i|| = 1 (1e-10)
  bool lambda_bound_ok = false;  // max log odds <= -(1-C)*M1

  double max_abs_a = 0.0;
  double max_w_row_sq = 0.0;
  double max_lambda = 0.0;
  int w_nnz = 0;

  bool passes() const {
    return a_bound_ok && w_row_bound_ok && w_sparsity_ok && unit_rows_ok &&
           lambda_bound_ok;
  }
};

ParameterSpaceCheck check_parameter_space(const ModelParams& p, double M1,
                                          double C);

}  // namespace plsm
