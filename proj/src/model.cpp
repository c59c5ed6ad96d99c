#include "plsm/model.hpp"

#include <limits>

namespace plsm {

namespace {

void check_indices(const ModelParams& p, int i, int j, int k) {
  const int n = p.n();
  const int K = p.num_topics();
  if (i < 0 || i >= n || j < 0 || j >= n) {
    throw std::out_of_range("node index out of range");
  }
  if (i == j) throw std::out_of_range("self-pairs are not modeled");
  if (k < 0 || k >= K) throw std::out_of_range("topic index out of range");
}

}  // namespace

double log_odds(const ModelParams& p, int i, int j, int k) {
  check_indices(p, i, j, k);
  return p.a[i] + p.a[j] + p.W(i, k) * p.W(j, k) * p.U.row(i).dot(p.U.row(j));
}

double edge_probability(const ModelParams& p, int i, int j, int k) {
  const double v = sigmoid(log_odds(p, i, j, k));
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::min(std::max(v, std::numeric_limits<double>::min()), hi);
}

MaskedLikelihood::MaskedLikelihood(const MultiEdgeNetwork& net,
                                   const ObservationMask& mask)
    : n_(net.n), K_(net.K), ij_(all_pairs(net.n)) {
  if (!mask.shape_matches(net)) {
    throw std::invalid_argument("mask shape does not match network");
  }
  const int P = num_pairs(n_);
  cnt_.setZero(P, K_);
  ysum_.setZero(P, K_);
  inv_m_.resize(P);
  for (int p = 0; p < P; ++p) {
    const BinMat& y = net.pairs[p];
    const BinMat& inc = mask.blocks[p];
    inv_m_[p] = 1.0 / static_cast<double>(y.rows());
    for (Eigen::Index l = 0; l < y.rows(); ++l) {
      for (int k = 0; k < K_; ++k) {
        if (inc(l, k)) {
          cnt_(p, k) += 1.0;
          ysum_(p, k) += y(l, k);
        }
      }
    }
  }
  lam_.resize(P, K_);
  sp_.resize(P, K_);
  wiwj_.resize(P, K_);
  ab_.resize(P);
  gram_.resize(P);
}

void MaskedLikelihood::build_ab(const Vec& a, Vec& ab) const {
  const int P = static_cast<int>(ij_.size());
  ab.resize(P);
  for (int p = 0; p < P; ++p) {
    ab[p] = a[ij_[p].first] + a[ij_[p].second];
  }
}

void MaskedLikelihood::build_gram(const Mat& U, Vec& gram) const {
  const int P = static_cast<int>(ij_.size());
  gram.resize(P);
  for (int p = 0; p < P; ++p) {
    gram[p] = U.row(ij_[p].first).dot(U.row(ij_[p].second));
  }
}

void MaskedLikelihood::build_wiwj(const Mat& W, Mat& wiwj) const {
  const int P = static_cast<int>(ij_.size());
  wiwj.resize(P, K_);
  for (int p = 0; p < P; ++p) {
    wiwj.row(p) = W.row(ij_[p].first).cwiseProduct(W.row(ij_[p].second));
  }
}

double MaskedLikelihood::value_parts(const Vec& ab, const Vec& gram,
                                     const Mat& wiwj) {
  // lam_pk = ab_p + gram_p * wiwj_pk
  lam_ = wiwj;
  lam_.array().colwise() *= gram.array();
  lam_.array().colwise() += ab.array();
  // softplus(x) = max(x, 0) + log1p(exp(-|x|))
  sp_.array() = lam_.array().max(0.0) + (-lam_.array().abs()).exp().log1p();
  const Vec per_pair =
      (cnt_.array() * sp_.array() - ysum_.array() * lam_.array())
          .rowwise()
          .sum()
          .matrix();
  return per_pair.dot(inv_m_);
}

double MaskedLikelihood::value(const ModelParams& p) {
  build_ab(p.a, ab_);
  build_gram(p.U, gram_);
  build_wiwj(p.W, wiwj_);
  return value_parts(ab_, gram_, wiwj_);
}

Gradients MaskedLikelihood::gradients_parts(const ModelParams& p,
                                            const Vec& ab, const Vec& gram,
                                            const Mat& wiwj) {
  const int P = static_cast<int>(ij_.size());
  lam_ = wiwj;
  lam_.array().colwise() *= gram.array();
  lam_.array().colwise() += ab.array();
  // residual r_pk = (1/m) * (c_pk * psi(lam) - s_pk), reusing sp_ as storage
  sp_.array() = (1.0 + (-lam_.array()).exp()).inverse() * cnt_.array() -
                ysum_.array();
  sp_.array().colwise() *= inv_m_.array();

  Gradients g;
  g.a = Vec::Zero(n_);
  g.W = Mat::Zero(n_, K_);
  g.U = Mat::Zero(n_, p.dim());
  for (int pr = 0; pr < P; ++pr) {
    const auto [i, j] = ij_[pr];
    const auto r = sp_.row(pr);
    g.a[i] += r.sum();
    g.a[j] += r.sum();
    g.W.row(i) += gram[pr] * r.cwiseProduct(p.W.row(j));
    g.W.row(j) += gram[pr] * r.cwiseProduct(p.W.row(i));
    const double t = r.cwiseProduct(wiwj.row(pr)).sum();
    g.U.row(i) += t * p.U.row(j);
    g.U.row(j) += t * p.U.row(i);
  }
  return g;
}

Gradients MaskedLikelihood::gradients(const ModelParams& p) {
  build_ab(p.a, ab_);
  build_gram(p.U, gram_);
  build_wiwj(p.W, wiwj_);
  return gradients_parts(p, ab_, gram_, wiwj_);
}

double neg_log_likelihood(const ModelParams& p, const MultiEdgeNetwork& net,
                          const ObservationMask& mask) {
  MaskedLikelihood like(net, mask);
  return like.value(p);
}

Gradients gradients(const ModelParams& p, const MultiEdgeNetwork& net,
                    const ObservationMask& mask) {
  MaskedLikelihood like(net, mask);
  return like.gradients(p);
}

ParameterSpaceCheck check_parameter_space(const ModelParams& p, double M1,
                                          double C) {
  if (M1 < 0.0) throw std::invalid_argument("M1 must be nonnegative");
  if (C <= 0.0 || C >= 1.0) {
    throw std::invalid_argument("C must lie strictly inside (0, 1)");
  }
  ParameterSpaceCheck out;
  out.M1 = M1;
  out.C = C;
  out.max_abs_a = p.a.size() ? p.a.cwiseAbs().maxCoeff() : 0.0;
  out.a_bound_ok = out.max_abs_a <= M1 / 4.0;
  out.max_w_row_sq =
      p.W.size() ? p.W.array().square().rowwise().sum().maxCoeff() : 0.0;
  out.w_row_bound_ok = out.max_w_row_sq <= M1 / 2.0;
  out.w_nnz = static_cast<int>((p.W.array() != 0.0).count());
  out.w_sparsity_ok = out.w_nnz < p.n() * p.num_topics();
  out.unit_rows_ok = p.max_unit_row_violation() <= 1e-10;

  out.max_lambda = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.n(); ++i) {
    for (int j = i + 1; j < p.n(); ++j) {
      const double base = p.a[i] + p.a[j];
      const double gram = p.U.row(i).dot(p.U.row(j));
      for (int k = 0; k < p.num_topics(); ++k) {
        out.max_lambda =
            std::max(out.max_lambda, base + p.W(i, k) * p.W(j, k) * gram);
      }
    }
  }
  out.lambda_bound_ok = out.max_lambda <= -(1.0 - C) * M1;
  return out;
}

}  // namespace plsm
