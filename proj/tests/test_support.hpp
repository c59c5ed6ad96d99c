#pragma once

#include "plsm/model.hpp"
#include "plsm/rng.hpp"
#include "plsm/types.hpp"

#include <Eigen/QR>

#include <cmath>
#include <vector>

namespace plsm::testing {

/// Random parameters with unit rows and nonnegative W; w_scale 0 gives an
/// all-zero W.
inline ModelParams random_params(int n, int K, int d, Rng& rng,
                                 double w_scale = 1.0) {
  ModelParams p;
  p.a.resize(n);
  for (int i = 0; i < n; ++i) p.a[i] = rng.uniform(-1.5, 0.5);
  p.W.resize(n, K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      p.W(i, k) = w_scale * rng.uniform(0.0, 2.0);
    }
  }
  p.U.resize(n, d);
  for (int i = 0; i < n; ++i) {
    double nrm = 0.0;
    do {
      for (int c = 0; c < d; ++c) p.U(i, c) = rng.normal();
      nrm = p.U.row(i).norm();
    } while (nrm == 0.0);
    p.U.row(i) /= nrm;
  }
  return p;
}

/// Random network with m_ij drawn in [1, max_m].
inline MultiEdgeNetwork random_network(int n, int K, int max_m, Rng& rng) {
  MultiEdgeNetwork net = MultiEdgeNetwork::empty(n, K);
  for (auto& block : net.pairs) {
    const int m = 1 + static_cast<int>(rng.below(max_m));
    block.resize(m, K);
    for (int l = 0; l < m; ++l) {
      for (int k = 0; k < K; ++k) {
        block(l, k) = rng.uniform() < 0.5 ? 1 : 0;
      }
    }
  }
  return net;
}

/// Random mask including roughly `keep` of the cells.
inline ObservationMask random_mask(const MultiEdgeNetwork& net, double keep,
                                   Rng& rng) {
  ObservationMask mask = ObservationMask::none(net);
  for (auto& block : mask.blocks) {
    for (Eigen::Index l = 0; l < block.rows(); ++l) {
      for (Eigen::Index k = 0; k < block.cols(); ++k) {
        block(l, k) = rng.uniform() < keep ? 1 : 0;
      }
    }
  }
  return mask;
}

/// Independent scalar-loop evaluation of the negative log-likelihood with
/// the naive probability formula; the oracle the vectorized path is checked
/// against.
inline double nll_oracle(const ModelParams& p, const MultiEdgeNetwork& net,
                         const ObservationMask& mask) {
  double acc = 0.0;
  for (int i = 0; i < net.n; ++i) {
    for (int j = i + 1; j < net.n; ++j) {
      const int pr = pair_index(net.n, i, j);
      const BinMat& block = net.pairs[pr];
      const BinMat& inc = mask.blocks[pr];
      const double m = static_cast<double>(block.rows());
      for (Eigen::Index l = 0; l < block.rows(); ++l) {
        for (int k = 0; k < net.K; ++k) {
          if (!inc(l, k)) continue;
          double lambda = p.a[i] + p.a[j];
          for (int c = 0; c < p.dim(); ++c) {
            lambda += p.W(i, k) * p.W(j, k) * p.U(i, c) * p.U(j, c);
          }
          const double psi = 1.0 / (1.0 + std::exp(-lambda));
          acc -= (block(l, k) * lambda + std::log(1.0 - psi)) / m;
        }
      }
    }
  }
  return acc;
}

/// Random orthogonal d x d matrix via QR of a Gaussian matrix.
inline Mat random_orthogonal(int d, Rng& rng) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Mat q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return q;
}

}  // namespace plsm::testing
