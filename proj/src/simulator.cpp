#include "plsm/simulator.hpp"

#include "plsm/model.hpp"
#include "plsm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace plsm {

void SimConfig::validate() const {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  if (K < 1) throw std::invalid_argument("need K >= 1");
  if (d < 1 || d > n) throw std::invalid_argument("need 1 <= d <= n");
  if (m < 1) throw std::invalid_argument("need m >= 1");
  if (q0 <= 0.0 || q0 > 1.0) throw std::invalid_argument("need 0 < q0 <= 1");
  if (a_low >= a_high) throw std::invalid_argument("need a_low < a_high");
  if (w_low >= w_high) throw std::invalid_argument("need w_low < w_high");
}

ModelParams gen_params(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ModelParams truth;

  truth.a.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    truth.a[i] = rng.uniform(cfg.a_low, cfg.a_high);
  }

  truth.U.resize(cfg.n, cfg.d);
  for (int i = 0; i < cfg.n; ++i) {
    double nrm = 0.0;
    do {
      for (int c = 0; c < cfg.d; ++c) truth.U(i, c) = rng.normal();
      nrm = truth.U.row(i).norm();
    } while (nrm == 0.0);
    truth.U.row(i) /= nrm;
  }

  // support: first nnz cells of a partial Fisher-Yates over row-major
  // indices; values drawn in sorted support order
  const long cells = static_cast<long>(cfg.n) * cfg.K;
  const long nnz = std::lround(cfg.q0 * static_cast<double>(cells));
  std::vector<long> idx(cells);
  for (long t = 0; t < cells; ++t) idx[t] = t;
  for (long t = 0; t < nnz; ++t) {
    const long j = t + static_cast<long>(rng.below(cells - t));
    std::swap(idx[t], idx[j]);
  }
  std::vector<long> support(idx.begin(), idx.begin() + nnz);
  std::sort(support.begin(), support.end());

  truth.W = Mat::Zero(cfg.n, cfg.K);
  for (const long cell : support) {
    truth.W(cell / cfg.K, cell % cfg.K) = rng.uniform(cfg.w_low, cfg.w_high);
  }
  return truth;
}

MultiEdgeNetwork gen_network(const ModelParams& truth, int m,
                             std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("need m >= 1");
  if (!truth.dims_consistent()) {
    throw std::invalid_argument("truth parameters have inconsistent shapes");
  }
  const int n = truth.n();
  const int K = truth.num_topics();
  Rng rng(seed);

  MultiEdgeNetwork net;
  net.n = n;
  net.K = K;
  net.pairs.reserve(num_pairs(n));
  Vec prob(K);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double base = truth.a[i] + truth.a[j];
      const double gram = truth.U.row(i).dot(truth.U.row(j));
      for (int k = 0; k < K; ++k) {
        prob[k] = sigmoid(base + truth.W(i, k) * truth.W(j, k) * gram);
      }
      BinMat block(m, K);
      for (int l = 0; l < m; ++l) {
        for (int k = 0; k < K; ++k) {
          block(l, k) = rng.uniform() < prob[k] ? 1 : 0;
        }
      }
      net.pairs.push_back(std::move(block));
    }
  }
  return net;
}

}  // namespace plsm
