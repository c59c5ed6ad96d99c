#pragma once

#include "plsm/types.hpp"

#include <cstdint>

namespace plsm {

/// Synthetic data protocol: a ~ Uniform(a_low, a_high); U rows standard
/// d-variate normal scaled to the unit sphere; W has exactly
/// round(q0 * n * K) nonzero entries at uniformly random positions with
/// values ~ Uniform(w_low, w_high).
struct SimConfig {
  int n = 100;
  int K = 10;
  int d = 2;
  int m = 1;          // documents per pair
  double q0 = 0.7;    // nonzero proportion of W
  double a_low = -3.0;
  double a_high = -1.0;
  double w_low = 0.5;
  double w_high = 3.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Ground-truth parameters. One RNG stream from cfg.seed, consumed in a
/// fixed order: a entries, U rows, W support, W values (row-major over the
/// chosen support).
ModelParams gen_params(const SimConfig& cfg);

/// Draws y ~ Bernoulli(sigmoid(log_odds)) for every pair (lexicographic,
/// i < j), document, topic - one uniform per cell in that order.
MultiEdgeNetwork gen_network(const ModelParams& truth, int m,
                             std::uint64_t seed);

}  // namespace plsm
