#pragma once

#include "plsm/optimizer.hpp"
#include "plsm/types.hpp"

#include <cstdint>
#include <vector>

namespace plsm {

/// Assignment of every likelihood cell (i, j, l, k) to exactly one of L
/// folds. Cells are indexed linearly: pairs in lexicographic order, then
/// document, then topic.
struct FoldPlan {
  int L = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> fold_of;  // linear cell index -> fold
};

/// Uniformly random partition of all cells into L folds; fold sizes differ
/// by at most one. Deterministic under seed.
FoldPlan make_folds(const MultiEdgeNetwork& net, int L, std::uint64_t seed);

/// Validation mask for one fold (1 on the fold's cells).
ObservationMask fold_mask(const MultiEdgeNetwork& net, const FoldPlan& plan,
                          int fold);

/// -2 * sum [ y log p + (1-y) log(1-p) ]; probabilities must lie strictly
/// inside (0, 1).
double binomial_deviance(const Vec& probs, const Vec& ys);

struct CvCandidate {
  int d = 0;
  int s = 0;
  std::vector<double> fold_deviance;
  double mean_deviance = 0.0;
  bool failed = false;  // a fold fit diverged; excluded from selection
};

struct CvResult {
  std::vector<CvCandidate> grid;  // d-major, then s, matching the input grids
  int best_d = 0;
  int best_s = 0;
};

/// Edge cross-validation over the (d, s) grid: for every candidate and
/// fold, fit on the complement of the fold and score the held-out cells by
/// binomial deviance. Selects the candidate with the smallest mean
/// deviance; ties break toward smaller d, then smaller s.
CvResult cross_validate(const MultiEdgeNetwork& net,
                        const std::vector<int>& d_grid,
                        const std::vector<int>& s_grid, int L,
                        const FitConfig& base, std::uint64_t seed);

}  // namespace plsm
