#include "plsm/tuning.hpp"

#include "plsm/model.hpp"
#include "plsm/rng.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace plsm {

FoldPlan make_folds(const MultiEdgeNetwork& net, int L, std::uint64_t seed) {
  if (L < 2) throw std::invalid_argument("need at least two folds");
  const std::size_t cells = net.total_cells();
  if (static_cast<std::size_t>(L) > cells) {
    throw std::invalid_argument("more folds than likelihood cells");
  }
  std::vector<std::uint32_t> perm(cells);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(mix_seed(seed, 0xf01d5ULL));
  rng.shuffle(perm);

  FoldPlan plan;
  plan.L = L;
  plan.seed = seed;
  plan.fold_of.resize(cells);
  for (std::size_t t = 0; t < cells; ++t) {
    plan.fold_of[perm[t]] = static_cast<std::uint32_t>(t % L);
  }
  return plan;
}

ObservationMask fold_mask(const MultiEdgeNetwork& net, const FoldPlan& plan,
                          int fold) {
  if (fold < 0 || fold >= plan.L) throw std::invalid_argument("bad fold id");
  if (plan.fold_of.size() != net.total_cells()) {
    throw std::invalid_argument("fold plan does not match network");
  }
  ObservationMask mask = ObservationMask::none(net);
  std::size_t cell = 0;
  for (auto& block : mask.blocks) {
    for (Eigen::Index l = 0; l < block.rows(); ++l) {
      for (Eigen::Index k = 0; k < block.cols(); ++k, ++cell) {
        if (plan.fold_of[cell] == static_cast<std::uint32_t>(fold)) {
          block(l, k) = 1;
        }
      }
    }
  }
  return mask;
}

double binomial_deviance(const Vec& probs, const Vec& ys) {
  if (probs.size() != ys.size()) {
    throw std::invalid_argument("probs and outcomes must have equal length");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument("probabilities must lie strictly in (0, 1)");
    }
    const double y = ys[i];
    if (y != 0.0 && y != 1.0) {
      throw std::invalid_argument("outcomes must be 0 or 1");
    }
    acc += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return -2.0 * acc;
}

CvResult cross_validate(const MultiEdgeNetwork& net,
                        const std::vector<int>& d_grid,
                        const std::vector<int>& s_grid, int L,
                        const FitConfig& base, std::uint64_t seed) {
  if (d_grid.empty() || s_grid.empty()) {
    throw std::invalid_argument("candidate grids must be nonempty");
  }
  const FoldPlan plan = make_folds(net, L, seed);

  // validation masks and their complements are fixed across candidates
  std::vector<ObservationMask> val_masks, train_masks;
  std::size_t covered = 0;
  for (int f = 0; f < L; ++f) {
    val_masks.push_back(fold_mask(net, plan, f));
    train_masks.push_back(val_masks.back().complement());
    covered += val_masks.back().count();
    if (val_masks.back().count() + train_masks.back().count() !=
        net.total_cells()) {
      throw std::logic_error("fold masks do not partition the cell set");
    }
  }
  if (covered != net.total_cells()) {
    throw std::logic_error("folds do not cover every cell");
  }

  CvResult result;
  const auto pairs = all_pairs(net.n);
  for (const int d : d_grid) {
    for (const int s : s_grid) {
      CvCandidate cand;
      cand.d = d;
      cand.s = s;
      for (int f = 0; f < L && !cand.failed; ++f) {
        FitConfig cfg = base;
        cfg.d = d;
        cfg.s = s;
        cfg.seed = mix_seed(seed, 1000 + f);
        try {
          const ModelParams init =
              initialize_svt(net, d, s, mix_seed(seed, 2000 + f));
          if (std::holds_alternative<Backtracking>(cfg.step_mode)) {
            cfg.step_mode = calibrate_backtracking(
                net, train_masks[f], init, s,
                std::get<Backtracking>(cfg.step_mode));
          }
          const FitReport rep = fit(net, train_masks[f], cfg, init);

          // score the held-out cells
          std::vector<double> ps, ys;
          const ObservationMask& val = val_masks[f];
          for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [i, j] = pairs[p];
            const BinMat& block = net.pairs[p];
            const BinMat& vm = val.blocks[p];
            for (Eigen::Index l = 0; l < block.rows(); ++l) {
              for (int k = 0; k < net.K; ++k) {
                if (vm(l, k)) {
                  ps.push_back(edge_probability(rep.params, i, j, k));
                  ys.push_back(block(l, k));
                }
              }
            }
          }
          const Vec pv = Eigen::Map<const Vec>(ps.data(), ps.size());
          const Vec yv = Eigen::Map<const Vec>(ys.data(), ys.size());
          cand.fold_deviance.push_back(binomial_deviance(pv, yv));
        } catch (const DivergenceError& err) {
          std::cerr << "cv: candidate d=" << d << " s=" << s
                    << " excluded, fold " << f << " diverged: " << err.what()
                    << "\n";
          cand.failed = true;
        }
      }
      if (!cand.failed) {
        cand.mean_deviance =
            std::accumulate(cand.fold_deviance.begin(),
                            cand.fold_deviance.end(), 0.0) /
            static_cast<double>(L);
      }
      result.grid.push_back(std::move(cand));
    }
  }

  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const CvCandidate& cand : result.grid) {
    // grid order is (d asc, s asc), so strict < breaks ties toward
    // smaller d, then smaller s
    if (!cand.failed && cand.mean_deviance < best) {
      best = cand.mean_deviance;
      result.best_d = cand.d;
      result.best_s = cand.s;
      any = true;
    }
  }
  if (!any) throw DivergenceError(0);
  return result;
}

}  // namespace plsm
