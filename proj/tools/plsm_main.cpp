#include "CLI11.hpp"

#include "plsm/io.hpp"
#include "plsm/metrics.hpp"
#include "plsm/model.hpp"
#include "plsm/optimizer.hpp"
#include "plsm/replicate.hpp"
#include "plsm/rng.hpp"
#include "plsm/simulator.hpp"
#include "plsm/tuning.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace plsm;

// Seed derivation shared by every subcommand (documented in the README):
// params = mix(seed, 1), edges = mix(seed, 2), spectral init = mix(seed, 3),
// fit = mix(seed, 4), cv folds = mix(seed, 7).
constexpr std::uint64_t kParamsStream = 1;
constexpr std::uint64_t kEdgesStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kFitStream = 4;
constexpr std::uint64_t kCvStream = 7;

int resolve_sparsity(int s, double s_prop, int n, int K) {
  const int nK = n * K;
  if (s > 0) {
    if (s > nK) throw std::invalid_argument("--s exceeds nK");
    return s;
  }
  return std::max<int>(1, std::lround(s_prop * nK));
}

StepMode make_step_mode(const std::vector<double>& fixed_steps) {
  if (fixed_steps.empty()) return Backtracking{};
  if (fixed_steps.size() != 3) {
    throw std::invalid_argument("--fixed-steps needs three values: a,w,u");
  }
  return StepSizes{fixed_steps[0], fixed_steps[1], fixed_steps[2]};
}

struct FitInputs {
  MultiEdgeNetwork net;
  ObservationMask train;
  std::size_t held_cells = 0;
};

FitInputs load_fit_inputs(const std::string& net_path, double holdout,
                          std::uint64_t mask_seed) {
  FitInputs in;
  in.net = io::read_network(net_path);
  if (holdout > 0.0) {
    const ObservationMask held = io::holdout_mask(in.net, holdout, mask_seed);
    in.held_cells = held.count();
    in.train = held.complement();
  } else {
    in.train = ObservationMask::full(in.net);
  }
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PLSM: preferential latent space models for multi-layer "
               "binary networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key=value config file");
  app.get_config_formatter_base()->comment('#');

  // ---- simulate ----------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "simulate", "generate a synthetic network with known parameters");
  SimConfig sim;
  double sim_density = 0.0;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "sim";
  sim_cmd->add_option("--n", sim.n, "node count");
  sim_cmd->add_option("--K", sim.K, "topic count");
  sim_cmd->add_option("--d", sim.d, "latent dimension");
  sim_cmd->add_option("--m", sim.m, "documents per pair");
  sim_cmd->add_option("--q0", sim.q0, "nonzero proportion of W");
  sim_cmd->add_option("--a-low", sim.a_low, "baseline lower bound");
  sim_cmd->add_option("--a-high", sim.a_high, "baseline upper bound");
  sim_cmd->add_option("--density", sim_density,
                      "named density level (0.04/0.08/0.12/0.16); overrides "
                      "--a-low/--a-high");
  sim_cmd->add_option("--seed", sim_seed, "base seed");
  sim_cmd->add_option("--out", sim_out, "output prefix");
  sim_cmd->callback([&]() {
    if (sim_density > 0.0) {
      const auto [lo, hi] = density_range(sim_density);
      sim.a_low = lo;
      sim.a_high = hi;
    }
    sim.seed = mix_seed(sim_seed, kParamsStream);
    const ModelParams truth = gen_params(sim);
    const MultiEdgeNetwork net =
        gen_network(truth, sim.m, mix_seed(sim_seed, kEdgesStream));
    io::write_network(net, sim_out + ".net.txt");
    io::write_model(truth,
                    {{"kind", "ground-truth"},
                     {"seed", std::to_string(sim_seed)},
                     {"m", std::to_string(sim.m)}},
                    sim_out + ".truth.model.txt");
    std::printf("wrote %s.net.txt and %s.truth.model.txt (density %.4f)\n",
                sim_out.c_str(), sim_out.c_str(), net.density());
  });

  // ---- fit ---------------------------------------------------------------
  auto* fit_cmd =
      app.add_subcommand("fit", "fit the model by projected gradient descent");
  std::string fit_net, fit_out = "fit", fit_truth;
  int fit_d = 2, fit_s = 0, fit_iters = 2000;
  double fit_sprop = 0.65, fit_tol = 1e-7, fit_holdout = 0.0;
  std::uint64_t fit_seed = 1, fit_mask_seed = 1;
  std::vector<double> fit_fixed;
  bool fit_no_calibrate = false;
  fit_cmd->add_option("--net", fit_net, "network file")->required();
  fit_cmd->add_option("--d", fit_d, "latent dimension");
  fit_cmd->add_option("--s", fit_s, "sparsity budget (count; 0 = use --s-prop)");
  fit_cmd->add_option("--s-prop", fit_sprop, "sparsity budget as share of nK");
  fit_cmd->add_option("--tol", fit_tol, "relative objective-change stop");
  fit_cmd->add_option("--max-iters", fit_iters, "iteration cap");
  fit_cmd->add_option("--holdout", fit_holdout,
                      "per-layer share of cells to exclude from training");
  fit_cmd->add_option("--mask-seed", fit_mask_seed, "holdout mask seed");
  fit_cmd->add_option("--seed", fit_seed, "base seed");
  fit_cmd->add_option("--fixed-steps", fit_fixed,
                      "fixed step sizes a,w,u (default: backtracking)")
      ->delimiter(',');
  fit_cmd->add_flag("--no-calibrate", fit_no_calibrate,
                    "skip the backtracking step-size calibration probe");
  fit_cmd->add_option("--truth", fit_truth,
                      "ground-truth model file; adds the e_t trace and an "
                      "error summary");
  fit_cmd->add_option("--out", fit_out, "output prefix");
  fit_cmd->callback([&]() {
    const FitInputs in =
        load_fit_inputs(fit_net, fit_holdout, fit_mask_seed);
    FitConfig cfg;
    cfg.d = fit_d;
    cfg.s = resolve_sparsity(fit_s, fit_sprop, in.net.n, in.net.K);
    cfg.tol = fit_tol;
    cfg.max_iters = fit_iters;
    cfg.seed = mix_seed(fit_seed, kFitStream);
    cfg.step_mode = make_step_mode(fit_fixed);
    const ModelParams init = initialize_svt(in.net, cfg.d, cfg.s,
                                            mix_seed(fit_seed, kInitStream));
    if (!fit_no_calibrate &&
        std::holds_alternative<Backtracking>(cfg.step_mode)) {
      cfg.step_mode = calibrate_backtracking(
          in.net, in.train, init, cfg.s, std::get<Backtracking>(cfg.step_mode));
    }

    ModelParams truth;
    const bool have_truth = !fit_truth.empty();
    if (have_truth) truth = io::read_model(fit_truth).params;

    FitReport rep;
    try {
      rep = fit(in.net, in.train, cfg, init, have_truth ? &truth : nullptr);
    } catch (const DivergenceError& err) {
      FitReport partial;
      partial.objective = err.objective;
      io::write_trace(partial, fit_out + ".trace.csv");
      std::fprintf(stderr, "fit: %s (trace retained in %s.trace.csv)\n",
                   err.what(), fit_out.c_str());
      throw;
    }

    io::write_model(
        rep.params,
        {{"kind", "fit"},
         {"d", std::to_string(cfg.d)},
         {"s", std::to_string(cfg.s)},
         {"seed", std::to_string(fit_seed)},
         {"objective", io::format_double(rep.objective.back())},
         {"iterations", std::to_string(rep.iterations)},
         {"converged", rep.converged ? "1" : "0"}},
        fit_out + ".model.txt");
    io::write_trace(rep, fit_out + ".trace.csv");
    std::printf("fit: objective %.6f after %d iterations (%s)\n",
                rep.objective.back(), rep.iterations,
                rep.converged ? "converged" : "iteration cap");
    if (have_truth) {
      const ErrorSummary err = relative_errors(rep.params, truth);
      const SupportRates sr = support_rates(rep.params.W, truth.W);
      std::printf(
          "errors vs truth: rel_a %.5f rel_w %.5f rel_u %.5f rel_prob %.5f "
          "tpr %.4f fpr %.4f\n",
          err.rel_a, err.rel_w, err.rel_u, err.rel_prob, sr.tpr, sr.fpr);
    }
  });

  // ---- cv ----------------------------------------------------------------
  auto* cv_cmd = app.add_subcommand(
      "cv", "select d and s by edge cross-validation (binomial deviance)");
  std::string cv_net, cv_out = "cv.csv";
  std::vector<int> cv_dgrid = {1, 2, 3, 4};
  std::vector<int> cv_sgrid;
  std::vector<double> cv_sprops = {0.4, 0.55, 0.7, 0.85, 1.0};
  int cv_folds = 5, cv_iters = 600;
  double cv_tol = 1e-5;
  std::uint64_t cv_seed = 1;
  cv_cmd->add_option("--net", cv_net, "network file")->required();
  cv_cmd->add_option("--d-grid", cv_dgrid, "latent dimension candidates")
      ->delimiter(',');
  cv_cmd->add_option("--s-grid", cv_sgrid,
                     "sparsity candidates as counts (overrides --s-props)")
      ->delimiter(',');
  cv_cmd->add_option("--s-props", cv_sprops,
                     "sparsity candidates as shares of nK")
      ->delimiter(',');
  cv_cmd->add_option("--folds", cv_folds, "fold count");
  cv_cmd->add_option("--tol", cv_tol, "per-fit stopping tolerance");
  cv_cmd->add_option("--max-iters", cv_iters, "per-fit iteration cap");
  cv_cmd->add_option("--seed", cv_seed, "base seed");
  cv_cmd->add_option("--out", cv_out, "deviance grid CSV");
  cv_cmd->callback([&]() {
    const MultiEdgeNetwork net = io::read_network(cv_net);
    std::vector<int> sgrid = cv_sgrid;
    if (sgrid.empty()) {
      for (const double prop : cv_sprops) {
        sgrid.push_back(
            std::max<int>(1, std::lround(prop * net.n * net.K)));
      }
    }
    FitConfig base;
    base.tol = cv_tol;
    base.max_iters = cv_iters;
    const CvResult cv = cross_validate(net, cv_dgrid, sgrid, cv_folds, base,
                                       mix_seed(cv_seed, kCvStream));
    io::write_cv(cv, cv_folds, cv_out);
    std::printf("cv: selected d=%d s=%d (grid in %s)\n", cv.best_d, cv.best_s,
                cv_out.c_str());
  });

  // ---- predict -----------------------------------------------------------
  auto* pred_cmd = app.add_subcommand(
      "predict", "predict probabilities for held-out cells");
  std::string pred_model, pred_net, pred_out = "predictions.csv";
  double pred_holdout = 0.2;
  std::uint64_t pred_mask_seed = 1;
  pred_cmd->add_option("--model", pred_model, "fitted model file")->required();
  pred_cmd->add_option("--net", pred_net, "network file")->required();
  pred_cmd->add_option("--holdout", pred_holdout,
                       "per-layer share of held-out cells");
  pred_cmd->add_option("--mask-seed", pred_mask_seed,
                       "holdout mask seed (must match the fit)");
  pred_cmd->add_option("--out", pred_out, "predictions CSV");
  pred_cmd->callback([&]() {
    const ModelParams params = io::read_model(pred_model).params;
    const MultiEdgeNetwork net = io::read_network(pred_net);
    if (params.n() != net.n || params.num_topics() != net.K) {
      throw std::invalid_argument(
          "model and network dimensions disagree");
    }
    const ObservationMask held =
        io::holdout_mask(net, pred_holdout, pred_mask_seed);
    std::vector<io::Prediction> preds;
    const auto pairs = all_pairs(net.n);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const BinMat& block = held.blocks[p];
      for (Eigen::Index l = 0; l < block.rows(); ++l) {
        for (int k = 0; k < net.K; ++k) {
          if (block(l, k)) {
            preds.push_back({i, j, static_cast<int>(l), k,
                             edge_probability(params, i, j, k)});
          }
        }
      }
    }
    io::write_predictions(preds, pred_out);
    std::printf("predict: %zu held-out cells -> %s\n", preds.size(),
                pred_out.c_str());
  });

  // ---- eval --------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand(
      "eval", "precision-recall of predictions against the network");
  std::string eval_pred, eval_net, eval_out = "pr.csv";
  eval_cmd->add_option("--pred", eval_pred, "predictions CSV")->required();
  eval_cmd->add_option("--net", eval_net, "network file")->required();
  eval_cmd->add_option("--out", eval_out, "PR curve CSV");
  eval_cmd->callback([&]() {
    const auto preds = io::read_predictions(eval_pred);
    const MultiEdgeNetwork net = io::read_network(eval_net);
    Vec scores(preds.size()), ys(preds.size());
    for (std::size_t t = 0; t < preds.size(); ++t) {
      const io::Prediction& p = preds[t];
      if (p.i < 0 || p.j <= p.i || p.j >= net.n || p.k < 0 || p.k >= net.K) {
        throw std::invalid_argument("prediction cell out of range");
      }
      const BinMat& block = net.pairs[pair_index(net.n, p.i, p.j)];
      if (p.l < 0 || p.l >= block.rows()) {
        throw std::invalid_argument("prediction document index out of range");
      }
      scores[t] = p.prob;
      ys[t] = block(p.l, p.k);
    }
    const PrCurve curve = precision_recall(scores, ys);
    io::write_pr(curve, eval_out);
    std::printf("eval: %zu cells, PR-AUC %.6f -> %s\n", preds.size(),
                curve.auc, eval_out.c_str());
  });

  // ---- replicate ---------------------------------------------------------
  auto* rep_cmd = app.add_subcommand(
      "replicate", "simulation study: simulate, fit and score repeatedly");
  ExperimentSpec spec;
  double rep_density = 0.08;
  std::uint64_t rep_seed = 1;
  std::string rep_out = "experiment.csv";
  bool rep_sequential = false;
  rep_cmd->add_option("--n", spec.base.n, "node count");
  rep_cmd->add_option("--K", spec.base.K, "topic count");
  rep_cmd->add_option("--d", spec.base.d, "latent dimension");
  rep_cmd->add_option("--m", spec.base.m, "documents per pair");
  rep_cmd->add_option("--q0", spec.base.q0, "nonzero proportion of W");
  rep_cmd->add_option("--density", rep_density,
                      "named base density level (0.04/0.08/0.12/0.16)");
  rep_cmd->add_option("--sweep", spec.sweep,
                      "sweep variable: n, K, m or density");
  rep_cmd->add_option("--levels", spec.levels, "sweep levels")
      ->delimiter(',');
  rep_cmd->add_option("--reps", spec.reps, "replications per level");
  rep_cmd->add_option("--s-prop", spec.s_prop,
                      "fitted sparsity budget as share of nK");
  rep_cmd->add_option("--tol", spec.fit.tol, "fit stopping tolerance");
  rep_cmd->add_option("--max-iters", spec.fit.max_iters, "fit iteration cap");
  rep_cmd->add_option("--seed", rep_seed, "base seed");
  rep_cmd
      ->add_option("--threads", spec.threads, "worker threads")
      ->envname("PLSM_THREADS");
  rep_cmd->add_flag("--sequential", rep_sequential,
                    "single-threaded bit-exact mode");
  rep_cmd->add_option("--out", rep_out, "experiment table CSV");
  rep_cmd->callback([&]() {
    const auto [lo, hi] = density_range(rep_density);
    spec.base.a_low = lo;
    spec.base.a_high = hi;
    spec.base.seed = rep_seed;
    if (rep_sequential) spec.threads = 1;
    const auto runs = run_replications(spec);
    int failures = 0;
    for (const auto& run : runs) {
      if (!run.ok) {
        ++failures;
        std::fprintf(stderr, "replicate: %s seed=%llu failed: %s\n",
                     run.setting.c_str(),
                     static_cast<unsigned long long>(run.seed),
                     run.error.c_str());
      }
    }
    io::write_experiment_table(to_table(runs), rep_out);
    std::printf("replicate: %zu runs (%d failed) -> %s\n", runs.size(),
                failures, rep_out.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;  // numerical failure
  } catch (const UndefinedRateError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
