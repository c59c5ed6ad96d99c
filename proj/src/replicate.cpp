#include "plsm/replicate.hpp"

#include "plsm/metrics.hpp"
#include "plsm/rng.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace plsm {

std::pair<double, double> density_range(double density) {
  const struct {
    double level;
    double lo, hi;
  } table[] = {
      {0.04, -3.5, -1.8},
      {0.08, -3.0, -1.0},
      {0.12, -2.0, -1.0},
      {0.16, -1.4, -0.9},
  };
  for (const auto& row : table) {
    if (std::abs(density - row.level) < 1e-9) return {row.lo, row.hi};
  }
  throw std::invalid_argument(
      "density must be one of 0.04, 0.08, 0.12, 0.16");
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&]() {
      for (int t = next.fetch_add(1); t < count; t = next.fetch_add(1)) {
        fn(t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

ReplicationOutcome run_one_replication(const SimConfig& cfg, double s_prop,
                                       const FitConfig& fit_template,
                                       std::uint64_t rep_seed,
                                       const std::string& setting) {
  ReplicationOutcome out;
  out.setting = setting;
  out.seed = rep_seed;
  try {
    SimConfig sim = cfg;
    sim.seed = mix_seed(rep_seed, 1);
    const ModelParams truth = gen_params(sim);
    const MultiEdgeNetwork net =
        gen_network(truth, sim.m, mix_seed(rep_seed, 2));
    out.density = net.density();

    const int nK = sim.n * sim.K;
    FitConfig fc = fit_template;
    fc.d = sim.d;
    fc.s = std::max<int>(1, std::lround(s_prop * nK));
    fc.seed = mix_seed(rep_seed, 4);

    const ObservationMask mask = ObservationMask::full(net);
    const ModelParams init =
        initialize_svt(net, fc.d, fc.s, mix_seed(rep_seed, 3));
    if (std::holds_alternative<Backtracking>(fc.step_mode)) {
      fc.step_mode = calibrate_backtracking(
          net, mask, init, fc.s, std::get<Backtracking>(fc.step_mode));
    }
    const FitReport rep = fit(net, mask, fc, init);

    out.errors = relative_errors(rep.params, truth);
    out.support = support_rates(rep.params.W, truth.W);
    out.iterations = rep.iterations;
    out.converged = rep.converged;
    out.objective = rep.objective.back();
    out.ok = true;
  } catch (const std::exception& err) {
    out.ok = false;
    out.error = err.what();
  }
  return out;
}

namespace {

SimConfig apply_level(const SimConfig& base, const std::string& sweep,
                      double level) {
  SimConfig cfg = base;
  if (sweep == "n") {
    cfg.n = static_cast<int>(std::lround(level));
  } else if (sweep == "K") {
    cfg.K = static_cast<int>(std::lround(level));
  } else if (sweep == "m") {
    cfg.m = static_cast<int>(std::lround(level));
  } else if (sweep == "density") {
    const auto [lo, hi] = density_range(level);
    cfg.a_low = lo;
    cfg.a_high = hi;
  } else if (!sweep.empty()) {
    throw std::invalid_argument("sweep must be one of n, K, m, density");
  }
  return cfg;
}

std::string setting_label(const std::string& sweep, double level) {
  if (sweep.empty()) return "base";
  std::ostringstream label;
  label << sweep << '=' << level;
  return label.str();
}

}  // namespace

std::vector<ReplicationOutcome> run_replications(const ExperimentSpec& spec) {
  if (spec.reps < 1) throw std::invalid_argument("need at least one rep");
  std::vector<double> levels = spec.levels;
  if (spec.sweep.empty()) {
    levels = {0.0};
  } else if (levels.empty()) {
    throw std::invalid_argument("sweep requires at least one level");
  }

  struct Task {
    SimConfig cfg;
    std::uint64_t seed;
    std::string setting;
  };
  std::vector<Task> tasks;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const SimConfig cfg = apply_level(spec.base, spec.sweep, levels[li]);
    for (int r = 0; r < spec.reps; ++r) {
      tasks.push_back(
          {cfg,
           mix_seed(spec.base.seed,
                    (static_cast<std::uint64_t>(li) << 20) |
                        static_cast<std::uint64_t>(r)),
           setting_label(spec.sweep, levels[li])});
    }
  }

  std::vector<ReplicationOutcome> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), spec.threads, [&](int t) {
    out[t] = run_one_replication(tasks[t].cfg, spec.s_prop, spec.fit,
                                 tasks[t].seed, tasks[t].setting);
  });
  return out;
}

io::ExperimentTable to_table(const std::vector<ReplicationOutcome>& runs) {
  io::ExperimentTable table;
  table.columns = {"rel_a",      "rel_w",     "rel_u",    "rel_prob",
                   "tpr",        "fpr",       "iterations", "converged",
                   "objective",  "density"};
  for (const ReplicationOutcome& run : runs) {
    if (!run.ok) continue;
    table.rows.push_back(
        {run.setting,
         run.seed,
         {run.errors.rel_a, run.errors.rel_w, run.errors.rel_u,
          run.errors.rel_prob, run.support.tpr, run.support.fpr,
          static_cast<double>(run.iterations),
          run.converged ? 1.0 : 0.0, run.objective, run.density}});
  }
  return table;
}

}  // namespace plsm
