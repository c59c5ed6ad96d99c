#pragma once

#include "plsm/io.hpp"
#include "plsm/optimizer.hpp"
#include "plsm/simulator.hpp"

#include <string>
#include <vector>

namespace plsm {

/// (a_low, a_high) pairs that produce the four named edge-density levels
/// 0.04, 0.08, 0.12 and 0.16 under the simulation protocol.
std::pair<double, double> density_range(double density);

/// Defaults reproduce one cell of the simulation study: simulate, fit from
/// the spectral initialization, score against the truth. `sweep` picks the
/// variable the levels apply to ("n", "K", "m", "density" or empty for a
/// single setting).
struct ExperimentSpec {
  SimConfig base;
  std::string sweep;
  std::vector<double> levels;
  int reps = 20;
  double s_prop = 0.65;  // fitted sparsity budget as a proportion of nK
  FitConfig fit;
  int threads = 1;
};

struct ReplicationOutcome {
  std::string setting;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ErrorSummary errors;
  SupportRates support;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double density = 0.0;
};

/// One simulate -> initialize -> fit -> score run. rep_seed derives all of
/// the run's RNG streams.
ReplicationOutcome run_one_replication(const SimConfig& cfg, double s_prop,
                                       const FitConfig& fit_template,
                                       std::uint64_t rep_seed,
                                       const std::string& setting);

/// Full sweep; failed replications keep their error message and are
/// excluded from the table. Rows are ordered by (level, rep) regardless of
/// thread count.
std::vector<ReplicationOutcome> run_replications(const ExperimentSpec& spec);

io::ExperimentTable to_table(const std::vector<ReplicationOutcome>& runs);

/// Simple deterministic task fan-out: evaluates fn(0..count-1) on up to
/// `threads` workers; results vector is ordered by index.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace plsm
