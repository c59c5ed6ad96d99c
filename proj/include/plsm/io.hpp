#pragma once

#include "plsm/metrics.hpp"
#include "plsm/optimizer.hpp"
#include "plsm/tuning.hpp"
#include "plsm/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace plsm::io {

/// Parse or write failure with file/line context.
struct FileFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Network file (PLSMNET 1): header line, "n K npairs", then per pair a
// record "i j m_ij" followed by m_ij lines of K space-separated binary
// digits. The writer emits every pair in lexicographic order; the reader
// accepts any lexicographically increasing subset and fills missing pairs
// with the all-zero single-row convention.
void write_network(const MultiEdgeNetwork& net, const std::string& path);
MultiEdgeNetwork read_network(const std::string& path);

// Model file (PLSMMODEL 1): dimensions, sorted "meta key value" lines, the
// baseline vector, positive W entries as triplets and dense U rows. Values
// are printed with 17 significant digits so finite doubles round-trip
// bitwise.
struct ModelFile {
  ModelParams params;
  std::map<std::string, std::string> meta;
};
void write_model(const ModelParams& params,
                 const std::map<std::string, std::string>& meta,
                 const std::string& path);
ModelFile read_model(const std::string& path);

/// Held-out cell mask: from each topic layer, round(fraction * layer cell
/// count) cells drawn without replacement, layers in topic order on one
/// seeded stream. Returns the mask of HELD-OUT cells (training mask is its
/// complement).
ObservationMask holdout_mask(const MultiEdgeNetwork& net, double fraction,
                             std::uint64_t seed);

struct Prediction {
  int i = 0, j = 0, l = 0, k = 0;
  double prob = 0.0;
};
void write_predictions(const std::vector<Prediction>& preds,
                       const std::string& path);
std::vector<Prediction> read_predictions(const std::string& path);

/// Iteration trace CSV: iter, objective, eta_a, eta_w, eta_u and e_t when
/// the report carries one.
void write_trace(const FitReport& rep, const std::string& path);

/// Deviance grid CSV: one row per (d, s) candidate with per-fold deviances,
/// the mean, and a selected flag.
void write_cv(const CvResult& cv, int folds, const std::string& path);

/// Precision-recall points CSV: threshold, precision, recall.
void write_pr(const PrCurve& curve, const std::string& path);

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" rule).
double quantile(std::vector<double> values, double p);

/// Raw per-replication metric rows plus per-setting aggregates
/// (mean and empirical 2.5/97.5 percent quantiles).
struct ExperimentTable {
  std::vector<std::string> columns;  // metric names
  struct Row {
    std::string setting;
    std::uint64_t seed = 0;
    std::vector<double> values;
  };
  std::vector<Row> rows;

  /// Aggregate value for one setting and column; kind is "mean", "q025" or
  /// "q975".
  double aggregate(const std::string& setting, const std::string& column,
                   const std::string& kind) const;
  std::vector<std::string> settings() const;
};
void write_experiment_table(const ExperimentTable& table,
                            const std::string& path);

std::string format_double(double v);  // shortest 17-significant-digit form

}  // namespace plsm::io
