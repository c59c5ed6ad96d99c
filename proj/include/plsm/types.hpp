#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plsm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BinMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Objective became non-finite during optimization. Carries the objective
/// values reached before the failure so callers can keep the trace.
struct DivergenceError : std::runtime_error {
  int iteration;
  std::vector<double> objective;
  explicit DivergenceError(int iter, std::vector<double> trace = {})
      : std::runtime_error("objective diverged (non-finite) at iteration " +
                           std::to_string(iter)),
        iteration(iter),
        objective(std::move(trace)) {}
};

/// A latent-position row collapsed to the zero vector and cannot be
/// projected to the sphere.
struct DegenerateRowError : std::runtime_error {
  int row;
  explicit DegenerateRowError(int r)
      : std::runtime_error("row " + std::to_string(r) +
                           " is the zero vector; cannot normalize"),
        row(r) {}
};

/// A rate (TPR/FPR, precision/recall) has an empty denominator class.
struct UndefinedRateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Linear index of unordered pair (i, j), i < j, in lexicographic order.
inline int pair_index(int n, int i, int j) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline int num_pairs(int n) { return n * (n - 1) / 2; }

/// All pairs (i, j), i < j, in lexicographic order; index p matches
/// pair_index(n, i, j).
std::vector<std::pair<int, int>> all_pairs(int n);

/// Model parameter triple: baseline effects, nonnegative topic preference
/// weights, latent positions on the unit sphere.
struct ModelParams {
  Vec a;  // n
  Mat W;  // n x K, entries >= 0
  Mat U;  // n x d, rows unit norm

  int n() const { return static_cast<int>(a.size()); }
  int num_topics() const { return static_cast<int>(W.cols()); }
  int dim() const { return static_cast<int>(U.cols()); }

  bool dims_consistent() const {
    return W.rows() == a.size() && U.rows() == a.size();
  }
  /// Largest deviation of any row of U from unit Euclidean norm.
  double max_unit_row_violation() const;
  double min_w() const { return W.size() ? W.minCoeff() : 0.0; }
  /// Type invariants: consistent dims, W >= 0, unit rows within tol.
  bool valid(double tol = 1e-10) const;
};

/// n nodes, K topics; for every unordered pair (i, j) with i < j an
/// m_ij x K binary matrix of per-document topic indicators. A pair with no
/// exchange is stored as a single all-zero row (m_ij = 1).
struct MultiEdgeNetwork {
  int n = 0;
  int K = 0;
  std::vector<BinMat> pairs;  // index p = pair_index(n, i, j)

  /// Network with every pair set to one all-zero row.
  static MultiEdgeNetwork empty(int n, int K);

  int m(int p) const { return static_cast<int>(pairs[p].rows()); }
  std::size_t total_cells() const;
  /// Fraction of ones over all cells.
  double density() const;
  /// Structural invariants: pair count, m_ij >= 1, entries in {0,1}.
  void validate() const;

  bool operator==(const MultiEdgeNetwork& o) const;
};

/// Indicator over likelihood cells (i, j, l, k); blocks align with
/// MultiEdgeNetwork::pairs. 1 = cell included in the likelihood sum.
struct ObservationMask {
  std::vector<BinMat> blocks;

  static ObservationMask full(const MultiEdgeNetwork& net);
  static ObservationMask none(const MultiEdgeNetwork& net);
  ObservationMask complement() const;
  std::size_t count() const;
  bool shape_matches(const MultiEdgeNetwork& net) const;
};

}  // namespace plsm
