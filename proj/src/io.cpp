#include "plsm/io.hpp"

#include "plsm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plsm::io {

namespace {

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& what) {
  throw FileFormatError(path + ":" + std::to_string(line) + ": " + what);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileFormatError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot read " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_network(const MultiEdgeNetwork& net, const std::string& path) {
  net.validate();
  std::ofstream out = open_out(path);
  out << "PLSMNET 1\n";
  out << net.n << ' ' << net.K << ' ' << net.pairs.size() << '\n';
  const auto pairs = all_pairs(net.n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const BinMat& block = net.pairs[p];
    out << pairs[p].first << ' ' << pairs[p].second << ' ' << block.rows()
        << '\n';
    for (Eigen::Index l = 0; l < block.rows(); ++l) {
      for (Eigen::Index k = 0; k < block.cols(); ++k) {
        out << (k ? " " : "") << int(block(l, k));
      }
      out << '\n';
    }
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

MultiEdgeNetwork read_network(const std::string& path) {
  std::ifstream in = open_in(path);
  int lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) fail(path, lineno, "unexpected end of file");
    ++lineno;
    return line;
  };

  {
    std::istringstream head(next_line());
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "PLSMNET" || version != 1) {
      fail(path, lineno, "not a PLSMNET version 1 file");
    }
  }
  int n = 0, K = 0;
  long npairs = 0;
  {
    std::istringstream head(next_line());
    if (!(head >> n >> K >> npairs) || n < 2 || K < 1 || npairs < 0) {
      fail(path, lineno, "bad dimensions header");
    }
  }
  if (npairs > num_pairs(n)) fail(path, lineno, "more records than pairs");

  MultiEdgeNetwork net = MultiEdgeNetwork::empty(n, K);
  int prev_i = -1, prev_j = -1;
  for (long rec = 0; rec < npairs; ++rec) {
    int i = 0, j = 0;
    long m = 0;
    {
      std::istringstream head(next_line());
      if (!(head >> i >> j >> m)) fail(path, lineno, "bad pair record");
    }
    if (i < 0 || j <= i || j >= n) fail(path, lineno, "pair out of range");
    if (std::make_pair(i, j) <= std::make_pair(prev_i, prev_j)) {
      fail(path, lineno, "pair records must be lexicographically increasing");
    }
    prev_i = i;
    prev_j = j;
    if (m < 1) fail(path, lineno, "each pair needs at least one row");
    BinMat block(m, K);
    for (long l = 0; l < m; ++l) {
      std::istringstream row(next_line());
      for (int k = 0; k < K; ++k) {
        int digit = -1;
        if (!(row >> digit) || (digit != 0 && digit != 1)) {
          fail(path, lineno, "edge values must be 0 or 1");
        }
        block(l, k) = static_cast<std::uint8_t>(digit);
      }
      int extra;
      if (row >> extra) fail(path, lineno, "too many values in edge row");
    }
    net.pairs[pair_index(n, i, j)] = std::move(block);
  }
  return net;
}

void write_model(const ModelParams& params,
                 const std::map<std::string, std::string>& meta,
                 const std::string& path) {
  if (!params.dims_consistent()) {
    throw std::invalid_argument("model parameters have inconsistent shapes");
  }
  if (params.min_w() < 0.0) {
    throw std::invalid_argument("model W has negative entries");
  }
  std::ofstream out = open_out(path);
  out << "PLSMMODEL 1\n";
  out << params.n() << ' ' << params.num_topics() << ' ' << params.dim()
      << '\n';
  for (const auto& [key, value] : meta) {
    out << "meta " << key << ' ' << value << '\n';
  }
  out << "a\n";
  for (int i = 0; i < params.n(); ++i) {
    out << format_double(params.a[i]) << '\n';
  }
  long nnz = 0;
  for (int i = 0; i < params.n(); ++i) {
    for (int k = 0; k < params.num_topics(); ++k) {
      if (params.W(i, k) != 0.0) ++nnz;
    }
  }
  out << "W " << nnz << '\n';
  for (int i = 0; i < params.n(); ++i) {
    for (int k = 0; k < params.num_topics(); ++k) {
      if (params.W(i, k) != 0.0) {
        out << i << ' ' << k << ' ' << format_double(params.W(i, k)) << '\n';
      }
    }
  }
  out << "U\n";
  for (int i = 0; i < params.n(); ++i) {
    for (int c = 0; c < params.dim(); ++c) {
      out << (c ? " " : "") << format_double(params.U(i, c));
    }
    out << '\n';
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

ModelFile read_model(const std::string& path) {
  std::ifstream in = open_in(path);
  int lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) fail(path, lineno, "unexpected end of file");
    ++lineno;
    return line;
  };

  {
    std::istringstream head(next_line());
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "PLSMMODEL" || version != 1) {
      fail(path, lineno, "not a PLSMMODEL version 1 file");
    }
  }
  int n = 0, K = 0, d = 0;
  {
    std::istringstream head(next_line());
    if (!(head >> n >> K >> d) || n < 1 || K < 1 || d < 1) {
      fail(path, lineno, "bad dimensions header");
    }
  }

  ModelFile file;
  // meta lines run until the "a" marker
  while (true) {
    next_line();
    if (line == "a") break;
    std::istringstream meta(line);
    std::string tag, key;
    if (!(meta >> tag >> key) || tag != "meta") {
      fail(path, lineno, "expected meta line or 'a' marker");
    }
    std::string value;
    std::getline(meta, value);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    file.meta[key] = value;
  }

  file.params.a.resize(n);
  for (int i = 0; i < n; ++i) {
    std::istringstream row(next_line());
    if (!(row >> file.params.a[i])) fail(path, lineno, "bad baseline value");
  }

  long nnz = 0;
  {
    std::istringstream head(next_line());
    std::string tag;
    if (!(head >> tag >> nnz) || tag != "W" || nnz < 0) {
      fail(path, lineno, "expected 'W <count>'");
    }
  }
  file.params.W = Mat::Zero(n, K);
  for (long t = 0; t < nnz; ++t) {
    std::istringstream row(next_line());
    int i = 0, k = 0;
    double v = 0.0;
    if (!(row >> i >> k >> v) || i < 0 || i >= n || k < 0 || k >= K) {
      fail(path, lineno, "bad W triplet");
    }
    if (!(v > 0.0)) fail(path, lineno, "W entries must be positive");
    file.params.W(i, k) = v;
  }

  if (next_line() != "U") fail(path, lineno, "expected 'U' marker");
  file.params.U.resize(n, d);
  for (int i = 0; i < n; ++i) {
    std::istringstream row(next_line());
    for (int c = 0; c < d; ++c) {
      if (!(row >> file.params.U(i, c))) {
        fail(path, lineno, "bad latent position row");
      }
    }
  }
  return file;
}

ObservationMask holdout_mask(const MultiEdgeNetwork& net, double fraction,
                             std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("holdout fraction must lie in [0, 1]");
  }
  ObservationMask mask = ObservationMask::none(net);
  Rng rng(mix_seed(seed, 0x401dULL));
  std::vector<std::pair<std::size_t, int>> layer_cells;  // (pair, row)
  for (int k = 0; k < net.K; ++k) {
    layer_cells.clear();
    for (std::size_t p = 0; p < net.pairs.size(); ++p) {
      for (int l = 0; l < net.m(static_cast<int>(p)); ++l) {
        layer_cells.emplace_back(p, l);
      }
    }
    const long want = std::lround(fraction * layer_cells.size());
    for (long t = 0; t < want; ++t) {
      const std::size_t j =
          t + rng.below(layer_cells.size() - static_cast<std::size_t>(t));
      std::swap(layer_cells[t], layer_cells[j]);
      mask.blocks[layer_cells[t].first](layer_cells[t].second, k) = 1;
    }
  }
  return mask;
}

void write_predictions(const std::vector<Prediction>& preds,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  out << "i,j,l,k,prob\n";
  for (const Prediction& p : preds) {
    out << p.i << ',' << p.j << ',' << p.l << ',' << p.k << ','
        << format_double(p.prob) << '\n';
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

std::vector<Prediction> read_predictions(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "i,j,l,k,prob") {
    throw FileFormatError(path + ": missing predictions header");
  }
  std::vector<Prediction> preds;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Prediction p;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf", &p.i, &p.j, &p.l, &p.k,
                    &p.prob) != 5) {
      fail(path, lineno, "bad prediction row");
    }
    preds.push_back(p);
  }
  return preds;
}

void write_trace(const FitReport& rep, const std::string& path) {
  std::ofstream out = open_out(path);
  const bool with_et = !rep.e_t.empty();
  out << "iter,objective,eta_a,eta_w,eta_u" << (with_et ? ",e_t" : "") << "\n";
  for (std::size_t t = 0; t < rep.objective.size(); ++t) {
    out << t << ',' << format_double(rep.objective[t]);
    if (t == 0 || t > rep.steps.size()) {
      out << ",,,";  // no accepted step recorded for this row
    } else {
      const StepSizes& st = rep.steps[t - 1];
      out << ',' << format_double(st.a) << ',' << format_double(st.W) << ','
          << format_double(st.U);
    }
    if (with_et) out << ',' << format_double(rep.e_t[t]);
    out << '\n';
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

void write_cv(const CvResult& cv, int folds, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "d,s,mean_deviance,selected";
  for (int f = 0; f < folds; ++f) out << ",dev_fold" << f;
  out << '\n';
  for (const CvCandidate& cand : cv.grid) {
    out << cand.d << ',' << cand.s << ',';
    out << (cand.failed ? "failed" : format_double(cand.mean_deviance));
    out << ','
        << ((!cand.failed && cand.d == cv.best_d && cand.s == cv.best_s) ? 1
                                                                         : 0);
    for (int f = 0; f < folds; ++f) {
      out << ',';
      if (f < static_cast<int>(cand.fold_deviance.size())) {
        out << format_double(cand.fold_deviance[f]);
      }
    }
    out << '\n';
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

void write_pr(const PrCurve& curve, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "threshold,precision,recall\n";
  for (const PrPoint& pt : curve.points) {
    out << format_double(pt.threshold) << ',' << format_double(pt.precision)
        << ',' << format_double(pt.recall) << '\n';
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

double ExperimentTable::aggregate(const std::string& setting,
                                  const std::string& column,
                                  const std::string& kind) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::invalid_argument("unknown column");
  const std::size_t c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> vals;
  for (const Row& row : rows) {
    if (row.setting == setting) vals.push_back(row.values[c]);
  }
  if (vals.empty()) throw std::invalid_argument("unknown setting");
  if (kind == "mean") {
    double acc = 0.0;
    for (double v : vals) acc += v;
    return acc / static_cast<double>(vals.size());
  }
  if (kind == "q025") return quantile(vals, 0.025);
  if (kind == "q975") return quantile(vals, 0.975);
  throw std::invalid_argument("unknown aggregate kind");
}

std::vector<std::string> ExperimentTable::settings() const {
  std::vector<std::string> out;
  for (const Row& row : rows) {
    if (std::find(out.begin(), out.end(), row.setting) == out.end()) {
      out.push_back(row.setting);
    }
  }
  return out;
}

void write_experiment_table(const ExperimentTable& table,
                            const std::string& path) {
  std::ofstream out = open_out(path);
  out << "kind,setting,seed";
  for (const std::string& c : table.columns) out << ',' << c;
  out << '\n';
  for (const auto& row : table.rows) {
    out << "raw," << row.setting << ',' << row.seed;
    for (double v : row.values) out << ',' << format_double(v);
    out << '\n';
  }
  for (const std::string& setting : table.settings()) {
    for (const char* kind : {"mean", "q025", "q975"}) {
      out << kind << ',' << setting << ',';
      for (const std::string& c : table.columns) {
        out << ',' << format_double(table.aggregate(setting, c, kind));
      }
      out << '\n';
    }
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

}  // namespace plsm::io
