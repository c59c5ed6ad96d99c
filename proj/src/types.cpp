#include "plsm/types.hpp"

namespace plsm {

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  out.reserve(num_pairs(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      out.emplace_back(i, j);
    }
  }
  return out;
}

double ModelParams::max_unit_row_violation() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    worst = std::max(worst, std::abs(U.row(i).norm() - 1.0));
  }
  return worst;
}

bool ModelParams::valid(double tol) const {
  return dims_consistent() && min_w() >= 0.0 &&
         max_unit_row_violation() <= tol;
}

MultiEdgeNetwork MultiEdgeNetwork::empty(int n, int K) {
  MultiEdgeNetwork net;
  net.n = n;
  net.K = K;
  net.pairs.assign(num_pairs(n), BinMat::Zero(1, K));
  return net;
}

std::size_t MultiEdgeNetwork::total_cells() const {
  std::size_t cells = 0;
  for (const auto& block : pairs) {
    cells += static_cast<std::size_t>(block.size());
  }
  return cells;
}

double MultiEdgeNetwork::density() const {
  std::size_t ones = 0;
  for (const auto& block : pairs) {
    ones += static_cast<std::size_t>(block.cast<std::uint32_t>().sum());
  }
  return total_cells() ? static_cast<double>(ones) / total_cells() : 0.0;
}

void MultiEdgeNetwork::validate() const {
  if (n < 2) throw std::invalid_argument("network needs at least two nodes");
  if (K < 1) throw std::invalid_argument("network needs at least one topic");
  if (static_cast<int>(pairs.size()) != num_pairs(n)) {
    throw std::invalid_argument("pair count does not match node count");
  }
  for (const auto& block : pairs) {
    if (block.rows() < 1) {
      throw std::invalid_argument("every pair needs at least one row");
    }
    if (block.cols() != K) {
      throw std::invalid_argument("pair block has wrong topic count");
    }
    for (Eigen::Index l = 0; l < block.rows(); ++l) {
      for (Eigen::Index k = 0; k < block.cols(); ++k) {
        if (block(l, k) > 1) {
          throw std::invalid_argument("edge values must be 0 or 1");
        }
      }
    }
  }
}

bool MultiEdgeNetwork::operator==(const MultiEdgeNetwork& o) const {
  if (n != o.n || K != o.K || pairs.size() != o.pairs.size()) return false;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].rows() != o.pairs[p].rows()) return false;
    if (pairs[p] != o.pairs[p]) return false;
  }
  return true;
}

ObservationMask ObservationMask::full(const MultiEdgeNetwork& net) {
  ObservationMask mask;
  mask.blocks.reserve(net.pairs.size());
  for (const auto& block : net.pairs) {
    mask.blocks.push_back(BinMat::Ones(block.rows(), block.cols()));
  }
  return mask;
}

ObservationMask ObservationMask::none(const MultiEdgeNetwork& net) {
  ObservationMask mask;
  mask.blocks.reserve(net.pairs.size());
  for (const auto& block : net.pairs) {
    mask.blocks.push_back(BinMat::Zero(block.rows(), block.cols()));
  }
  return mask;
}

ObservationMask ObservationMask::complement() const {
  ObservationMask out;
  out.blocks.reserve(blocks.size());
  for (const auto& block : blocks) {
    out.blocks.push_back(
        (BinMat::Ones(block.rows(), block.cols()) - block).eval());
  }
  return out;
}

std::size_t ObservationMask::count() const {
  std::size_t c = 0;
  for (const auto& block : blocks) {
    c += static_cast<std::size_t>(block.cast<std::uint32_t>().sum());
  }
  return c;
}

bool ObservationMask::shape_matches(const MultiEdgeNetwork& net) const {
  if (blocks.size() != net.pairs.size()) return false;
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    if (blocks[p].rows() != net.pairs[p].rows() ||
        blocks[p].cols() != net.pairs[p].cols()) {
      return false;
    }
  }
  return true;
}

}  // namespace plsm
