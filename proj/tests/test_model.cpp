#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "plsm/model.hpp"
#include "plsm/rng.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace plsm;
using namespace plsm::testing;

namespace {

ModelParams two_node_params(double a1, double a2, double w1, double w2,
                            double gram) {
  // d = 2 with u1 = (1, 0), u2 = (gram, sqrt(1 - gram^2))
  ModelParams p;
  p.a.resize(2);
  p.a << a1, a2;
  p.W.resize(2, 1);
  p.W << w1, w2;
  p.U.resize(2, 2);
  p.U << 1.0, 0.0, gram, std::sqrt(1.0 - gram * gram);
  return p;
}

}  // namespace

TEST_CASE("log_odds reduces to the baseline when a weight is zero") {
  const ModelParams p = two_node_params(-0.7, 0.3, 0.0, 2.5, 0.4);
  CHECK(log_odds(p, 0, 1, 0) == doctest::Approx(-0.4).epsilon(1e-14));
}

TEST_CASE("log_odds with unit weights and identical positions is one") {
  ModelParams p = two_node_params(0.0, 0.0, 1.0, 1.0, 1.0);
  p.U.row(1) = p.U.row(0);
  CHECK(log_odds(p, 0, 1, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("log_odds hand example") {
  // a = (-1, -2), W = (2, 0.5), <u1, u2> = -0.5 -> -1 - 2 + 1 * (-0.5)
  const ModelParams p = two_node_params(-1.0, -2.0, 2.0, 0.5, -0.5);
  CHECK(log_odds(p, 0, 1, 0) == doctest::Approx(-3.5).epsilon(1e-14));
}

TEST_CASE("log_odds is symmetric and validates indices") {
  Rng rng(7);
  const ModelParams p = random_params(5, 3, 2, rng);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      for (int k = 0; k < 3; ++k) {
        CHECK(log_odds(p, i, j, k) == log_odds(p, j, i, k));
      }
    }
  }
  CHECK_THROWS_AS(log_odds(p, 0, 5, 0), std::out_of_range);
  CHECK_THROWS_AS(log_odds(p, 2, 2, 0), std::out_of_range);
  CHECK_THROWS_AS(log_odds(p, 0, 1, 3), std::out_of_range);
}

TEST_CASE("log_odds is invariant under rotation of the latent positions") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(2));
    ModelParams p = random_params(6, 3, d, rng);
    const Mat q = random_orthogonal(d, rng);
    ModelParams rotated = p;
    rotated.U = (p.U * q).eval();
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        for (int k = 0; k < 3; ++k) {
          CHECK(std::abs(log_odds(p, i, j, k) - log_odds(rotated, i, j, k)) <=
                1e-10);
        }
      }
    }
  }
}

TEST_CASE("edge_probability values") {
  ModelParams p = two_node_params(0.0, 0.0, 0.0, 0.0, 0.3);
  CHECK(edge_probability(p, 0, 1, 0) == doctest::Approx(0.5).epsilon(1e-14));

  p = two_node_params(0.5, 0.5, 0.0, 0.0, 0.3);  // log odds 1
  CHECK(edge_probability(p, 0, 1, 0) ==
        doctest::Approx(0.7310585786300049).epsilon(1e-14));

  // monotone approach to 1 and strict bounds at extreme inputs
  double prev = 0.5;
  for (double a : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    p = two_node_params(a, a, 0.0, 0.0, 0.3);
    const double v = edge_probability(p, 0, 1, 0);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
  p = two_node_params(250.0, 250.0, 0.0, 0.0, 0.3);
  CHECK(edge_probability(p, 0, 1, 0) < 1.0);
  p = two_node_params(-250.0, -250.0, 0.0, 0.0, 0.3);
  CHECK(edge_probability(p, 0, 1, 0) > 0.0);
}

TEST_CASE("neg_log_likelihood single-cell hand value") {
  ModelParams p = two_node_params(0.0, 0.0, 1.0, 1.0, 1.0);
  p.U.row(1) = p.U.row(0);
  MultiEdgeNetwork net = MultiEdgeNetwork::empty(2, 1);
  net.pairs[0](0, 0) = 1;
  const double expected = std::log(1.0 + std::exp(1.0)) - 1.0;
  CHECK(neg_log_likelihood(p, net, ObservationMask::full(net)) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.313262).epsilon(1e-5));
}

TEST_CASE("neg_log_likelihood of an empty mask is zero") {
  Rng rng(3);
  const MultiEdgeNetwork net = random_network(4, 2, 2, rng);
  const ModelParams p = random_params(4, 2, 2, rng);
  CHECK(neg_log_likelihood(p, net, ObservationMask::none(net)) == 0.0);
}

TEST_CASE("neg_log_likelihood matches the scalar-loop oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const MultiEdgeNetwork net = random_network(3, 2, 2, rng);
    const ModelParams p = random_params(3, 2, 2, rng);
    const ObservationMask mask = random_mask(net, 0.7, rng);
    const double fast = neg_log_likelihood(p, net, mask);
    const double slow = nll_oracle(p, net, mask);
    CHECK(std::abs(fast - slow) <= 1e-12 * std::max(1.0, std::abs(slow)));
  }
}

TEST_CASE("likelihood decomposes over a mask and its complement") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const MultiEdgeNetwork net = random_network(4, 3, 3, rng);
    const ModelParams p = random_params(4, 3, 2, rng);
    const ObservationMask mask = random_mask(net, 0.5, rng);
    const double whole =
        neg_log_likelihood(p, net, ObservationMask::full(net));
    const double part = neg_log_likelihood(p, net, mask);
    const double rest = neg_log_likelihood(p, net, mask.complement());
    CHECK(std::abs(whole - part - rest) <= 1e-12 * std::max(1.0, whole));
  }
}

TEST_CASE("neg_log_likelihood stays finite at extreme log odds") {
  ModelParams p = two_node_params(250.0, 250.0, 0.0, 0.0, 0.3);
  MultiEdgeNetwork net = MultiEdgeNetwork::empty(2, 1);
  const ObservationMask mask = ObservationMask::full(net);
  CHECK(std::isfinite(neg_log_likelihood(p, net, mask)));
  p.a << -250.0, -250.0;
  CHECK(std::isfinite(neg_log_likelihood(p, net, mask)));
}

TEST_CASE("gradients vanish when responses equal the model probabilities") {
  Rng rng(17);
  const MultiEdgeNetwork net = random_network(4, 2, 2, rng);
  const ModelParams p = random_params(4, 2, 2, rng);
  MaskedLikelihood like(net, ObservationMask::full(net));
  // continuous relaxation: replace the masked response sums with
  // count * psi(lambda) so every residual is exactly zero
  const auto pairs = all_pairs(net.n);
  for (std::size_t pr = 0; pr < pairs.size(); ++pr) {
    const auto [i, j] = pairs[pr];
    for (int k = 0; k < net.K; ++k) {
      like.cell_ysum()(pr, k) =
          like.cell_count()(pr, k) * sigmoid(log_odds(p, i, j, k));
    }
  }
  const Gradients g = like.gradients(p);
  CHECK(g.a.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g.W.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g.U.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(19);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));
    const int K = 1 + static_cast<int>(rng.below(4));
    const int d = 1 + static_cast<int>(rng.below(3));
    const MultiEdgeNetwork net = random_network(n, K, 3, rng);
    const ObservationMask mask = random_mask(net, 0.8, rng);
    ModelParams p = random_params(n, K, d, rng);
    const Gradients g = gradients(p, net, mask);

    const auto fd_check = [&](double analytic, double* coord) {
      const double save = *coord;
      *coord = save + h;
      const double up = neg_log_likelihood(p, net, mask);
      *coord = save - h;
      const double dn = neg_log_likelihood(p, net, mask);
      *coord = save;
      const double fd = (up - dn) / (2.0 * h);
      CHECK(std::abs(analytic - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    };

    for (int i = 0; i < n; ++i) fd_check(g.a[i], &p.a[i]);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < K; ++k) fd_check(g.W(i, k), &p.W(i, k));
    }
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) fd_check(g.U(i, c), &p.U(i, c));
    }
  }
}

TEST_CASE("gradient of the single-cell example") {
  ModelParams p = two_node_params(0.0, 0.0, 1.0, 1.0, 1.0);
  p.U.row(1) = p.U.row(0);
  MultiEdgeNetwork net = MultiEdgeNetwork::empty(2, 1);
  net.pairs[0](0, 0) = 1;
  const Gradients g = gradients(p, net, ObservationMask::full(net));
  const double expected = sigmoid(1.0) - 1.0;  // about -0.268941
  CHECK(g.a[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(g.a[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("check_parameter_space on zero parameters") {
  ModelParams p;
  p.a = Vec::Zero(3);
  p.W = Mat::Zero(3, 2);
  Rng rng(23);
  p.U = random_params(3, 2, 2, rng).U;
  const ParameterSpaceCheck chk = check_parameter_space(p, 1.0, 0.5);
  CHECK(chk.a_bound_ok);
  CHECK(chk.w_row_bound_ok);
  CHECK(chk.w_sparsity_ok);
  CHECK(chk.unit_rows_ok);
  CHECK_FALSE(chk.lambda_bound_ok);  // 0 > -(1 - C) M1
  CHECK_FALSE(chk.passes());
}

TEST_CASE("check_parameter_space flags non-unit rows") {
  Rng rng(29);
  ModelParams p = random_params(3, 2, 2, rng, 0.0);
  p.a.setZero();
  p.U.row(1) *= 0.5;
  const ParameterSpaceCheck chk = check_parameter_space(p, 1.0, 0.5);
  CHECK_FALSE(chk.unit_rows_ok);
}

TEST_CASE("check_parameter_space rejects bad C") {
  Rng rng(31);
  const ModelParams p = random_params(3, 2, 2, rng);
  CHECK_THROWS_AS(check_parameter_space(p, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_parameter_space(p, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("the three envelope bounds imply |log odds| <= M1") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));
    const int K = 1 + static_cast<int>(rng.below(4));
    ModelParams p = random_params(n, K, 2, rng);
    const double M1 = rng.uniform(0.5, 4.0);
    // scale a and W into the envelope
    const double amax = p.a.cwiseAbs().maxCoeff();
    p.a *= (M1 / 4.0) / std::max(amax, 1e-12) * rng.uniform(0.2, 1.0);
    const double wrow =
        std::sqrt(p.W.array().square().rowwise().sum().maxCoeff());
    p.W *= std::sqrt(M1 / 2.0) / std::max(wrow, 1e-12) * rng.uniform(0.2, 1.0);

    const ParameterSpaceCheck chk = check_parameter_space(p, M1, 0.5);
    REQUIRE(chk.a_bound_ok);
    REQUIRE(chk.w_row_bound_ok);
    REQUIRE(chk.unit_rows_ok);
    double max_abs = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = 0; k < K; ++k) {
          max_abs = std::max(max_abs, std::abs(log_odds(p, i, j, k)));
        }
      }
    }
    CHECK(max_abs <= M1 + 1e-12);
  }
}
