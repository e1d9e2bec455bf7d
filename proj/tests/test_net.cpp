#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sinr/bessel.hpp"
#include "sinr/gradcheck.hpp"
#include "sinr/net.hpp"
#include "sinr/net_json.hpp"

using namespace sinr;

namespace {

SinusoidalNet scalar_net(double w, double c = 1.0, double e = 0.0) {
  SinusoidalNet net;
  net.bank.freq = MatrixXi::Constant(1, 1, 1);
  net.bank.period = 2.0 * std::numbers::pi;
  net.bank.shifts = VectorXd::Zero(1);
  net.hidden.push_back({MatrixXd::Constant(1, 1, w), VectorXd::Zero(1)});
  net.C = MatrixXd::Constant(1, 1, c);
  net.e = VectorXd::Constant(1, e);
  return net;
}

MatrixXi bank2(std::initializer_list<std::pair<int, int>> rows) {
  MatrixXi f(static_cast<Eigen::Index>(rows.size()), 2);
  int i = 0;
  for (auto [a, b] : rows) {
    f(i, 0) = a;
    f(i, 1) = b;
    ++i;
  }
  return f;
}

}  // namespace

TEST(Forward, ZeroHiddenWeights) {
  EXPECT_EQ(forward_point(scalar_net(0.0), VectorXd::Constant(1, 0.3)), 0.0);
}

TEST(Forward, BiasPassthrough) {
  EXPECT_EQ(forward_point(scalar_net(0.0, 2.0, 1.0), VectorXd::Constant(1, 0.77)), 1.0);
}

TEST(Forward, ScalarComposition) {
  const double v = forward_point(scalar_net(1.0), VectorXd::Constant(1, std::numbers::pi / 2));
  EXPECT_NEAR(v, std::sin(1.0), 1e-15);
  // sin(w sin t) = sum_k J_k(w) sin(k t) at t = pi/2.
  double s = 0.0;
  for (int k = -15; k <= 15; ++k) s += bessel_j(k, 1.0) * std::sin(k * std::numbers::pi / 2);
  EXPECT_NEAR(v, s, 1e-12);
}

TEST(Forward, DimensionMismatch) {
  EXPECT_THROW(forward(scalar_net(1.0), MatrixXd::Zero(3, 2)), DimensionError);
}

TEST(Forward, Periodicity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}, {3, -2}, {5, 4}}), {6, 5}, 1.5, 3);
    MatrixXd x = MatrixXd::Random(40, 2);
    for (int a = 0; a < 2; ++a) {
      MatrixXd y = x;
      y.col(a).array() += net.bank.period;
      EXPECT_LE((forward(net, x) - forward(net, y)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Forward, ZeroHiddenLayers) {
  SinusoidalNet net;
  net.bank.freq = bank2({{1, 0}, {0, 1}});
  net.bank.shifts = VectorXd::Zero(2);
  net.C = MatrixXd::Constant(1, 2, 1.0);
  net.e = VectorXd::Zero(1);
  const double x = 0.25, y = -0.5;
  MatrixXd c(1, 2);
  c << x, y;
  EXPECT_NEAR(forward(net, c)(0, 0), std::sin(std::numbers::pi * x) + std::sin(std::numbers::pi * y), 1e-15);
  EXPECT_LT(gradcheck(net, 3).max_rel(), 1e-5);
}

TEST(InputGradient, Trivial) {
  const auto g0 = input_gradient(scalar_net(0.0), MatrixXd::Constant(5, 1, 0.4));
  EXPECT_EQ(g0[0].cwiseAbs().maxCoeff(), 0.0);
  const auto g1 = input_gradient(scalar_net(1.0), MatrixXd::Zero(1, 1));
  EXPECT_NEAR(g1[0](0, 0), 1.0, 1e-15);
}

TEST(InputGradient, FiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}, {2, 1}}), {4, 3}, 1.0, 2);
    const MatrixXd x = MatrixXd::Random(10, 2);
    const auto g = input_gradient(net, x);
    const double h = 1e-5;
    for (int a = 0; a < 2; ++a) {
      MatrixXd p = x, m = x;
      p.col(a).array() += h;
      m.col(a).array() -= h;
      const MatrixXd fd = (forward(net, p) - forward(net, m)) / (2 * h);
      for (Eigen::Index i = 0; i < fd.size(); ++i)
        EXPECT_LT(relative_error(g[a].data()[i], fd.data()[i], 1e-4), 1e-6);
    }
  }
}

TEST(ParamGradients, ZeroResiduals) {
  std::mt19937_64 rng(1);
  auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}}), {3}, 1.0);
  const MatrixXd x = MatrixXd::Random(6, 2);
  const auto g = param_gradients(net, x, MatrixXd::Zero(6, 1));
  EXPECT_EQ(g.max_abs(), 0.0);
}

TEST(ParamGradients, ResidualShapeMismatch) {
  std::mt19937_64 rng(1);
  auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}}), {3}, 1.0);
  EXPECT_THROW(param_gradients(net, MatrixXd::Zero(6, 2), MatrixXd::Zero(5, 1)), DimensionError);
}

TEST(ParamGradients, FiniteDifferencesEveryClass) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}, {3, 1}, {-1, 2}}), {5, 4}, 1.2, 3);
    const auto rep = gradcheck(net, 100 + trial, 4, 1e-5, true);
    EXPECT_LT(rep.max_rel(), 1e-5) << rep.worst_param;
  }
}

TEST(ParamGradients, LearnableMode) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}, {4, 1}}), {4}, 1.5, 1);
    net.bound_mode = BoundMode::learnable;
    net.bounds = VectorXd::Random(3).cwiseAbs() + VectorXd::Constant(3, 0.2);
    const auto rep = gradcheck(net, 200 + trial);
    EXPECT_LT(rep.max_rel(), 1e-5) << rep.worst_param;
    const MatrixXd We = net.effective_matrix(0);
    for (Eigen::Index j = 0; j < We.cols(); ++j)
      EXPECT_LE(We.col(j).cwiseAbs().maxCoeff(), std::abs(net.bounds[j]));
  }
}

TEST(ParamGradients, LearnableTanhFactorAtZero) {
  // With W = 0 the chain factor through tanh(W) c is exactly c_j.
  std::mt19937_64 rng(3);
  auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}}), {2}, 1.0);
  net.hidden[0].W.setZero();
  SinusoidalNet plain = net;
  net.bound_mode = BoundMode::learnable;
  net.bounds = VectorXd(2);
  net.bounds << 0.7, 0.3;
  const MatrixXd x = MatrixXd::Random(5, 2);
  const MatrixXd r = MatrixXd::Random(5, 1);
  const auto gl = param_gradients(net, x, r);
  const auto gp = param_gradients(plain, x, r);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(gl.W[0](i, j), net.bounds[j] * gp.W[0](i, j), 1e-15);
}

TEST(NetJson, RoundTripBitExact) {
  std::mt19937_64 rng(9);
  auto net = oracle::random_net(rng, bank2({{1, 0}, {0, 1}, {7, -3}}), {4, 2}, 1.3, 3);
  net.bound_mode = BoundMode::clamped;
  net.bounds = VectorXd::Constant(3, 0.123456789012345678);
  net.deep_bound = 0.9;
  const auto path = std::filesystem::temp_directory_path() / "sinr_net_roundtrip.json";
  save_net(net, path.string());
  const auto back = load_net(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.bank.freq, net.bank.freq);
  EXPECT_EQ(back.bank.shifts, net.bank.shifts);
  ASSERT_EQ(back.depth(), net.depth());
  for (int l = 0; l < net.depth(); ++l) {
    EXPECT_EQ(back.hidden[l].W, net.hidden[l].W);
    EXPECT_EQ(back.hidden[l].b, net.hidden[l].b);
  }
  EXPECT_EQ(back.C, net.C);
  EXPECT_EQ(back.e, net.e);
  EXPECT_EQ(back.bounds, net.bounds);
  EXPECT_EQ(back.bound_mode, BoundMode::clamped);
  EXPECT_EQ(back.deep_bound, 0.9);
}

TEST(NetJson, RejectsMalformed) {
  EXPECT_THROW(net_from_json(json::parse(R"({"freq_int": [[1]]})")), ConfigError);
  auto j = json::parse(R"({"freq_int": [[1]], "period": 2, "shifts": [0],
      "layers": [{"W": [[1, 2]], "b": [0]}], "C": [[1]], "e": [0]})");
  EXPECT_THROW(net_from_json(j), DimensionError);
  EXPECT_THROW(load_net("/nonexistent/net.json"), IoError);
}

TEST(Bank, ReducedRows) {
  EXPECT_TRUE(bank_rows_are_reduced(bank2({{1, 0}, {0, 1}, {2, 3}})));
  EXPECT_FALSE(bank_rows_are_reduced(bank2({{1, 0}, {-1, 0}})));
  EXPECT_FALSE(bank_rows_are_reduced(bank2({{1, 0}, {1, 0}})));
  EXPECT_FALSE(bank_rows_are_reduced(bank2({{0, 0}})));
}
