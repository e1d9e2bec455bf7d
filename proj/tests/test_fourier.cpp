#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sinr/bessel.hpp"
#include "sinr/fourier.hpp"

using namespace sinr;

namespace {

FrequencyBank make_bank(std::initializer_list<std::vector<int>> rows, double period = 2.0) {
  FrequencyBank b;
  const auto d = static_cast<Eigen::Index>(rows.begin()->size());
  b.freq.resize(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    for (Eigen::Index a = 0; a < d; ++a) b.freq(i, a) = r[static_cast<std::size_t>(a)];
    ++i;
  }
  b.period = period;
  b.shifts = VectorXd::Zero(b.freq.rows());
  return b;
}

// Random reduced bank whose first rows are the unit vectors.
MatrixXi canonical_bank(std::mt19937_64& rng, int m, int fmax) {
  std::uniform_int_distribution<int> u(-fmax, fmax);
  MatrixXi f(m, 2);
  do {
    f.topRows(2) = MatrixXi::Identity(2, 2);
    for (int j = 2; j < m; ++j) f(j, 0) = u(rng), f(j, 1) = u(rng);
  } while (!bank_rows_are_reduced(f));
  return f;
}

// All k with ||k||_inf <= r and k^T freq = F.
std::set<std::vector<std::int64_t>> brute_force(const MatrixXi& freq, const Freq& F, int r) {
  std::set<std::vector<std::int64_t>> out;
  const auto m = static_cast<std::size_t>(freq.rows());
  std::vector<std::int64_t> k(m, -r);
  while (true) {
    if (lattice_image(freq, k) == F) out.insert(k);
    std::size_t t = m;
    while (t > 0 && k[t - 1] == r) k[--t] = -r;
    if (t == 0) break;
    ++k[t - 1];
  }
  return out;
}

}  // namespace

TEST(SolveFrequency, NoGenerators) {
  const auto bank = make_bank({{1, 0}, {0, 1}});
  const Freq F{5, -3};
  const auto s = solve_frequency(bank, F);
  EXPECT_EQ(s.particular, (std::vector<std::int64_t>{5, -3}));
  EXPECT_TRUE(s.generators.empty());
}

TEST(SolveFrequency, DisplayedGenerator) {
  const auto bank = make_bank({{1, 0}, {0, 1}, {4, 7}});
  const Freq F{0, 0};
  const auto s = solve_frequency(bank, F);
  EXPECT_EQ(s.particular, (std::vector<std::int64_t>{0, 0, 0}));
  ASSERT_EQ(s.generators.size(), 1u);
  EXPECT_EQ(s.generators[0], (std::vector<std::int64_t>{-4, -7, 1}));
}

TEST(SolveFrequency, SoundAndCompleteAgainstBruteForce) {
  const auto bank = make_bank({{1, 0}, {0, 1}, {2, 1}, {1, 3}});
  const Freq F{3, 2};
  const auto s = solve_frequency(bank, F);
  for (const auto& k : enumerate_solutions(s, 3)) EXPECT_EQ(lattice_image(bank.freq, k), F);
  for (const auto& k : brute_force(bank.freq, F, 4)) EXPECT_EQ(s.at(s.parameters(k)), k);
}

TEST(SolveFrequency, RandomBanksLattice) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> uF(-6, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + trial % 4;
    FrequencyBank bank;
    bank.freq = canonical_bank(rng, m, 3);
    bank.shifts = VectorXd::Zero(m);
    const Freq F{uF(rng), uF(rng)};
    const auto s = solve_frequency(bank, F);
    for (const auto& k : enumerate_solutions(s, 3)) EXPECT_EQ(lattice_image(bank.freq, k), F);
    for (const auto& g : s.generators) EXPECT_EQ(lattice_image(bank.freq, g), (Freq{0, 0}));
    // Every solution in the box is a lattice point whose parameters lie in the box.
    const auto found = brute_force(bank.freq, F, 4);
    std::size_t predicted = 0;
    for (const auto& k : enumerate_solutions(s, 4)) {
      bool inside = true;
      for (auto v : k) inside = inside && std::abs(v) <= 4;
      if (inside) {
        ++predicted;
        EXPECT_TRUE(found.count(k));
      }
    }
    EXPECT_EQ(predicted, found.size());
  }
}

TEST(SolveFrequency, OneDimensional) {
  const auto bank = make_bank({{1}, {3}});
  const Freq F{4};
  const auto s = solve_frequency(bank, F);
  ASSERT_EQ(s.generators.size(), 1u);
  EXPECT_EQ(s.generators[0], (std::vector<std::int64_t>{-3, 1}));
}

TEST(SolveFrequency, RequiresCanonicalRows) {
  const auto bank = make_bank({{2, 0}, {0, 1}, {1, 1}});
  const Freq F{1, 1};
  EXPECT_THROW(solve_frequency(bank, F), PreconditionError);
}

TEST(Subperiod, Checks) {
  const auto even = make_bank({{2, 0}, {4, 0}, {-6, 0}});
  EXPECT_TRUE(subperiod_check(even, 2, 1));
  EXPECT_TRUE(subperiod_check(even, 1, 1));
  const auto canon = make_bank({{1, 0}, {0, 1}, {6, 4}});
  for (int q = 1; q <= 4; ++q)
    for (int s = 1; s <= 4; ++s) EXPECT_EQ(subperiod_check(canon, q, s), q == 1 && s == 1);
  const auto mixed = make_bank({{3, 3}, {6, 0}, {0, 3}});
  EXPECT_TRUE(subperiod_check(mixed, 3, 3));
  EXPECT_TRUE(subperiod_check(mixed, 1, 3));
  EXPECT_FALSE(subperiod_check(mixed, 2, 1));
}

TEST(Subperiod, SoundOnNets) {
  std::mt19937_64 rng(8);
  const auto bank = make_bank({{2, 0}, {4, 2}, {-2, 6}, {6, 4}});
  for (int q = 1; q <= 3; ++q)
    for (int s = 1; s <= 3; ++s) {
      if (!subperiod_check(bank, q, s)) continue;
      auto net = oracle::random_net(rng, bank.freq, {3}, 1.0);
      const MatrixXd x = period_grid(64, 2, 2.0);
      MatrixXd y = x;
      y.col(0).array() += 2.0 / q;
      y.col(1).array() += 2.0 / s;
      EXPECT_LT((forward(net, x) - forward(net, y)).cwiseAbs().maxCoeff(), 1e-10) << q << "," << s;
    }
}

TEST(Subperiod, CanonicalRowsBreakEverySubperiod) {
  std::mt19937_64 rng(9);
  auto net = oracle::random_net(rng, canonical_bank(rng, 5, 4), {4}, 1.0);
  const MatrixXd x = period_grid(64, 2, 2.0);
  for (int q = 1; q <= 3; ++q)
    for (int s = 1; s <= 3; ++s) {
      if (q == 1 && s == 1) continue;
      EXPECT_FALSE(subperiod_check(net.bank, q, s));
      MatrixXd y = x;
      y.col(0).array() += 2.0 / q;
      y.col(1).array() += 2.0 / s;
      EXPECT_GT((forward(net, x) - forward(net, y)).cwiseAbs().maxCoeff(), 1e-3);
    }
}

TEST(FourierTable, ZeroHiddenWeights) {
  std::mt19937_64 rng(2);
  auto net = oracle::random_net(rng, canonical_bank(rng, 3, 3), {3}, 1.0);
  net.hidden[0].W.setZero();
  net.e[0] = 0.25;
  const auto t = fourier_table(net, 5, 4);
  ASSERT_EQ(t.entries.size(), 1u);
  double expect = 0.25;
  for (int i = 0; i < 3; ++i) expect += net.C(0, i) * std::sin(net.hidden[0].b[i]);
  const auto& v = t.entries.begin()->second;
  EXPECT_EQ(t.entries.begin()->first, (Freq{0, 0}));
  EXPECT_NEAR(v.b_hat[0], expect, 1e-15);
  EXPECT_EQ(v.a_hat[0], 0.0);
  EXPECT_EQ(t.residual_bound, 0.0);
}

TEST(FourierTable, OneDimensionalBesselCoefficients) {
  SinusoidalNet net;
  net.bank = make_bank({{1}});
  net.hidden.push_back({MatrixXd::Constant(1, 1, 1.0), VectorXd::Zero(1)});
  net.C = MatrixXd::Constant(1, 1, 1.0);
  net.e = VectorXd::Zero(1);
  const auto t = fourier_table(net, 9, 12);
  for (int F = 0; F <= 9; ++F) {
    const auto [a, b] = t.coef(Freq{F}, 0);
    EXPECT_NEAR(a, F % 2 == 1 ? 2.0 * bessel_j(F, 1.0) : 0.0, 1e-15) << F;
    EXPECT_NEAR(b, 0.0, 1e-15);
  }
  EXPECT_LT(t.residual_bound, 1e-12);
}

TEST(FourierTable, MatchesDftOracle) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 4; ++trial) {
    const int m = 3 + trial % 3;
    auto net = oracle::random_net(rng, canonical_bank(rng, m, 2), {3}, 1.2, 2);
    const int band = 32, k_max = 9;
    const auto t = fourier_table(net, band, k_max);
    int grid = 256;
    while (grid <= 2 * max_generated_frequency(net.bank, k_max)) grid *= 2;
    const auto o = dft_oracle(net, grid, band, k_max);
    for (const auto& [f, v] : o.entries)
      for (int c = 0; c < 2; ++c) {
        const auto [a, b] = t.coef(f, c);
        EXPECT_LE(std::abs(a - v.a_hat[c]), t.residual_bound + 1e-9);
        EXPECT_LE(std::abs(b - v.b_hat[c]), t.residual_bound + 1e-9);
      }
    for (const auto& [f, v] : t.entries) EXPECT_TRUE(o.entries.count(f)) << f[0] << "," << f[1];
  }
}

TEST(FourierTable, InverseEvaluationMatchesForward) {
  std::mt19937_64 rng(23);
  auto net = oracle::random_net(rng, canonical_bank(rng, 4, 2), {3}, 1.0);
  const auto t = fourier_table(net, 200, 10);
  EXPECT_EQ(t.outside[0], 0.0);
  const MatrixXd x = period_grid(128, 2, 2.0);
  const MatrixXd f = forward(net, x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); i += 7) {
    const double p[2] = {x(i, 0), x(i, 1)};
    worst = std::max(worst, std::abs(t.evaluate(p, 0) - f(i, 0)));
  }
  EXPECT_LE(worst, t.residual_bound + 1e-9);
}

TEST(FourierTable, RejectsDeepNets) {
  std::mt19937_64 rng(2);
  auto net = oracle::random_net(rng, canonical_bank(rng, 3, 3), {2, 2}, 1.0);
  EXPECT_THROW(fourier_table(net, 4, 3), PreconditionError);
}

TEST(FourierTable, ZeroHiddenLayers) {
  std::mt19937_64 rng(2);
  SinusoidalNet net;
  net.bank.freq = canonical_bank(rng, 4, 3);
  net.bank.shifts = VectorXd::Random(4);
  net.C = MatrixXd::Random(1, 4);
  net.e = VectorXd::Constant(1, 0.1);
  const auto t = fourier_table(net, 8, 0);
  const auto o = dft_oracle(net, 32, 8);
  for (const auto& [f, v] : o.entries) {
    const auto [a, b] = t.coef(f, 0);
    EXPECT_NEAR(a, v.a_hat[0], 1e-12);
    EXPECT_NEAR(b, v.b_hat[0], 1e-12);
  }
}

TEST(DftOracle, PureToneAndConstant) {
  // f(x) = sin(w 3 x) from a zero-hidden-layer net.
  SinusoidalNet tone;
  tone.bank = make_bank({{3}});
  tone.C = MatrixXd::Constant(1, 1, 1.0);
  tone.e = VectorXd::Zero(1);
  const auto t = dft_oracle(tone, 16, 7);
  for (const auto& [f, v] : t.entries) {
    EXPECT_NEAR(v.a_hat[0], f[0] == 3 ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(v.b_hat[0], 0.0, 1e-12);
  }
  SinusoidalNet flat = tone;
  flat.C.setZero();
  flat.e[0] = 0.7;
  const auto c = dft_oracle(flat, 16, 7);
  for (const auto& [f, v] : c.entries) {
    EXPECT_NEAR(v.b_hat[0], f[0] == 0 ? 0.7 : 0.0, 1e-12);
    EXPECT_NEAR(v.a_hat[0], 0.0, 1e-12);
  }
}

TEST(DftOracle, AliasingGuard) {
  std::mt19937_64 rng(2);
  auto net = oracle::random_net(rng, canonical_bank(rng, 3, 3), {2}, 1.0);
  EXPECT_THROW(dft_oracle(net, 16, 8), PreconditionError);
  EXPECT_THROW(dft_oracle(net, 64, 8, 9), PreconditionError);
}

TEST(Dft, FftMatchesDirectSum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {8, 16}) {
    std::vector<double> s(static_cast<std::size_t>(n * n));
    for (auto& v : s) v = u(rng);
    std::vector<cplx> buf(s.begin(), s.end());
    dft_nd(buf, n, 2);
    for (int fx = 0; fx < n; ++fx)
      for (int fy = 0; fy < n; ++fy) {
        const cplx ref = oracle::direct_coefficient_2d(s, n, fx, fy) * static_cast<double>(n * n);
        EXPECT_LT(std::abs(buf[static_cast<std::size_t>(fx * n + fy)] - ref), 1e-10);
      }
  }
  std::vector<cplx> odd{1.0, 2.0, -1.0};
  dft_inplace(odd);
  EXPECT_NEAR(odd[0].real(), 2.0, 1e-14);
}

TEST(FourierCsv, HeaderAndRows) {
  SinusoidalNet tone;
  tone.bank = make_bank({{1, 0}, {0, 1}});
  tone.C = MatrixXd::Constant(1, 2, 1.0);
  tone.e = VectorXd::Zero(1);
  const auto t = fourier_table(tone, 2, 0);
  std::ostringstream os;
  write_fourier_csv(os, t);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "F_1,F_2,channel,a_hat,b_hat");
  const auto j = fourier_sidecar(t);
  EXPECT_EQ(j["band"], 2);
  EXPECT_EQ(j["k_max"], 0);
}
