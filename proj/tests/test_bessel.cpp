#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "sinr/bessel.hpp"

using sinr::bessel_bound;
using sinr::bessel_j;

TEST(Bessel, TrivialValues) {
  EXPECT_EQ(bessel_j(0, 0.0), 1.0);
  EXPECT_EQ(bessel_j(3, 0.0), 0.0);
  EXPECT_EQ(bessel_j(-2, 0.7), bessel_j(2, 0.7));
}

TEST(Bessel, MatchesQuadratureOracle) {
  EXPECT_NEAR(bessel_j(1, 1.0), oracle::bessel_quadrature(1, 1.0), 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-64.0, 64.0);
  std::uniform_int_distribution<int> uk(-20, 20);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = uk(rng);
    const double x = ux(rng);
    EXPECT_NEAR(bessel_j(k, x), oracle::bessel_quadrature(k, x), 1e-12) << "k=" << k << " x=" << x;
  }
}

TEST(Bessel, MatchesStandardLibrary) {
  for (int k = 0; k <= 15; ++k)
    for (double x = 0.0; x <= 64.0; x += 0.37)
      EXPECT_NEAR(bessel_j(k, x), std::cyl_bessel_j(static_cast<double>(k), x), 1e-12) << k << " " << x;
}

TEST(Bessel, NegativeArgumentParity) {
  for (int k = -6; k <= 6; ++k)
    for (double x : {0.3, 1.7, 9.5, 30.0}) {
      const double s = (k % 2 == 0) ? 1.0 : -1.0;
      EXPECT_NEAR(bessel_j(k, -x), s * bessel_j(k, x), 1e-15);
    }
}

TEST(Bessel, OrderParityIsExact) {
  for (int k = 1; k <= 12; ++k)
    for (double x = -2.0; x <= 2.0; x += 0.1) {
      const double s = (k % 2 == 0) ? 1.0 : -1.0;
      EXPECT_EQ(bessel_j(-k, x), s * bessel_j(k, x));
    }
}

TEST(Bessel, Recurrence) {
  for (int k = 1; k <= 20; ++k)
    for (double x = 0.05; x <= 2.0; x += 0.05)
      EXPECT_LE(std::abs(bessel_j(k - 1, x) + bessel_j(k + 1, x) - (2.0 * k / x) * bessel_j(k, x)), 1e-10);
}

TEST(Bessel, JacobiAngerReconstruction) {
  for (double x = 0.0; x <= 2.0; x += 0.25)
    for (double t = 0.0; t <= 2.0 * std::numbers::pi; t += 0.1) {
      double s = 0.0;
      for (int k = -25; k <= 25; ++k)
        if (k % 2 != 0) s += bessel_j(k, x) * std::sin(k * t);
      EXPECT_NEAR(s, std::sin(x * std::sin(t)), 1e-10);
    }
}

TEST(Bessel, NonFiniteArgument) {
  EXPECT_THROW(bessel_j(1, std::numeric_limits<double>::quiet_NaN()), sinr::DomainError);
  EXPECT_THROW(bessel_j(0, std::numeric_limits<double>::infinity()), sinr::DomainError);
}

TEST(BesselBound, Values) {
  EXPECT_EQ(bessel_bound(0, 1.3), 1.0);
  EXPECT_EQ(bessel_bound(2, 2.0), 0.5);
  EXPECT_NEAR(bessel_bound(4, 1.0), 0.0625 / 24.0, 1e-18);
  EXPECT_EQ(bessel_bound(-4, -1.0), bessel_bound(4, 1.0));
}

TEST(BesselBound, DominatesValues) {
  for (int k = 1; k <= 12; ++k)
    for (double x = -2.0; x <= 2.0; x += 0.01) {
      EXPECT_LE(std::abs(bessel_j(k, x)), bessel_bound(k, x) + 1e-14);
      EXPECT_LE(std::abs(bessel_j(-k, x)), bessel_bound(-k, x) + 1e-14);
    }
}

TEST(BesselSums, AbsSumBoundIsCertified) {
  for (double x : {0.0, 0.1, 0.5, 1.0, 1.5, 2.0, 5.0, 12.0, 40.0}) {
    double s = 0.0;
    for (int k = -200; k <= 200; ++k) s += std::abs(bessel_j(k, x));
    EXPECT_LE(s, sinr::bessel_abs_sum_bound(x) + 1e-13) << x;
    EXPECT_LE(sinr::bessel_abs_sum_bound(x), 2.0 * std::exp(0.5 * x) - 1.0 + 1e-15);
  }
}

TEST(BesselSums, TailBoundIsCertified) {
  for (double x : {0.2, 1.0, 1.5, 2.0, 6.0, 25.0})
    for (int k = 0; k <= 15; ++k) {
      double s = 0.0;
      for (int t = k + 1; t <= 200; ++t) s += 2.0 * std::abs(bessel_j(t, x));
      EXPECT_LE(s, sinr::bessel_abs_tail_bound(x, k) * (1 + 1e-12) + 1e-300) << x << " " << k;
    }
  EXPECT_EQ(sinr::bessel_abs_tail_bound(0.0, 0), 0.0);
}
