#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qprop/core.hpp"
#include "qprop/error.hpp"

using namespace qprop;

TEST(Weight, Examples) {
  EXPECT_DOUBLE_EQ(weight(WeightExponent(1.0), 3.0), 3.0);
  EXPECT_EQ(weight(WeightExponent(2.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(weight(WeightExponent(0.5), 4.0), 2.0);
}

TEST(Weight, RejectsNonPositiveExponent) {
  EXPECT_THROW(WeightExponent(0.0), DomainError);
  EXPECT_THROW(WeightExponent(-1.0), DomainError);
  EXPECT_THROW(WeightExponent(NAN), DomainError);
}

TEST(Profiles, Validation) {
  EXPECT_THROW(ValuationProfile({1.0}), DomainError);
  EXPECT_THROW(ValuationProfile({1.0, 0.0}), DomainError);
  EXPECT_THROW(BidProfile({1.0, -0.5}), DomainError);
  EXPECT_DOUBLE_EQ(ValuationProfile({3.0, 1.5, 2.0}).min(), 1.5);
}

TEST(Allocate, Examples) {
  auto a = allocate(BidProfile({1.0, 1.0}), WeightExponent(2.0));
  EXPECT_DOUBLE_EQ(a.shares[0], 0.5);
  EXPECT_DOUBLE_EQ(a.shares[1], 0.5);

  a = allocate(BidProfile({2.0, 1.0, 1.0}), WeightExponent(1.0));
  EXPECT_DOUBLE_EQ(a.shares[0], 0.5);
  EXPECT_DOUBLE_EQ(a.shares[1], 0.25);
  EXPECT_DOUBLE_EQ(a.shares[2], 0.25);

  a = allocate(BidProfile({0.0, 1.0}), WeightExponent(1.0));
  EXPECT_EQ(a.shares[0], 0.0);
  EXPECT_EQ(a.shares[1], 1.0);
}

TEST(Allocate, AllZeroBidsThrows) {
  EXPECT_THROW(allocate(BidProfile({0.0, 0.0}), WeightExponent(1.0)), AllZeroBids);
}

TEST(Allocate, HugeExponentDoesNotOverflow) {
  const auto a = allocate(BidProfile({3.0, 2.9}), WeightExponent(1000.0));
  EXPECT_NEAR(a.shares[0] + a.shares[1], 1.0, 1e-12);
  EXPECT_GT(a.shares[0], 0.999);
}

TEST(Allocate, Properties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> bid(0.0, 10.0);
  std::uniform_int_distribution<int> count(2, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const WeightExponent p(oracle::log_uniform(rng, 0.1, 10.0));
    std::vector<double> b(static_cast<std::size_t>(count(rng)));
    for (double& x : b) x = bid(rng);
    b[0] = std::max(b[0], 1e-3);

    const auto a = allocate(BidProfile(b), p);
    double total = 0.0;
    for (double s : a.shares) total += s;
    ASSERT_NEAR(total, 1.0, 1e-12);

    // Scale covariance.
    std::vector<double> scaled = b;
    for (double& x : scaled) x *= 7.5;
    const auto a2 = allocate(BidProfile(scaled), p);
    for (std::size_t i = 0; i < b.size(); ++i) ASSERT_NEAR(a.shares[i], a2.shares[i], 1e-12);

    // Raising bidder 1's bid strictly raises their share while bidder 0 bids > 0.
    std::vector<double> raised = b;
    raised[1] += 0.5;
    ASSERT_GT(allocate(BidProfile(raised), p).shares[1], a.shares[1]);
  }
}

TEST(Utility, Examples) {
  const WeightExponent p1(1.0);
  EXPECT_NEAR(utility(BidProfile({5.0, 7.0}), ValuationProfile({10.0, 9.0}), p1, 0),
              5.0 / 12.0 * 5.0, 1e-15);
  EXPECT_EQ(utility(BidProfile({10.0, 3.0}), ValuationProfile({10.0, 9.0}), p1, 0), 0.0);
  EXPECT_EQ(utility(BidProfile({0.0, 1.0}), ValuationProfile({10.0, 1.0}), p1, 0), 0.0);
  // Overbidding is evaluated, not rejected.
  EXPECT_LT(utility(BidProfile({12.0, 1.0}), ValuationProfile({10.0, 1.0}), p1, 0), 0.0);
  EXPECT_THROW(utility(BidProfile({0.0, 0.0}), ValuationProfile({1.0, 1.0}), p1, 0),
               AllZeroBids);
}

TEST(CompetitorWeights, MatchesDirectSums) {
  const WeightExponent p(2.0);
  const auto s = competitor_weights(std::vector<double>{1.0, 2.0, 3.0}, p);
  EXPECT_DOUBLE_EQ(s[0], 13.0);
  EXPECT_DOUBLE_EQ(s[1], 10.0);
  EXPECT_DOUBLE_EQ(s[2], 5.0);
}

TEST(UtilityDerivatives, StationaryPointOfLinearCase) {
  // u' = 0 reduces to b^2 + 14 b - 70 = 0 for s = 7, v = 10, p = 1.
  const double b = (-14.0 + std::sqrt(476.0)) / 2.0;
  EXPECT_NEAR(b, 3.9087, 1e-4);
  const auto d = utility_derivatives(b, 7.0, 10.0, WeightExponent(1.0));
  EXPECT_NEAR(d.first, 0.0, 1e-14);
  auto u = [](double x) { return static_cast<double>(oracle::utility(x, 7.0, 10.0, 1.0)); };
  EXPECT_NEAR(oracle::central_first(u, b, 1e-6), 0.0, 1e-8);
}

TEST(UtilityDerivatives, AtValuation) {
  for (double p : {0.5, 1.0, 4.0}) {
    const auto d = utility_derivatives(10.0, 7.0, 10.0, WeightExponent(p));
    EXPECT_EQ(d.value, 0.0);
    EXPECT_LT(d.first, 0.0);
  }
}

TEST(UtilityDerivatives, DomainErrors) {
  EXPECT_THROW(utility_derivatives(0.0, 7.0, 10.0, WeightExponent(1.0)), DomainError);
  EXPECT_THROW(utility_derivatives(1.0, 0.0, 10.0, WeightExponent(1.0)), DomainError);
}

TEST(UtilityDerivatives, SecondDerivativeNegativeAtPeakForSteepExponent) {
  // Stationary point for s = 7, v = 10, p = 4 by bisection on the oracle u'.
  auto du = [](long double b) {
    const long double h = 1e-7L * b;
    return (oracle::utility(b + h, 7, 10, 4) - oracle::utility(b - h, 7, 10, 4)) / (2 * h);
  };
  const double b = oracle::bisect([&](long double x) { return -du(x); }, 0.5L, 9.5L);
  EXPECT_NEAR(b, 2.8283868833, 1e-6);
  EXPECT_LT(utility_derivatives(b, 7.0, 10.0, WeightExponent(4.0)).second, 0.0);
}

TEST(UtilityDerivatives, MatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> frac(0.02, 0.98);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = oracle::log_uniform(rng, 0.1, 10.0);
    const double s = oracle::log_uniform(rng, 1e-2, 1e2);
    const double v = oracle::log_uniform(rng, 0.1, 100.0);
    const double b = frac(rng) * v;
    const WeightExponent wp(p);
    const double h = 1e-6 * b;

    const auto d = utility_derivatives(b, s, v, wp);
    auto u = [&](double x) { return static_cast<double>(oracle::utility(x, s, v, p)); };
    auto du = [&](double x) { return utility_derivatives(x, s, v, wp).first; };

    const double fd1 = oracle::central_first(u, b, h);
    const double fd2 = oracle::central_first(du, b, h);
    // Scale floors keep the comparison meaningful where u' or u'' cross zero.
    const double scale1 = std::max(std::abs(d.first), std::abs(d.value) / b);
    const double scale2 = std::max(std::abs(d.second), std::abs(d.value) / (b * b));
    ASSERT_NEAR(d.first, fd1, 1e-4 * scale1) << "p=" << p << " s=" << s << " v=" << v << " b=" << b;
    ASSERT_NEAR(d.second, fd2, 1e-4 * scale2) << "p=" << p << " s=" << s << " v=" << v << " b=" << b;
    ASSERT_NEAR(d.value, u(b), 1e-12 * std::max(1.0, std::abs(d.value)));
  }
}

TEST(CurvatureBounds, WeightCurvature) {
  // f f'' < 2 (f')^2 for f = b^p, all b > 0 and p > 0.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = oracle::log_uniform(rng, 0.05, 50.0);
    const double b = oracle::log_uniform(rng, 1e-2, 1e2);
    const auto f = weight_derivatives(WeightExponent(p), b);
    ASSERT_LT(f.value * f.second, 2.0 * f.first * f.first);
  }
}

TEST(CurvatureBounds, AllocationCurvature) {
  // a a'' < 2 (a')^2 at randomized points.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = oracle::log_uniform(rng, 0.1, 10.0);
    const double b = oracle::log_uniform(rng, 1e-2, 1e2);
    const double s = oracle::log_uniform(rng, 1e-2, 1e2);
    const auto a = allocation_derivatives(b, s, WeightExponent(p));
    ASSERT_LT(a.value * a.second, 2.0 * a.first * a.first)
        << "p=" << p << " b=" << b << " s=" << s;
  }
}
