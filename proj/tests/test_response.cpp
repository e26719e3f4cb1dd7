#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qprop/core.hpp"
#include "qprop/error.hpp"
#include "qprop/response.hpp"

using namespace qprop;

TEST(BestResponse, LinearCaseMatchesQuadraticRoot) {
  const double br = best_response(7.0, 10.0, WeightExponent(1.0));
  EXPECT_NEAR(br, (-14.0 + std::sqrt(476.0)) / 2.0, 1e-12);
  EXPECT_NEAR(br, oracle::grid_argmax(7.0, 10.0, 1.0, 1000001), 1e-5);
}

TEST(BestResponse, SteepExponentMatchesGrid) {
  // s = 7, v = 10, p = 4. Grid value 2.82839 (10^6 points); mpmath bisection
  // on u' gives 2.8283868832918513.
  const double br = best_response(7.0, 10.0, WeightExponent(4.0));
  EXPECT_NEAR(br, oracle::grid_argmax(7.0, 10.0, 4.0, 1000001), 1e-5);
  EXPECT_NEAR(br, 2.8283868832918513, 1e-12);
  EXPECT_NEAR(best_response(7.0, 10.0, WeightExponent(2.0)), 3.8816458766176806, 1e-12);
}

TEST(BestResponse, Limits) {
  // Competitors vanish: bidding almost nothing already wins almost everything.
  // For p = 1 the stationary point is -s + sqrt(s^2 + s v).
  EXPECT_NEAR(best_response(1e-9, 10.0, WeightExponent(1.0)), 9.9999000005e-5, 1e-15);
  // Competitors dominate: the allocation is ~ b^p/s and b* -> v p/(1+p) from below.
  for (double p : {0.5, 1.0, 3.0}) {
    const double limit = 10.0 * p / (1.0 + p);
    const double br = best_response(1e12, 10.0, WeightExponent(p));
    EXPECT_LT(br, limit);
    EXPECT_NEAR(br, limit, 1e-4 * limit);
  }
}

TEST(BestResponse, DomainErrors) {
  EXPECT_THROW(best_response(0.0, 1.0, WeightExponent(1.0)), DomainError);
  EXPECT_THROW(best_response(1.0, 0.0, WeightExponent(1.0)), DomainError);
}

TEST(BestResponse, UniqueMaximizerOnGrid) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    const double p = oracle::log_uniform(rng, 0.1, 10.0);
    const double s = oracle::log_uniform(rng, 1e-2, 1e2);
    const double v = oracle::log_uniform(rng, 0.1, 100.0);
    const WeightExponent wp(p);
    const double br = best_response(s, v, wp);
    ASSERT_GT(br, 0.0);
    ASSERT_LT(br, v);
    const std::size_t points = 100001;
    const double dx = v / (points - 1);
    ASSERT_NEAR(br, oracle::grid_argmax(s, v, p, points), dx) << "p=" << p << " s=" << s;

    // u' changes sign exactly once, from + to -, on the interior grid.
    int sign_changes = 0;
    double prev = utility_derivatives(dx, s, v, wp).first;
    for (std::size_t k = 2; k < points - 1; k += 10) {
      const double cur = utility_derivatives(dx * k, s, v, wp).first;
      if ((prev > 0.0) != (cur > 0.0)) {
        ++sign_changes;
        ASSERT_LT(cur, 0.0);
      }
      prev = cur;
    }
    ASSERT_EQ(sign_changes, 1) << "p=" << p << " s=" << s << " v=" << v;
  }
}

TEST(BestResponseProfile, SymmetricFixedPoint) {
  const auto br = best_response_profile(BidProfile({1.0 / 3.0, 1.0 / 3.0}),
                                        ValuationProfile({1.0, 1.0}), WeightExponent(1.0));
  EXPECT_NEAR(br[0], 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(br[1], 1.0 / 3.0, 1e-14);
}

TEST(BestResponseProfile, NeedsCompetition) {
  EXPECT_THROW(best_response_profile(BidProfile({1.0, 0.0}), ValuationProfile({1.0, 1.0}),
                                     WeightExponent(1.0)),
               DomainError);
}

TEST(LowerBounds, UniformExamples) {
  auto w = lower_bounds_uniform(ValuationProfile({1.0, 1.0}), WeightExponent(1.0));
  EXPECT_EQ(w.provenance, BoundsProvenance::uniform);
  EXPECT_DOUBLE_EQ(w.w[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(w.w[1], 1.0 / 3.0);

  // Many equal bidders, p = 1: the bound approaches v/2.
  w = lower_bounds_uniform(ValuationProfile(std::vector<double>(10000, 1.0)), WeightExponent(1.0));
  EXPECT_NEAR(w.w[0], 0.5, 1e-4);
  EXPECT_LT(w.w[0], 0.5);

  // Steep exponent: the bound approaches v.
  w = lower_bounds_uniform(ValuationProfile({1.0, 1.0}), WeightExponent(1e6));
  EXPECT_NEAR(w.w[0], 1.0, 1e-5);
}

TEST(LowerBounds, UniformMonotoneInPNAndVmin) {
  auto bound = [](std::size_t n, double vmin, double p) {
    std::vector<double> v(n, 5.0);
    v[n - 1] = vmin;
    return lower_bounds_uniform(ValuationProfile(v), WeightExponent(p)).w[0];
  };
  for (double p : {0.2, 1.0, 4.0}) {
    EXPECT_LT(bound(2, 1.0, p), bound(3, 1.0, p));
    EXPECT_LT(bound(3, 1.0, p), bound(10, 1.0, p));
    EXPECT_LT(bound(3, 1.0, p), bound(3, 2.0, p));
    EXPECT_LT(bound(3, 1.0, p), bound(3, 1.0, 1.5 * p));
  }
}

TEST(LowerBounds, SortedExamples) {
  auto w = lower_bounds_sorted(ValuationProfile({10.0, 4.0, 3.0}), WeightExponent(2.0));
  EXPECT_EQ(w.provenance, BoundsProvenance::sorted);
  EXPECT_DOUBLE_EQ(w.w[0], 2.0);
  EXPECT_DOUBLE_EQ(w.w[1], 2.0);
  EXPECT_NEAR(w.w[2], 3.0 / 1.75, 1e-15);

  w = lower_bounds_sorted(ValuationProfile({7.0, 1.0}), WeightExponent(1.0));
  EXPECT_DOUBLE_EQ(w.w[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(w.w[1], 1.0 / 3.0);
}

TEST(LowerBounds, SortedMapsBackToOriginalOrder) {
  const auto w = lower_bounds_sorted(ValuationProfile({3.0, 10.0, 4.0}), WeightExponent(2.0));
  EXPECT_NEAR(w.w[0], 3.0 / 1.75, 1e-15);
  EXPECT_DOUBLE_EQ(w.w[1], 2.0);
  EXPECT_DOUBLE_EQ(w.w[2], 2.0);
}

TEST(LowerBounds, SortedVersusUniformOnEqualValues) {
  // Equal values: the sorted bound is v/(1 + 2/p) for everyone, the uniform one
  // v/(1 + (1 + 1/(n-1))/p). They coincide at n = 2; beyond that the uniform
  // bound is the tighter one.
  for (std::size_t n : {2u, 3u, 6u, 20u}) {
    for (double p : {0.5, 1.0, 3.0}) {
      const ValuationProfile v(std::vector<double>(n, 1.0));
      const auto u = lower_bounds_uniform(v, WeightExponent(p));
      const auto s = lower_bounds_sorted(v, WeightExponent(p));
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_DOUBLE_EQ(s.w[i], 1.0 / (1.0 + 2.0 / p));
        if (n == 2) {
          EXPECT_DOUBLE_EQ(s.w[i], u.w[i]);
        } else {
          EXPECT_LT(s.w[i], u.w[i]);
        }
      }
    }
  }
}

TEST(BoxCondition, Examples) {
  const ValuationProfile v({4.0, 2.5, 1.0});
  const WeightExponent p(1.5);
  EXPECT_TRUE(check_box_condition(lower_bounds_uniform(v, p).w, v, p).satisfied);
  EXPECT_TRUE(check_box_condition(lower_bounds_sorted(v, p).w, v, p).satisfied);

  const auto at_values = check_box_condition(v.values(), v, p);
  EXPECT_FALSE(at_values.satisfied);
  for (double slack : at_values.slack) EXPECT_LT(slack, 0.0);
}

TEST(BoxCondition, BothConstructionsOnRandomProfiles) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> count(2, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(count(rng)));
    for (double& x : v) x = oracle::log_uniform(rng, 0.1, 100.0);
    const ValuationProfile values(v);
    const WeightExponent p(oracle::log_uniform(rng, 0.1, 20.0));
    const auto uni = check_box_condition(lower_bounds_uniform(values, p).w, values, p);
    const auto sor = check_box_condition(lower_bounds_sorted(values, p).w, values, p);
    ASSERT_TRUE(uni.satisfied);
    ASSERT_TRUE(sor.satisfied);
  }
}

TEST(BoxCondition, BestResponsesMapBoxIntoItself) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> count(2, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(count(rng)));
    for (double& x : v) x = oracle::log_uniform(rng, 0.5, 20.0);
    const ValuationProfile values(v);
    const WeightExponent p(oracle::log_uniform(rng, 0.2, 8.0));
    const auto w = trial % 2 == 0 ? lower_bounds_sorted(values, p) : lower_bounds_uniform(values, p);

    std::vector<double> b(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) b[i] = w.w[i] + unit(rng) * (v[i] - w.w[i]);
    const auto br = best_response_profile(BidProfile(b), values, p);
    for (std::size_t i = 0; i < v.size(); ++i) {
      ASSERT_GE(br[i], w.w[i] - 1e-12);
      ASSERT_LE(br[i], v[i]);
    }
  }
}
