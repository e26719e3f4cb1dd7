#pragma once

// Pure-strategy equilibria for general valuation profiles.
//
// The solver runs damped best-response iteration from the sorted lower bounds.
// Those bounds define a box that best responses map into itself, and a convex
// combination of two points in the box stays in it, so every iterate is
// feasible. Existence is guaranteed, uniqueness is not for p > 1: the solver
// reports the equilibrium it reaches and makes no claim that it is the only
// one.

#include <cstddef>

#include "qprop/core.hpp"
#include "qprop/error.hpp"
#include "qprop/response.hpp"

namespace qprop {

struct FixedPointOptions {
  double tol = 1e-9;             // sup-norm of BR(b) - b
  std::size_t max_iter = 10000;
  double damping = 0.5;          // b <- (1 - damping) b + damping BR(b)
};

struct EquilibriumResult {
  BidProfile bids;
  double revenue;
  std::size_t iterations;
  double residual;
  BidLowerBounds bounds_used;
};

/// Thrown when the iteration budget runs out; `best` is the lowest-residual
/// iterate seen.
class FixedPointFailure : public ConvergenceFailure {
 public:
  FixedPointFailure(const std::string& what, EquilibriumResult best)
      : ConvergenceFailure(what), best(std::move(best)) {}

  EquilibriumResult best;
};

EquilibriumResult solve_fixed_point(const ValuationProfile& values,
                                    WeightExponent p,
                                    const FixedPointOptions& opts = {});

/// Seller revenue sum_i a_i(b) b_i. Throws AllZeroBids.
double revenue(const BidProfile& bids, WeightExponent p);

struct NashReport {
  bool is_epsilon_nash;
  double epsilon;
  std::size_t worst_deviator;
  double worst_gain;
};

/// Brute-force deviation check. For each bidder, scans a uniform grid of
/// `grid_points` bids on [0, v_i] plus the analytic best response and reports
/// the largest utility gain over staying put.
NashReport verify_nash(const BidProfile& bids, const ValuationProfile& values,
                       WeightExponent p, std::size_t grid_points = 100000,
                       double epsilon = 1e-6);

}  // namespace qprop
