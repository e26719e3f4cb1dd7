#pragma once

// One large bidder (value alpha > 1) against n - 1 symmetric bidders of value
// 1. The equilibrium is unique and reduces to a single root z = b1/b2 of
//
//   h(z) = z^{2p+1} + c1 z^{p+1} - c2 z^p + c3 z - c4,
//   c1 = (n-2) + (1+p)(n-1),      c2 = alpha (1+p)(n-1),
//   c3 = (n-1)(n-2)(1+p),         c4 = alpha (n-1) ((1+p)(n-2) + 1),
//
// which is negative on (0, alpha^{1/(2p+1)}] and positive on [alpha, inf).

#include "qprop/core.hpp"

namespace qprop {

class OlosInstance {
 public:
  OlosInstance(int n, double alpha, WeightExponent p);

  int n() const noexcept { return n_; }
  double alpha() const noexcept { return alpha_; }
  WeightExponent p() const noexcept { return p_; }

  /// (alpha, 1, ..., 1).
  ValuationProfile valuations() const;

 private:
  int n_;
  double alpha_;
  WeightExponent p_;
};

struct ZBracket {
  double lo;  // alpha^{1/(2p+1)}
  double hi;  // alpha
};

ZBracket z_bracket(const OlosInstance& inst);

/// Literal h(z). Overflows for large z^{2p+1}; the solver uses a scaled form.
double h_eval(double z, const OlosInstance& inst);

/// h'(z) = (2p+1) z^{2p} + (p+1) c1 z^p - p c2 z^{p-1} + c3.
double h_derivative(double z, const OlosInstance& inst);

/// Unique positive root of h, inside (alpha^{1/(2p+1)}, alpha). Bisection on
/// the sign of h(z)/z^{2p+1}, then Newton polish. Throws BracketFailure if the
/// endpoint signs are wrong, ConvergenceFailure if the scaled residual stays
/// above tol times the largest term.
double solve_z(const OlosInstance& inst, double tol = 1e-12);

struct OlosEquilibrium {
  double z;        // b1 / b2
  double b1;
  double b2;
  double w_aux;    // z^{p+1} (z^p + n - 2) / (n - 1)
  double revenue;  // closed form, eta(z)
  double revenue_direct;      // sum_i a_i b_i on (b1, b2, ..., b2)
  double foc_residual_large;  // relative residual of the large bidder's FOC
  double foc_residual_small;  // relative residual of a small bidder's FOC

  BidProfile profile(int n) const;
};

OlosEquilibrium olos_equilibrium(const OlosInstance& inst);

struct RevenueBounds {
  double lower;
  double upper;
};

/// Bracket on equilibrium revenue: eta evaluated at both ends of the z
/// interval.
RevenueBounds revenue_bounds(const OlosInstance& inst);

/// eta(x) = p/(1+p) [1 + x^p (x-1)/(x^p+n-1)]
///          [1 - (alpha-x)(n-1)/(x^{2p+1} + (n-2) x^{p+1} - x(n-1))],
/// strictly increasing on [alpha^{1/(2p+1)}, alpha]. DomainError outside it.
double eta(double x, const OlosInstance& inst);

}  // namespace qprop
