#pragma once

// Weight functions f(x) = x^p, allocations, utilities and their derivatives.

#include <cstddef>
#include <span>
#include <vector>

namespace qprop {

/// Exponent p of the weight function f(x) = x^p. Always finite and > 0.
class WeightExponent {
 public:
  explicit WeightExponent(double p);

  double value() const noexcept { return p_; }

 private:
  double p_;
};

/// Private values v_i > 0 for n >= 2 bidders.
class ValuationProfile {
 public:
  explicit ValuationProfile(std::vector<double> values);

  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const noexcept { return v_; }
  double min() const;

 private:
  std::vector<double> v_;
};

/// Bids b_i >= 0. Pairing with valuations does not enforce b_i <= v_i.
class BidProfile {
 public:
  explicit BidProfile(std::vector<double> bids);

  std::size_t size() const noexcept { return b_.size(); }
  double operator[](std::size_t i) const { return b_[i]; }
  std::span<const double> values() const noexcept { return b_; }

 private:
  std::vector<double> b_;
};

struct AllocationProfile {
  std::vector<double> shares;
};

/// A function value with its first two derivatives.
struct Derivatives {
  double value;
  double first;
  double second;
};

double weight(WeightExponent p, double x);

/// a_i = b_i^p / sum_j b_j^p. Throws AllZeroBids when every bid is zero.
AllocationProfile allocate(const BidProfile& bids, WeightExponent p);

/// a_i(b) (v_i - b_i). Negative when b_i > v_i.
double utility(const BidProfile& bids, const ValuationProfile& values,
               WeightExponent p, std::size_t i);

/// Sum of the other bidders' weights, s_i = sum_{j != i} b_j^p, for every i.
/// Prefix/suffix accumulation, so s_i carries no cancellation from a dominant
/// f(b_i).
std::vector<double> competitor_weights(std::span<const double> bids,
                                       WeightExponent p);

/// Utility of a single bidder bidding b against a fixed competitor weight sum
/// s: (b^p / (b^p + s)) (v - b). A zero bid earns nothing; with s = 0 any
/// positive bid takes the whole allocation.
double response_utility(double b, double s, double v, WeightExponent p);

/// f, f', f'' for f(x) = x^p at x > 0.
Derivatives weight_derivatives(WeightExponent p, double x);

/// a = f/(f+s) and its derivatives in b. Requires b > 0, s > 0.
Derivatives allocation_derivatives(double b, double s, WeightExponent p);

/// u = a (v - b) and its derivatives in b. Requires b > 0, s > 0.
Derivatives utility_derivatives(double b, double s, double v,
                                WeightExponent p);

}  // namespace qprop
