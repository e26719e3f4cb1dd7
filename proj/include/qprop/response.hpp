#pragma once

// Best responses and certified bid lower bounds.

#include <span>
#include <vector>

#include "qprop/core.hpp"

namespace qprop {

/// Unique maximizer in (0, v) of u(b) = (b^p / (b^p + s)) (v - b).
/// Golden-section bracketing on u, then a safeguarded Newton polish on u'.
/// Throws DomainError unless s > 0 and v > 0; ConvergenceFailure if the polish
/// stalls.
double best_response(double s, double v, WeightExponent p);

/// Componentwise best response to the rest of the profile. Needs every s_i > 0.
BidProfile best_response_profile(const BidProfile& bids,
                                 const ValuationProfile& values,
                                 WeightExponent p);

enum class BoundsProvenance { uniform, sorted, custom };

const char* to_string(BoundsProvenance provenance);

/// Lower bounds w with 0 < w_i <= v_i such that best responses map the box
/// [w_1, v_1] x ... x [w_n, v_n] into itself.
struct BidLowerBounds {
  std::vector<double> w;
  BoundsProvenance provenance = BoundsProvenance::custom;
};

/// Same bound for every bidder, from the smallest valuation:
/// w_i = v_min / (1 + (1 + 1/(n-1)) / p).
BidLowerBounds lower_bounds_uniform(const ValuationProfile& values,
                                    WeightExponent p);

/// Bounds driven by the second-highest valuation. Valuations are sorted in
/// descending order (ties keep their original order) and the bounds are mapped
/// back to the caller's indices.
BidLowerBounds lower_bounds_sorted(const ValuationProfile& values,
                                   WeightExponent p);

struct BoxCheck {
  bool satisfied = false;
  /// rhs_i - w_i, where rhs_i = v_i / (1 + (1 + f(w_i)/s_i) / p).
  std::vector<double> slack;
};

/// Tests w_i <= v_i / (1 + (1 + f(w_i)/s_i)/p) for all i with an absolute
/// tolerance of 1e-12, where s_i = sum_{j != i} f(w_j).
BoxCheck check_box_condition(std::span<const double> w,
                             const ValuationProfile& values, WeightExponent p);

}  // namespace qprop
