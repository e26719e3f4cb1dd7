#include "qprop/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace qprop {
namespace {

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

}  // namespace

EquilibriumResult solve_fixed_point(const ValuationProfile& values,
                                    WeightExponent p,
                                    const FixedPointOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be > 0");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw DomainError("damping must lie in (0, 1]");
  }

  auto bounds = lower_bounds_sorted(values, p);
  BidProfile current(bounds.w);
  const double lambda = opts.damping;

  EquilibriumResult best{current, 0.0, 0, INFINITY, bounds};
  for (std::size_t it = 0; it <= opts.max_iter; ++it) {
    const BidProfile response = best_response_profile(current, values, p);
    const double residual = sup_distance(response.values(), current.values());
    if (residual < best.residual) {
      best = {current, revenue(current, p), it, residual, bounds};
    }
    if (residual <= opts.tol) return best;
    if (it == opts.max_iter) break;

    std::vector<double> next(current.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = (1.0 - lambda) * current[i] + lambda * response[i];
    }
    current = BidProfile(std::move(next));
  }
  throw FixedPointFailure(
      "best-response iteration did not reach tol " + std::to_string(opts.tol) +
          " in " + std::to_string(opts.max_iter) +
          " iterations (best residual " + std::to_string(best.residual) + ")",
      std::move(best));
}

double revenue(const BidProfile& bids, WeightExponent p) {
  const auto a = allocate(bids, p);
  double r = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) r += a.shares[i] * bids[i];
  return r;
}

NashReport verify_nash(const BidProfile& bids, const ValuationProfile& values,
                       WeightExponent p, std::size_t grid_points,
                       double epsilon) {
  if (bids.size() != values.size()) {
    throw DomainError("bid and valuation profiles differ in length");
  }
  if (grid_points < 2) throw DomainError("need at least two grid points");

  const auto s = competitor_weights(bids.values(), p);
  NashReport report{true, epsilon, 0, -INFINITY};

  // Bidders sharing (b_i, v_i) also share s_i, hence the same deviation scan.
  std::map<std::pair<double, double>, double> scanned;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const auto key = std::make_pair(bids[i], values[i]);
    double gain;
    if (auto hit = scanned.find(key); hit != scanned.end()) {
      gain = hit->second;
    } else {
      const double v = values[i];
      const double current = response_utility(bids[i], s[i], v, p);
      double best = current;
      const double step = v / static_cast<double>(grid_points - 1);
      for (std::size_t k = 0; k < grid_points; ++k) {
        best = std::max(best, response_utility(step * k, s[i], v, p));
      }
      if (s[i] > 0.0) {
        best = std::max(best,
                        response_utility(best_response(s[i], v, p), s[i], v, p));
      }
      gain = best - current;
      scanned.emplace(key, gain);
    }
    if (gain > report.worst_gain) {
      report.worst_gain = gain;
      report.worst_deviator = i;
    }
  }
  report.is_epsilon_nash = report.worst_gain <= epsilon;
  return report;
}

}  // namespace qprop
