#include "qprop/response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qprop/error.hpp"
#include "qprop/scalar_search.hpp"

namespace qprop {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kBoxTolerance = 1e-12;

double marginal_utility(double b, double s, double v, WeightExponent p) {
  return utility_derivatives(b, s, v, p).first;
}

// Root of u' inside [lo, hi] where u'(lo) >= 0 >= u'(hi). Newton steps on u'
// when they stay inside the bracket and u'' < 0, bisection otherwise.
double polish_stationary_point(double x, double lo, double hi, double s,
                               double v, WeightExponent p) {
  x = std::clamp(x, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const auto d = utility_derivatives(x, s, v, p);
    if (d.first == 0.0) return x;
    if (d.first > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = d.second < 0.0 ? x - d.first / d.second : NAN;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * kEps * x || hi - lo <= 4.0 * kEps * hi) {
      return next;
    }
    x = next;
  }
  throw ConvergenceFailure("best response polish did not converge (s=" +
                           std::to_string(s) + ", v=" + std::to_string(v) +
                           ", p=" + std::to_string(p.value()) + ")");
}

}  // namespace

double best_response(double s, double v, WeightExponent p) {
  if (!(std::isfinite(s) && s > 0.0)) {
    throw DomainError("best response needs competitor weight s > 0");
  }
  if (!(std::isfinite(v) && v > 0.0)) {
    throw DomainError("best response needs valuation v > 0");
  }

  auto u = [&](double b) { return response_utility(b, s, v, p); };
  const auto coarse = golden_section_maximize(u, 0.0, v, 1e-12 * v, 400);

  // Golden section only resolves the flat top to ~sqrt(eps); find a sign
  // bracket for u' around it and polish.
  const double floor = std::numeric_limits<double>::min();
  double half_width = 1e-6 * v;
  double lo = floor;
  double hi = v;
  for (;;) {
    const double a = std::max(coarse.x - half_width, floor);
    const double b = std::min(coarse.x + half_width, v);
    if (marginal_utility(a, s, v, p) >= 0.0 &&
        marginal_utility(b, s, v, p) <= 0.0) {
      lo = a;
      hi = b;
      break;
    }
    if (a == floor && b == v) break;
    half_width *= 16.0;
  }
  return polish_stationary_point(coarse.x, lo, hi, s, v, p);
}

BidProfile best_response_profile(const BidProfile& bids,
                                 const ValuationProfile& values,
                                 WeightExponent p) {
  if (bids.size() != values.size()) {
    throw DomainError("bid and valuation profiles differ in length");
  }
  const auto s = competitor_weights(bids.values(), p);
  std::vector<double> out(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!(s[i] > 0.0)) {
      throw DomainError("bidder " + std::to_string(i) +
                        " faces no competing weight; best response undefined");
    }
    out[i] = best_response(s[i], values[i], p);
  }
  return BidProfile(std::move(out));
}

const char* to_string(BoundsProvenance provenance) {
  switch (provenance) {
    case BoundsProvenance::uniform:
      return "uniform";
    case BoundsProvenance::sorted:
      return "sorted";
    case BoundsProvenance::custom:
      return "custom";
  }
  return "custom";
}

BidLowerBounds lower_bounds_uniform(const ValuationProfile& values,
                                    WeightExponent p) {
  const double n = static_cast<double>(values.size());
  const double w = values.min() / (1.0 + (1.0 + 1.0 / (n - 1.0)) / p.value());
  return {std::vector<double>(values.size(), w), BoundsProvenance::uniform};
}

BidLowerBounds lower_bounds_sorted(const ValuationProfile& values,
                                   WeightExponent p) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });

  std::vector<double> w(n);
  // Ranks are 1-based below: rank k holds the k-th highest valuation.
  const double top = values[order[1]] / (1.0 + 2.0 / p.value());
  w[order[0]] = top;
  w[order[1]] = top;
  double previous = top;
  for (std::size_t k = 3; k <= n; ++k) {
    const double v = values[order[k - 1]];
    const double own =
        v / (1.0 + (1.0 + 1.0 / static_cast<double>(k - 1)) / p.value());
    previous = std::min(own, previous);
    w[order[k - 1]] = previous;
  }
  return {std::move(w), BoundsProvenance::sorted};
}

BoxCheck check_box_condition(std::span<const double> w,
                             const ValuationProfile& values, WeightExponent p) {
  if (w.size() != values.size()) {
    throw DomainError("bounds and valuation profiles differ in length");
  }
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0)) throw DomainError("lower bounds must be > 0");
  }

  BoxCheck out;
  out.satisfied = true;
  out.slack.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // f(w_i)/s_i = 1 / sum_{j != i} (w_j / w_i)^p, formed without w^p.
    double inv_ratio = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) inv_ratio += std::exp(p.value() * std::log(w[j] / w[i]));
    }
    const double ratio = 1.0 / inv_ratio;
    const double rhs = values[i] / (1.0 + (1.0 + ratio) / p.value());
    out.slack[i] = rhs - w[i];
    if (out.slack[i] < -kBoxTolerance) out.satisfied = false;
  }
  return out;
}

}  // namespace qprop
