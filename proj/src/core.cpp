#include "qprop/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qprop/error.hpp"

namespace qprop {

WeightExponent::WeightExponent(double p) : p_(p) {
  if (!(std::isfinite(p) && p > 0.0)) {
    throw DomainError("weight exponent must be finite and > 0, got " +
                      std::to_string(p));
  }
}

ValuationProfile::ValuationProfile(std::vector<double> values)
    : v_(std::move(values)) {
  if (v_.size() < 2) {
    throw DomainError("need at least two bidders, got " +
                      std::to_string(v_.size()));
  }
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!(std::isfinite(v_[i]) && v_[i] > 0.0)) {
      throw DomainError("valuation " + std::to_string(i) +
                        " must be finite and > 0");
    }
  }
}

double ValuationProfile::min() const {
  return *std::min_element(v_.begin(), v_.end());
}

BidProfile::BidProfile(std::vector<double> bids) : b_(std::move(bids)) {
  for (std::size_t i = 0; i < b_.size(); ++i) {
    if (!(std::isfinite(b_[i]) && b_[i] >= 0.0)) {
      throw DomainError("bid " + std::to_string(i) +
                        " must be finite and >= 0");
    }
  }
}

double weight(WeightExponent p, double x) {
  if (!(x >= 0.0)) throw DomainError("weight argument must be >= 0");
  if (x == 0.0) return 0.0;
  return std::exp(p.value() * std::log(x));
}

AllocationProfile allocate(const BidProfile& bids, WeightExponent p) {
  const auto b = bids.values();
  // Work with log-weights so that x^p never has to be formed for large p.
  double max_log = -INFINITY;
  for (double x : b) {
    if (x > 0.0) max_log = std::max(max_log, p.value() * std::log(x));
  }
  if (max_log == -INFINITY) throw AllZeroBids();

  AllocationProfile out;
  out.shares.resize(b.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] > 0.0) {
      out.shares[i] = std::exp(p.value() * std::log(b[i]) - max_log);
      total += out.shares[i];
    }
  }
  for (double& a : out.shares) a /= total;
  return out;
}

double utility(const BidProfile& bids, const ValuationProfile& values,
               WeightExponent p, std::size_t i) {
  if (bids.size() != values.size()) {
    throw DomainError("bid and valuation profiles differ in length");
  }
  if (i >= bids.size()) throw DomainError("bidder index out of range");
  const auto a = allocate(bids, p);
  return a.shares[i] * (values[i] - bids[i]);
}

std::vector<double> competitor_weights(std::span<const double> bids,
                                       WeightExponent p) {
  const std::size_t n = bids.size();
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + weight(p, bids[i]);
  }
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = suffix[i + 1] + weight(p, bids[i]);
  }
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = prefix[i] + suffix[i + 1];
  return s;
}

double response_utility(double b, double s, double v, WeightExponent p) {
  if (b <= 0.0) return 0.0;
  if (s <= 0.0) return v - b;
  const double log_ratio = std::log(s) - p.value() * std::log(b);
  const double a = 1.0 / (1.0 + std::exp(log_ratio));
  return a * (v - b);
}

Derivatives weight_derivatives(WeightExponent p, double x) {
  if (!(x > 0.0)) throw DomainError("weight derivatives need x > 0");
  const double pp = p.value();
  const double f = weight(p, x);
  return {f, pp * f / x, pp * (pp - 1.0) * f / (x * x)};
}

Derivatives allocation_derivatives(double b, double s, WeightExponent p) {
  if (!(b > 0.0)) throw DomainError("allocation derivatives need b > 0");
  if (!(s > 0.0)) throw DomainError("allocation derivatives need s > 0");
  const double pp = p.value();
  // r = f/s; a = r/(1+r), a' = (p/b) q t, a'' = (p/b^2) q t ((p-1) - 2pq)
  // with q = r/(1+r), t = 1/(1+r).
  const double r = std::exp(pp * std::log(b) - std::log(s));
  const double q = std::isinf(r) ? 1.0 : r / (1.0 + r);
  const double t = 1.0 / (1.0 + r);
  return {q, (pp / b) * q * t, (pp / (b * b)) * q * t * ((pp - 1.0) - 2.0 * pp * q)};
}

Derivatives utility_derivatives(double b, double s, double v,
                                WeightExponent p) {
  const auto a = allocation_derivatives(b, s, p);
  const double margin = v - b;
  return {a.value * margin, a.first * margin - a.value,
          a.second * margin - 2.0 * a.first};
}

}  // namespace qprop
