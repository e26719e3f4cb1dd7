#include "qprop/olos.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "qprop/error.hpp"

namespace qprop {
namespace {

struct Coefficients {
  double c1, c2, c3, c4;
};

Coefficients coefficients(const OlosInstance& inst) {
  const double n = inst.n();
  const double p = inst.p().value();
  const double a = inst.alpha();
  return {(n - 2.0) + (1.0 + p) * (n - 1.0), a * (1.0 + p) * (n - 1.0),
          (n - 1.0) * (n - 2.0) * (1.0 + p),
          a * (n - 1.0) * ((1.0 + p) * (n - 2.0) + 1.0)};
}

std::string describe(const OlosInstance& inst) {
  std::ostringstream os;
  os.precision(17);
  os << "(n=" << inst.n() << ", alpha=" << inst.alpha()
     << ", p=" << inst.p().value() << ")";
  return os.str();
}

// h(z) / z^{2p+1} = 1 + c1 m - c2 m/z + c3 m^2 - c4 m^2/z with m = z^{-p}.
// Same sign as h for z > 0, and every term stays bounded for z > 1.
struct ScaledH {
  double value;
  double slope;
  double scale;  // largest absolute term
};

ScaledH scaled_h(double z, const Coefficients& c, double p) {
  const double m = std::exp(-p * std::log(z));
  const double m2 = m * m;
  const double iz = 1.0 / z;
  const double t1 = c.c1 * m;
  const double t2 = c.c2 * m * iz;
  const double t3 = c.c3 * m2;
  const double t4 = c.c4 * m2 * iz;
  const double value = 1.0 + t1 - t2 + t3 - t4;
  const double slope =
      iz * (-p * t1 + (p + 1.0) * t2 - 2.0 * p * t3 + (2.0 * p + 1.0) * t4);
  return {value, slope, std::max({1.0, t1, t2, t3, t4})};
}

double eta_unchecked(double x, const OlosInstance& inst) {
  const double n = inst.n();
  const double p = inst.p().value();
  const double m = std::exp(-p * std::log(x));
  const double allocation_term = 1.0 + (x - 1.0) / (1.0 + (n - 1.0) * m);
  const double denom = 1.0 + (n - 2.0) * m - (n - 1.0) * m * m;
  const double shortfall = (inst.alpha() - x) * (n - 1.0) * m * m / x / denom;
  return p / (1.0 + p) * allocation_term * (1.0 - shortfall);
}

double relative_residual(std::initializer_list<double> signed_terms) {
  double sum = 0.0;
  double scale = 0.0;
  for (double t : signed_terms) {
    sum += t;
    scale = std::max(scale, std::abs(t));
  }
  return scale > 0.0 ? std::abs(sum) / scale : 0.0;
}

}  // namespace

OlosInstance::OlosInstance(int n, double alpha, WeightExponent p)
    : n_(n), alpha_(alpha), p_(p) {
  if (n < 2) throw DomainError("OLOS needs n >= 2, got " + std::to_string(n));
  if (!(std::isfinite(alpha) && alpha > 1.0)) {
    throw DomainError("OLOS needs alpha > 1");
  }
}

ValuationProfile OlosInstance::valuations() const {
  std::vector<double> v(static_cast<std::size_t>(n_), 1.0);
  v[0] = alpha_;
  return ValuationProfile(std::move(v));
}

ZBracket z_bracket(const OlosInstance& inst) {
  const double p = inst.p().value();
  return {std::exp(std::log(inst.alpha()) / (2.0 * p + 1.0)), inst.alpha()};
}

double h_eval(double z, const OlosInstance& inst) {
  if (!(z > 0.0)) throw DomainError("h(z) needs z > 0");
  const auto c = coefficients(inst);
  const double p = inst.p().value();
  const double lz = std::log(z);
  return std::exp((2.0 * p + 1.0) * lz) + c.c1 * std::exp((p + 1.0) * lz) -
         c.c2 * std::exp(p * lz) + c.c3 * z - c.c4;
}

double h_derivative(double z, const OlosInstance& inst) {
  if (!(z > 0.0)) throw DomainError("h'(z) needs z > 0");
  const auto c = coefficients(inst);
  const double p = inst.p().value();
  const double lz = std::log(z);
  return (2.0 * p + 1.0) * std::exp(2.0 * p * lz) +
         (p + 1.0) * c.c1 * std::exp(p * lz) -
         p * c.c2 * std::exp((p - 1.0) * lz) + c.c3;
}

double solve_z(const OlosInstance& inst, double tol) {
  if (!(tol > 0.0)) throw DomainError("solve_z needs tol > 0");
  const auto c = coefficients(inst);
  const double p = inst.p().value();
  const auto bracket = z_bracket(inst);
  const double offset = 1e-12 * inst.alpha();
  double lo = bracket.lo + offset;
  double hi = bracket.hi - offset;

  const auto at_lo = scaled_h(lo, c, p);
  const auto at_hi = scaled_h(hi, c, p);
  if (!(at_lo.value < 0.0 && at_hi.value > 0.0)) {
    throw BracketFailure("h(z) does not change sign from - to + on (" +
                         std::to_string(lo) + ", " + std::to_string(hi) +
                         ") for " + describe(inst));
  }

  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (scaled_h(mid, c, p).value < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  double z = std::abs(scaled_h(lo, c, p).value) <= std::abs(scaled_h(hi, c, p).value)
                 ? lo
                 : hi;
  auto g = scaled_h(z, c, p);
  for (int it = 0; it < 5 && g.value != 0.0 && g.slope != 0.0; ++it) {
    const double next = z - g.value / g.slope;
    if (!(next >= lo && next <= hi)) break;
    const auto trial = scaled_h(next, c, p);
    if (std::abs(trial.value) >= std::abs(g.value)) break;
    z = next;
    g = trial;
  }

  if (std::abs(g.value) > tol * g.scale) {
    throw ConvergenceFailure("h(z) residual " + std::to_string(g.value) +
                             " above tolerance for " + describe(inst));
  }
  return z;
}

BidProfile OlosEquilibrium::profile(int n) const {
  std::vector<double> b(static_cast<std::size_t>(n), b2);
  b[0] = b1;
  return BidProfile(std::move(b));
}

OlosEquilibrium olos_equilibrium(const OlosInstance& inst) {
  const double n = inst.n();
  const double p = inst.p().value();
  const double alpha = inst.alpha();

  OlosEquilibrium eq{};
  eq.z = solve_z(inst);
  const double z = eq.z;
  const double zp = std::exp(p * std::log(z));
  eq.w_aux = z * zp * (zp + n - 2.0) / (n - 1.0);
  eq.b2 = p / (1.0 + p) * (alpha - eq.w_aux) / (z - eq.w_aux);
  eq.b1 = z * eq.b2;
  eq.revenue = eta_unchecked(z, inst);

  const double m = 1.0 / zp;
  eq.revenue_direct = eq.b2 * (z + (n - 1.0) * m) / (1.0 + (n - 1.0) * m);

  // Both first-order conditions divided through by b2^p.
  eq.foc_residual_large = relative_residual(
      {(n - 1.0) * alpha * p, -(n - 1.0) * (1.0 + p) * eq.b1, -eq.b1 * zp});
  eq.foc_residual_small = relative_residual(
      {(zp + n - 2.0) * p, -(zp + n - 2.0) * (1.0 + p) * eq.b2, -eq.b2});
  return eq;
}

RevenueBounds revenue_bounds(const OlosInstance& inst) {
  const auto bracket = z_bracket(inst);
  return {eta_unchecked(bracket.lo, inst), eta_unchecked(bracket.hi, inst)};
}

double eta(double x, const OlosInstance& inst) {
  const auto bracket = z_bracket(inst);
  const double slack = 1e-12 * bracket.hi;
  if (!(x >= bracket.lo - slack && x <= bracket.hi + slack)) {
    throw DomainError("eta(x) is defined on [alpha^{1/(2p+1)}, alpha]");
  }
  return eta_unchecked(x, inst);
}

}  // namespace qprop
