#include "qprop/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "qprop/error.hpp"
#include "qprop/olos.hpp"
#include "qprop/parallel.hpp"
#include "qprop/scalar_search.hpp"

namespace qprop {
namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = std::exp(a + (b - a) * static_cast<double>(k) /
                            static_cast<double>(points - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct Maximum {
  double x;
  double fx;
  bool at_boundary;
  std::vector<TracePoint> trace;
};

// Coarse log-spaced scan, then golden section in log p over the two cells
// around the best grid point. The scan catches a second peak that a pure
// golden section could miss.
Maximum coarse_then_golden(const std::function<double(double)>& f, double lo,
                           double hi, std::size_t points, double tol,
                           bool parallel_scan) {
  const auto grid = log_grid(lo, hi, points);
  std::vector<double> values;
  if (parallel_scan) {
    values = parallel_map(grid.size(), [&](std::size_t k) { return f(grid[k]); });
  } else {
    values.reserve(grid.size());
    for (double x : grid) values.push_back(f(x));
  }

  Maximum out{};
  out.trace.reserve(grid.size() + 64);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.trace.push_back({grid[k], values[k]});
  }
  const auto peak = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  out.at_boundary = peak == 0 || peak + 1 == grid.size();

  const double cell_lo = std::log(grid[peak == 0 ? 0 : peak - 1]);
  const double cell_hi = std::log(grid[std::min(peak + 1, grid.size() - 1)]);
  golden_section_maximize([&](double t) { return f(std::exp(t)); }, cell_lo,
                          cell_hi, std::log1p(tol), 500,
                          [&](double t, double ft) {
                            out.trace.push_back({std::exp(t), ft});
                          });

  const auto best = std::max_element(
      out.trace.begin(), out.trace.end(),
      [](const TracePoint& a, const TracePoint& b) { return a.revenue < b.revenue; });
  out.x = best->p;
  out.fx = best->revenue;
  return out;
}

void validate_search(double p_min, double p_max, std::size_t points, double tol) {
  if (!(std::isfinite(p_min) && p_min > 0.0)) throw DomainError("p_min must be > 0");
  if (!(std::isfinite(p_max) && p_max > p_min)) {
    throw DomainError("p_max must exceed p_min");
  }
  if (points < 2) throw DomainError("need at least two coarse grid points");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
}

SweepRow solve_row(const SweepSpec& spec, double value) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepRow row{spec.axis, value, nan, nan, nan, nan, nan, nan, "ok"};
  try {
    int n = spec.n;
    double alpha = spec.alpha;
    double p = spec.p;
    switch (spec.axis) {
      case SweepAxis::p:
        p = value;
        break;
      case SweepAxis::alpha:
        alpha = value;
        break;
      case SweepAxis::n:
        n = static_cast<int>(value);
        break;
    }
    const OlosInstance inst(n, alpha, WeightExponent(p));
    const auto eq = olos_equilibrium(inst);
    const auto bounds = revenue_bounds(inst);
    row.revenue = eq.revenue;
    row.z = eq.z;
    row.b1 = eq.b1;
    row.b2 = eq.b2;
    row.lower_bound = bounds.lower;
    row.upper_bound = bounds.upper;
  } catch (const std::exception& e) {
    row.status = error_kind(e);
  }
  return row;
}

}  // namespace

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const BracketFailure*>(&e)) return "bracket_failure";
  if (dynamic_cast<const ConvergenceFailure*>(&e)) return "convergence_failure";
  if (dynamic_cast<const AllZeroBids*>(&e)) return "all_zero_bids";
  if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
  return "error";
}

double equilibrium_revenue(int n, double alpha, double p) {
  return olos_equilibrium(OlosInstance(n, alpha, WeightExponent(p))).revenue;
}

DesignResult optimize_p(int n, double alpha, const LineSearchOptions& opts) {
  validate_search(opts.p_min, opts.p_max, opts.coarse_points, opts.tol);
  const OlosInstance check(n, alpha, WeightExponent(1.0));
  (void)check;

  auto m = coarse_then_golden(
      [&](double p) { return equilibrium_revenue(n, alpha, p); }, opts.p_min,
      opts.p_max, opts.coarse_points, opts.tol, false);
  return {WeightExponent(m.x), m.fx, std::move(m.trace), m.at_boundary};
}

void RobustDomain::validate() const {
  if (alphas.empty()) throw DomainError("alphas: must be non-empty");
  if (ns.empty()) throw DomainError("ns: must be non-empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(std::isfinite(alphas[i]) && alphas[i] > 1.0)) {
      throw DomainError("alphas[" + std::to_string(i) + "]: must be > 1");
    }
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) throw DomainError("ns[" + std::to_string(i) + "]: must be >= 2");
  }
  if (!(std::isfinite(p_grid.min) && p_grid.min > 0.0)) {
    throw DomainError("p_grid.min: must be > 0");
  }
  if (!(std::isfinite(p_grid.max) && p_grid.max > p_grid.min)) {
    throw DomainError("p_grid.max: must exceed p_grid.min");
  }
  if (p_grid.points < 2) throw DomainError("p_grid.points: must be >= 2");
}

double worst_case_revenue(const RobustDomain& domain, double p,
                          double* argmin_alpha, int* argmin_n) {
  double worst = std::numeric_limits<double>::infinity();
  for (double alpha : domain.alphas) {
    for (int n : domain.ns) {
      const double r = equilibrium_revenue(n, alpha, p);
      if (r < worst) {
        worst = r;
        if (argmin_alpha) *argmin_alpha = alpha;
        if (argmin_n) *argmin_n = n;
      }
    }
  }
  return worst;
}

RobustResult robust_p(const RobustDomain& domain, double tol) {
  domain.validate();
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  auto m = coarse_then_golden(
      [&](double p) { return worst_case_revenue(domain, p); }, domain.p_grid.min,
      domain.p_grid.max, domain.p_grid.points, tol, true);
  double alpha = 0.0;
  int n = 0;
  const double worst = worst_case_revenue(domain, m.x, &alpha, &n);
  return {WeightExponent(m.x), worst, alpha, n, std::move(m.trace), m.at_boundary};
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::p:
      return "p";
    case SweepAxis::alpha:
      return "alpha";
    case SweepAxis::n:
      return "n";
  }
  return "p";
}

const char* to_string(StarAxis axis) {
  return axis == StarAxis::alpha ? "alpha" : "n";
}

std::vector<double> sweep_values(const SweepSpec& spec) {
  if (spec.points < 1) throw DomainError("sweep needs at least one point");
  if (!(std::isfinite(spec.min) && std::isfinite(spec.max) && spec.min <= spec.max)) {
    throw DomainError("sweep needs finite min <= max");
  }
  if (spec.spacing == Spacing::log && !(spec.min > 0.0)) {
    throw DomainError("log spacing needs min > 0");
  }

  std::vector<double> values;
  if (spec.points == 1) {
    values.push_back(spec.min);
  } else if (spec.spacing == Spacing::log) {
    values = log_grid(spec.min, spec.max, spec.points);
  } else {
    values.resize(spec.points);
    for (std::size_t k = 0; k < spec.points; ++k) {
      values[k] = spec.min + (spec.max - spec.min) * static_cast<double>(k) /
                                 static_cast<double>(spec.points - 1);
    }
    values.back() = spec.max;
  }

  if (spec.axis == SweepAxis::n) {
    std::vector<double> rounded;
    for (double v : values) {
      const double r = std::round(v);
      if (rounded.empty() || rounded.back() != r) rounded.push_back(r);
    }
    values = std::move(rounded);
  }
  return values;
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  const auto values = sweep_values(spec);
  return parallel_map(values.size(),
                      [&](std::size_t k) { return solve_row(spec, values[k]); });
}

std::vector<StarRow> star_curves(const StarSpec& spec) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return parallel_map(spec.values.size(), [&](std::size_t k) {
    const double value = spec.values[k];
    StarRow row{value, nan, nan, false, "ok"};
    try {
      const int n = spec.axis == StarAxis::n ? static_cast<int>(std::lround(value))
                                             : spec.n;
      const double alpha = spec.axis == StarAxis::alpha ? value : spec.alpha;
      const auto result = optimize_p(n, alpha, spec.search);
      row.p_star = result.p_star.value();
      row.r_star = result.r_star;
      row.at_boundary = result.at_boundary;
    } catch (const std::exception& e) {
      row.status = error_kind(e);
    }
    return row;
  });
}

}  // namespace qprop
