#pragma once

// Choosing the weight exponent p for OLOS auctions: the revenue-maximizing
// p*(n, alpha), a maximin p over a finite set of (alpha, n), and the parameter
// sweeps behind the revenue curves.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qprop/core.hpp"

namespace qprop {

/// Equilibrium revenue R(n, alpha, p) of the OLOS instance.
double equilibrium_revenue(int n, double alpha, double p);

struct LineSearchOptions {
  double p_min = 0.05;
  double p_max = 50.0;
  double tol = 1e-6;  // relative width in p
  std::size_t coarse_points = 64;
};

struct TracePoint {
  double p;
  double revenue;
};

struct DesignResult {
  WeightExponent p_star;
  double r_star;
  std::vector<TracePoint> search_trace;  // coarse grid, then refinement
  /// The coarse scan peaked at an end of [p_min, p_max]; the true maximizer
  /// may lie outside the searched range.
  bool at_boundary;
};

/// Log-spaced coarse scan of R(n, alpha, .) followed by golden-section
/// refinement (in log p) inside the cells adjacent to the best grid point.
/// Returns the best evaluated point, so R(p_star) >= R(p) over the trace.
DesignResult optimize_p(int n, double alpha, const LineSearchOptions& opts = {});

struct PGrid {
  double min = 0.05;
  double max = 50.0;
  std::size_t points = 64;
};

struct RobustDomain {
  std::vector<double> alphas;
  std::vector<int> ns;
  PGrid p_grid;

  /// Throws DomainError naming the offending field.
  void validate() const;
};

struct RobustResult {
  WeightExponent p_tilde;
  double worst_case_revenue;  // min over the domain of R(n, alpha, p_tilde)
  double argmin_alpha;
  int argmin_n;
  std::vector<TracePoint> search_trace;  // (p, worst-case revenue)
  bool at_boundary;
};

/// min over (alpha, n) in the domain of R(n, alpha, p); the minimizing
/// instance is written to the optional out-parameters.
double worst_case_revenue(const RobustDomain& domain, double p,
                          double* argmin_alpha = nullptr,
                          int* argmin_n = nullptr);

/// Maximizes worst_case_revenue over p with the same coarse-then-golden scheme
/// as optimize_p. Solver errors propagate with the instance in the message.
RobustResult robust_p(const RobustDomain& domain, double tol = 1e-6);

enum class SweepAxis { p, alpha, n };
enum class Spacing { linear, log };

const char* to_string(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::p;
  int n = 2;
  double alpha = 2.0;
  double p = 1.0;
  double min = 0.1;
  double max = 10.0;
  std::size_t points = 64;
  Spacing spacing = Spacing::linear;
};

/// Grid of the varied axis. n values are rounded and de-duplicated.
std::vector<double> sweep_values(const SweepSpec& spec);

struct SweepRow {
  SweepAxis axis;
  double value;
  double revenue;
  double z;
  double b1;
  double b2;
  double lower_bound;
  double upper_bound;
  std::string status;  // "ok" or the error kind; numbers are NaN on error
};

/// One independently solved row per grid value, in grid order.
std::vector<SweepRow> sweep(const SweepSpec& spec);

enum class StarAxis { alpha, n };

const char* to_string(StarAxis axis);

struct StarSpec {
  StarAxis axis = StarAxis::alpha;
  std::vector<double> values;
  int n = 2;            // held fixed when axis == alpha
  double alpha = 3.0;   // held fixed when axis == n
  LineSearchOptions search;
};

struct StarRow {
  double value;
  double p_star;
  double r_star;
  bool at_boundary;
  std::string status;
};

/// optimize_p at every value of the axis, in the given order.
std::vector<StarRow> star_curves(const StarSpec& spec);

/// Short machine-readable tag for a library exception.
std::string error_kind(const std::exception& e);

}  // namespace qprop
