#pragma once

// One-dimensional search primitives shared by the best-response solver and
// the mechanism-design line searches.

#include <cmath>
#include <cstddef>

namespace qprop {

struct ScalarOptimum {
  double x;
  double fx;
  std::size_t evaluations;
};

/// Golden-section maximization of a unimodal f on [lo, hi], stopping when the
/// bracket is narrower than `width`. Ties move the bracket to the right, which
/// is what a left plateau of exact zeros (x^p underflow) needs. `observe(x, fx)`
/// sees every evaluation.
template <class F, class Observe>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double width,
                                      std::size_t max_iter, Observe&& observe) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  observe(c, fc);
  observe(d, fd);
  std::size_t evals = 2;

  for (std::size_t it = 0; it < max_iter && (hi - lo) > width; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
      observe(c, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
      observe(d, fd);
    }
    ++evals;
  }
  return fc > fd ? ScalarOptimum{c, fc, evals} : ScalarOptimum{d, fd, evals};
}

template <class F>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double width,
                                      std::size_t max_iter) {
  return golden_section_maximize(std::forward<F>(f), lo, hi, width, max_iter,
                                 [](double, double) {});
}

}  // namespace qprop
