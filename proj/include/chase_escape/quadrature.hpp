// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace chase {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
  bool converged = true;
};

namespace detail {

template <class F>
void adaptive_simpson(const F& f, double a, double fa, double b, double fb,
                      double m, double fm, double whole, double tol, int depth,
                      int force, QuadratureResult& out) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Richardson: |S_fine - S_coarse| / 15 estimates the fine error.
  if (depth <= 0) {
    out.value += left + right + delta / 15.0;
    out.error += std::abs(delta) / 15.0;
    if (std::abs(delta) / 15.0 > tol) out.converged = false;
    return;
  }
  // A small delta only certifies the panel once it has been split a few
  // times; before that, coarse and fine nodes can both straddle a narrow
  // feature and agree on the wrong answer.
  if (force <= 0 && std::abs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;
    out.error += std::abs(delta) / 15.0;
    return;
  }
  adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1,
                   force - 1, out);
  adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1,
                   force - 1, out);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance
/// abs_tol. Panels are refined unconditionally for the first `min_depth`
/// levels before the Richardson acceptance test applies. The result carries
/// an error estimate; `converged` is false when the recursion depth limit
/// was hit before the tolerance.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    double abs_tol, int max_depth = 48,
                                    int min_depth = 5) {
  QuadratureResult out;
  if (a == b) return out;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::adaptive_simpson(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth,
                           min_depth, out);
  return out;
}

/// Variant that throws on non-convergence, reporting the achieved bound.
template <class F>
double integrate_or_throw(const F& f, double a, double b, double abs_tol,
                          int max_depth = 48) {
  const QuadratureResult r = integrate_adaptive(f, a, b, abs_tol, max_depth);
  if (!r.converged) {
    char bound[32];
    std::snprintf(bound, sizeof(bound), "%.3e", r.error);
    throw std::runtime_error(
        std::string("quadrature did not converge; achieved error ~") + bound);
  }
  return r.value;
}

}  // namespace chase
