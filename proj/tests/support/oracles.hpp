#pragma once

// Test-only numerical oracles, independent of the library's exact-quadrature
// integration path.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double s,
                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double s2 = sl + sr;
  if (depth <= 0 || std::abs(s2 - s) <= 15.0 * tol) return s2 + (s2 - s) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, sl, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, sr, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-13) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, s, tol, 48);
}

/// Adaptive quadrature split at known kink locations (knots), then adaptive
/// within each smooth span.
template <class F>
double integrate_piecewise(const F& f, const std::vector<double>& breakpoints,
                           double tol = 1e-13) {
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s)
    acc += integrate(f, breakpoints[s], breakpoints[s + 1], tol);
  return acc;
}

/// Central finite difference of a scalar function.
template <class F>
double central_diff(const F& f, double t, double h = 1e-6) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace oracles
