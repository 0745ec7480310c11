#pragma once

// Scalar search helpers shared by the sweep and constant solvers.

#include <cmath>
#include <utility>

namespace pbcert::detail {

inline constexpr double kInvPhi = 0.6180339887498949;

/// Golden-section search for a minimum of f on [a, b]. Returns (argmin, min).
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, double tol, int max_iter = 200) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Bisection for a sign change of f on [a, b]; f(a) and f(b) must differ in sign.
template <class F>
double bisect(F&& f, double a, double b, double tol = 0.0, int max_iter = 400) {
  double fa = f(a);
  for (int it = 0; it < max_iter; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b || (b - a) <= tol) return m;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace pbcert::detail
