#pragma once

// Adaptive Simpson quadrature for the test oracles. Independent of any
// closed forms under test.

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int depth = 48) {
  if (a == b) return 0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Integrates over [a,b] splitting at interior breakpoints (kinks).
inline double integrate_piecewise(const std::function<double(double)>& f,
                                  const std::vector<double>& pts, double tol = 1e-12) {
  double acc = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += integrate(f, pts[i], pts[i + 1], tol);
  return acc;
}

}  // namespace oracle
