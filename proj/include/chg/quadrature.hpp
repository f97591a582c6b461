#pragma once
// Adaptive Simpson quadrature for the smooth radial integrals in the
// coefficient-extension operators.

#include <cmath>
#include <functional>

namespace chg {

struct QuadResult {
  double value = 0.0;
  double achieved_tol = 0.0;  // accumulated local error estimates
  bool converged = true;      // false if the depth cap was hit anywhere
};

namespace detail {

template <class F>
void adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth, int max_depth, QuadResult& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = (left + right - whole) / 15.0;
  if (std::abs(err) <= tol || depth >= max_depth) {
    out.value += left + right + err;  // Richardson touch-up
    out.achieved_tol += std::abs(err);
    if (depth >= max_depth && std::abs(err) > tol) out.converged = false;
    return;
  }
  adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth, out);
  adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth, out);
}

}  // namespace detail

template <class F>
QuadResult adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-10,
                            int max_depth = 40) {
  QuadResult out;
  if (a == b) return out;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, 0, max_depth, out);
  return out;
}

}  // namespace chg
