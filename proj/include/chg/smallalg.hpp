#pragma once
// Dense helpers for the small constitutive matrices (n <= 3, form matrices
// up to 4x4): cyclic Jacobi eigenvalues and a few vector utilities.

#include <array>
#include <cmath>
#include <cstddef>

namespace chg {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Vec3& a, int n) { return std::sqrt(dot(a, a, n)); }

// Symmetric NxN matrix in row-major storage, N <= 4. Cyclic Jacobi sweeps;
// returns the smallest eigenvalue.
inline double smallest_eigenvalue_sym(const double* m_in, int n) {
  double a[16];
  for (int i = 0; i < n * n; ++i) a[i] = m_in[i];
  auto at = [&](int i, int j) -> double& { return a[i * n + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += at(i, i) * at(i, i);
    if (off <= 1e-30 * (diag + 1e-300)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double lmin = at(0, 0);
  for (int i = 1; i < n; ++i) lmin = std::min(lmin, at(i, i));
  return lmin;
}

}  // namespace chg
