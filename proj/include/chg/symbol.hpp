#pragma once
// Constant-coefficient Fourier-Laplace analysis of the linearized system:
// the 2x2 determinant symbol, its low/high-frequency split, sector-angle
// bounds, the parabolicity lower bound, and finite-difference Mikhlin scans
// of the solution-operator multiplier.

#include <array>
#include <complex>
#include <vector>

#include "chg/smallalg.hpp"

namespace chg {

using Complex = std::complex<double>;

struct SymbolParams {
  double beta = 1.0;
  Vec3 a{0.0, 0.0, 0.0};
  Vec3 c{0.0, 0.0, 0.0};
  // row-major n x n in the first n*n entries; defaults to the 2x2 identity
  std::array<double, 9> B{1, 0, 0, 1, 0, 0, 0, 0, 0};
  int n = 2;

  double& Bij(int i, int j) { return B[static_cast<std::size_t>(i) * n + j]; }
  double Bij(int i, int j) const { return B[static_cast<std::size_t>(i) * n + j]; }
  void set_identity_B() {
    B.fill(0.0);
    for (int i = 0; i < n; ++i) Bij(i, i) = 1.0;
  }

  double b_quad(const Vec3& xi) const {  // (B xi | xi)
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += Bij(i, j) * xi[i] * xi[j];
    return s;
  }
  double ellipticity() const;  // margin of the constitutive form for these constants
};

// det of the 2x2 Fourier-Laplace matrix:
//   lambda (1 - i(a|xi)) (1 - i(c|xi)) + (B xi|xi)(beta lambda + |xi|^2).
Complex determinant_symbol(const SymbolParams& p, Complex lambda, const Vec3& xi);

// m / lambda = z1(xi) + z2(lambda, xi) with
//   z1 = 1 - (a|xi)(c|xi) + beta (B xi|xi) - i (a+c|xi),
//   z2 = beta (B xi|xi) |xi|^2 / lambda.
struct SymbolSplit {
  Complex z1, z2;
};
SymbolSplit symbol_split(const SymbolParams& p, Complex lambda, const Vec3& xi);

// (1/sqrt(2)) min{1, (1 + cos(phi1 - phi2))^(1/2)}: the constant in
// |z1 + z2| >= C (|z1| + |z2|) for |arg z1 - arg z2| < pi.
double angle_sum_constant(double phi1, double phi2);

// Scan grid over a complex sector and frequency shells. Rays are uniform in
// [-phi, phi] (a single ray sits on the positive real axis), moduli
// log-spaced over [1e-3, 1e3]; same shells for xi over direction samples.
struct SectorGrid {
  double phi = 0.0;
  std::vector<Complex> lambdas;
  std::vector<Vec3> xis;

  static SectorGrid make(int n_dim, double phi, int n_rays = 24, int n_lambda_moduli = 25,
                         int n_xi_dirs = 16, int n_xi_moduli = 25);
};

// sigma = max over xi of |arg z1(xi)|; the sector bound requires sigma < pi/2.
struct AngleScan {
  double sigma = 0.0;
  bool pass = false;
  Vec3 argmax_xi{0.0, 0.0, 0.0};
};
AngleScan max_symbol_angle(const SymbolParams& p, const std::vector<Vec3>& xis);

// c_min = min |m| / (|lambda|(1+|xi|^2) + |xi|^4) over the grid, with the
// companion upper constant and the zero-set minimum of |m| itself.
struct ParabolicityScan {
  double c_min = 0.0;
  double c_hi = 0.0;
  double min_abs_m = 0.0;
  Complex argmin_lambda{0.0, 0.0};
  Vec3 argmin_xi{0.0, 0.0, 0.0};
};
ParabolicityScan parabolicity_scan(const SymbolParams& p, const SectorGrid& grid);

// S-hat = (lambda (1+|xi|^2) + |xi|^4) / m(lambda, xi).
Complex multiplier_symbol(const SymbolParams& p, Complex lambda, const Vec3& xi);

// Finite-difference scan of |xi|^|alpha| |d^alpha S-hat| for |alpha| <= 2
// (n <= 2). Steps scale with (1 + |xi|); each entry records the supremum per
// lambda sample and its behaviour under step halving.
struct MikhlinEntry {
  std::array<int, 2> alpha{0, 0};
  std::vector<double> sup_per_lambda;
  double sup = 0.0;
  double sup_halved_step = 0.0;
  bool stable = false;  // |change| < 5% under step halving
};
struct MikhlinScan {
  std::vector<MikhlinEntry> entries;
  bool pass = false;
};
MikhlinScan mikhlin_scan(const SymbolParams& p, const SectorGrid& grid, double step_scale = 1e-4);

// Empirical largest sector half-angle with positive c_min on the given grid
// resolution (bisection between pi/2 and pi).
double largest_stable_phi(const SymbolParams& p, int n_dim, int bisection_steps = 24);

}  // namespace chg
