#pragma once
// Constitutive data (beta, a, c, b): representation, validators for the
// structural assumptions (uniform ellipticity of the constitutive quadratic
// form, divergence-freeness, boundary tangency), and the constructive
// extension operators that continue admissible coefficients from a ball to
// the whole space.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chg/grid.hpp"
#include "chg/smallalg.hpp"

namespace chg {

// Point evaluators. State-dependent coefficients receive (x, psi, grad psi);
// x-only fields ignore the state arguments. Evaluators must be effect-free.
using VectorEval = std::function<Vec3(const Vec3& x, double psi, const Vec3& grad_psi)>;
using ScalarEval = std::function<double(const Vec3& x, double psi, const Vec3& grad_psi)>;

struct VectorCoefficient {
  VectorEval eval;
  bool state_dependent = false;
  std::string name = "zero";  // registry spelling, kept for config round-trips

  static VectorCoefficient zero();
  static VectorCoefficient constant(double ax, double ay = 0.0);
};

struct ScalarCoefficient {
  ScalarEval eval;
  bool state_dependent = false;
  std::string name = "constant(1)";

  static ScalarCoefficient constant(double b0);
};

struct CoefficientSet {
  double beta = 1.0;
  VectorCoefficient a = VectorCoefficient::zero();
  VectorCoefficient c = VectorCoefficient::zero();
  ScalarCoefficient b = ScalarCoefficient::constant(1.0);
  std::optional<double> epsilon;  // certified ellipticity margin, set by the field validator
};

// Largest eps for which
//   beta z0^2 + (a+c|z1) z0 + (B z1|z1) >= eps (z0^2 + |z1|^2)
// holds at one point: the smallest eigenvalue of the symmetric (n+1)x(n+1)
// form matrix [[beta, (a+c)^T/2], [(a+c)/2, sym(B)]]. A negative value is a
// valid verdict (the hypothesis fails there). B is row-major n x n.
double ellipticity_margin(double beta, const Vec3& a, const Vec3& c, const double* B, int n);

// Closed form for B = b I: the form matrix splits into the 2x2 block
// [[beta, |d|/2], [|d|/2, b]] (d = a+c) plus (n-1) copies of b, so the
// eigenvalues solve (beta - l)(b - l) = |d|^2 / 4.
double ellipticity_margin_iso(double beta, const Vec3& a, const Vec3& c, double b, int n);

// lambda_min(sym(beta B - (a(x)c + c(x)a)/2)) - eps*beta. Nonnegative for
// every point where the ellipticity hypothesis holds with margin eps.
double coupling_margin(double beta, const Vec3& a, const Vec3& c, const double* B, int n,
                       double eps);

// Coefficients frozen on a grid at a given state (state may be null for
// x-only coefficients; required when any coefficient is state-dependent).
// Face samples feed flux assembly, cell samples feed the validators.
struct FrozenCoefficients {
  double beta = 1.0;
  FaceField a_normal;  // face-normal component of a at face centers
  FaceField c_normal;
  FaceField b_face;    // scalar mobility at face centers (per-axis storage)
  std::vector<Vec3> a_cell, c_cell;
  std::vector<double> b_cell;
  double epsilon = 0.0;  // min ellipticity margin over all sample points
};

FrozenCoefficients freeze(const CoefficientSet& coeffs, const GridSpec& grid,
                          const CellField* psi = nullptr);

// Minimum of the pointwise ellipticity margin over all cell and face sample
// points (coefficients frozen at `psi` for state-dependent sets). Stores the
// result into coeffs.epsilon. A run must reject the set if this is <= 0.
double field_ellipticity_margin(CoefficientSet& coeffs, const GridSpec& grid,
                                const CellField* psi = nullptr);

// Max norm of the discrete divergence of the face-normal samples of vf.
double max_divergence(const VectorCoefficient& vf, const GridSpec& grid,
                      const CellField* psi = nullptr);

// Max |(vf | nu)| over boundary faces.
double max_boundary_normal(const VectorCoefficient& vf, const GridSpec& grid,
                           const CellField* psi = nullptr);

// ---------------------------------------------------------------------------
// Extensions from a ball
// ---------------------------------------------------------------------------

struct BallVectorSample {
  double radius = 1.0;
  int n = 2;  // ambient dimension, 2 or 3
  std::function<Vec3(const Vec3&)> eval;
};

struct BallScalarSample {
  double radius = 1.0;
  int n = 2;
  std::function<double(const Vec3&)> eval;
};

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(double achieved)
      : std::runtime_error("radial quadrature did not reach tolerance"), achieved_tol(achieved) {}
  double achieved_tol;
};

// Divergence-preserving extension of a divergence-free field sampled on the
// closed ball of radius r: inside the ball the sample itself; outside
//   a(r^2_k x / r^2) - 2 (xi | a(r^2_k x / r^2)) xi + R(r, xi) xi,
// where the radial profile R solves a first-order ODE whose explicit solution
// is evaluated by adaptive Simpson quadrature (abs tol quad_tol, depth 40).
// |x| within 1e-14 of the sphere routes to the inside branch.
Vec3 extend_divergence_free(const BallVectorSample& sample, const Vec3& x, double quad_tol = 1e-10);

// Reflection (inversion) extension of a scalar coefficient: b(x) inside the
// ball, b(r_k^2 x / |x|^2) outside.
double extend_by_reflection(const BallScalarSample& sample, const Vec3& x);

// Supremum of |field(x) - base| over a uniform grid on the cube
// [-query_radius, query_radius]^n (points_per_axis samples per axis).
double deviation_bound(const std::function<Vec3(const Vec3&)>& field, const Vec3& base, int n,
                       double query_radius, int points_per_axis);

}  // namespace chg
