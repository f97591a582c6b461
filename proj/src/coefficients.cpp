#include "chg/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chg/kernels.hpp"
#include "chg/quadrature.hpp"

namespace chg {

VectorCoefficient VectorCoefficient::zero() {
  VectorCoefficient v;
  v.eval = [](const Vec3&, double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
  v.state_dependent = false;
  v.name = "zero";
  return v;
}

VectorCoefficient VectorCoefficient::constant(double ax, double ay) {
  VectorCoefficient v;
  v.eval = [ax, ay](const Vec3&, double, const Vec3&) { return Vec3{ax, ay, 0.0}; };
  v.state_dependent = false;
  v.name = "constant(" + std::to_string(ax) + "," + std::to_string(ay) + ")";
  return v;
}

ScalarCoefficient ScalarCoefficient::constant(double b0) {
  ScalarCoefficient s;
  s.eval = [b0](const Vec3&, double, const Vec3&) { return b0; };
  s.state_dependent = false;
  s.name = "constant(" + std::to_string(b0) + ")";
  return s;
}

double ellipticity_margin(double beta, const Vec3& a, const Vec3& c, const double* B, int n) {
  double m[16] = {0.0};
  const int dim = n + 1;
  m[0] = beta;
  for (int i = 0; i < n; ++i) {
    const double half_d = 0.5 * (a[i] + c[i]);
    m[0 * dim + (i + 1)] = half_d;
    m[(i + 1) * dim + 0] = half_d;
    for (int j = 0; j < n; ++j) {
      m[(i + 1) * dim + (j + 1)] = 0.5 * (B[i * n + j] + B[j * n + i]);
    }
  }
  return smallest_eigenvalue_sym(m, dim);
}

double ellipticity_margin_iso(double beta, const Vec3& a, const Vec3& c, double b, int n) {
  Vec3 d{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) d[i] = a[i] + c[i];
  const double q = 0.5 * norm(d, n);
  const double mid = 0.5 * (beta + b);
  const double rad = std::sqrt(0.25 * (beta - b) * (beta - b) + q * q);
  return mid - rad;  // always <= min(beta, b), so the b-eigenspace never wins
}

double coupling_margin(double beta, const Vec3& a, const Vec3& c, const double* B, int n,
                       double eps) {
  double m[9];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sym_b = 0.5 * (B[i * n + j] + B[j * n + i]);
      m[i * n + j] = beta * sym_b - 0.5 * (a[i] * c[j] + c[i] * a[j]);
    }
  }
  return smallest_eigenvalue_sym(m, n) - eps * beta;
}

namespace {

// Cell-centered state view: psi values plus a reconstructed gradient
// (average of the adjacent face-normal differences, homogeneous closure).
struct StateView {
  const GridSpec& g;
  const CellField* psi;
  std::vector<Vec3> grad_cell;

  StateView(const GridSpec& grid, const CellField* state) : g(grid), psi(state) {
    if (!psi) return;
    const FaceField Gf = gradient(*psi);
    const int nx = g.cells[0];
    grad_cell.assign(g.num_cells(), Vec3{0.0, 0.0, 0.0});
    for (std::size_t cidx = 0; cidx < grad_cell.size(); ++cidx) {
      const int ix = static_cast<int>(cidx % nx);
      const int iy = static_cast<int>(cidx / nx);
      const std::size_t fx = static_cast<std::size_t>(iy) * (nx + 1) + ix;
      grad_cell[cidx][0] = 0.5 * (Gf.comp[0][fx] + Gf.comp[0][fx + 1]);
      if (g.dimension == 2)
        grad_cell[cidx][1] = 0.5 * (Gf.comp[1][cidx] + Gf.comp[1][cidx + nx]);
    }
  }

  double psi_at(std::size_t cell) const { return psi ? psi->v[cell] : 0.0; }
  Vec3 grad_at(std::size_t cell) const { return psi ? grad_cell[cell] : Vec3{0.0, 0.0, 0.0}; }
};

// Adjacent cells of an axis face; boundary faces have a single neighbor.
struct FaceNeighbors {
  std::size_t left, right;
  bool has_left, has_right;
};

FaceNeighbors face_neighbors(const GridSpec& g, int axis, std::size_t f) {
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  if (axis == 0) {
    const int ix = static_cast<int>(f % (nx + 1));
    const int iy = static_cast<int>(f / (nx + 1));
    FaceNeighbors fn{};
    fn.has_left = ix > 0;
    fn.has_right = ix < nx;
    if (fn.has_left) fn.left = static_cast<std::size_t>(iy) * nx + (ix - 1);
    if (fn.has_right) fn.right = static_cast<std::size_t>(iy) * nx + ix;
    return fn;
  }
  const int ix = static_cast<int>(f % nx);
  const int iy = static_cast<int>(f / nx);
  FaceNeighbors fn{};
  fn.has_left = iy > 0;
  fn.has_right = iy < ny;
  if (fn.has_left) fn.left = static_cast<std::size_t>(iy - 1) * nx + ix;
  if (fn.has_right) fn.right = static_cast<std::size_t>(iy) * nx + ix;
  return fn;
}

struct PointSample {
  Vec3 x;
  double psi;
  Vec3 grad;
};

PointSample face_sample(const GridSpec& g, const StateView& sv, int axis, std::size_t f) {
  const auto xc = g.face_center(axis, f);
  PointSample p;
  p.x = {xc[0], xc[1], 0.0};
  const auto fn = face_neighbors(g, axis, f);
  if (fn.has_left && fn.has_right) {
    p.psi = 0.5 * (sv.psi_at(fn.left) + sv.psi_at(fn.right));
    const Vec3 gl = sv.grad_at(fn.left), gr = sv.grad_at(fn.right);
    p.grad = {0.5 * (gl[0] + gr[0]), 0.5 * (gl[1] + gr[1]), 0.0};
  } else {
    const std::size_t cidx = fn.has_left ? fn.left : fn.right;
    p.psi = sv.psi_at(cidx);
    p.grad = sv.grad_at(cidx);
  }
  return p;
}

PointSample cell_sample(const GridSpec& g, const StateView& sv, std::size_t cidx) {
  const auto xc = g.cell_center(cidx);
  return {{xc[0], xc[1], 0.0}, sv.psi_at(cidx), sv.grad_at(cidx)};
}

}  // namespace

FrozenCoefficients freeze(const CoefficientSet& coeffs, const GridSpec& grid,
                          const CellField* psi) {
  if (!psi && (coeffs.a.state_dependent || coeffs.c.state_dependent || coeffs.b.state_dependent)) {
    throw std::invalid_argument("freeze: state-dependent coefficients need a state");
  }
  StateView sv(grid, psi);
  FrozenCoefficients fc;
  fc.beta = coeffs.beta;
  fc.a_normal = FaceField::zeros(grid);
  fc.c_normal = FaceField::zeros(grid);
  fc.b_face = FaceField::zeros(grid);

  double eps = std::numeric_limits<double>::infinity();
  const int n = grid.dimension;
  for (int axis = 0; axis < n; ++axis) {
    const std::size_t nf = grid.num_faces(axis);
    for (std::size_t f = 0; f < nf; ++f) {
      const PointSample p = face_sample(grid, sv, axis, f);
      const Vec3 av = coeffs.a.eval(p.x, p.psi, p.grad);
      const Vec3 cv = coeffs.c.eval(p.x, p.psi, p.grad);
      const double bv = coeffs.b.eval(p.x, p.psi, p.grad);
      fc.a_normal.comp[axis][f] = av[axis];
      fc.c_normal.comp[axis][f] = cv[axis];
      fc.b_face.comp[axis][f] = bv;
      eps = std::min(eps, ellipticity_margin_iso(coeffs.beta, av, cv, bv, n));
    }
  }
  const std::size_t nc = grid.num_cells();
  fc.a_cell.resize(nc);
  fc.c_cell.resize(nc);
  fc.b_cell.resize(nc);
  for (std::size_t cidx = 0; cidx < nc; ++cidx) {
    const PointSample p = cell_sample(grid, sv, cidx);
    fc.a_cell[cidx] = coeffs.a.eval(p.x, p.psi, p.grad);
    fc.c_cell[cidx] = coeffs.c.eval(p.x, p.psi, p.grad);
    fc.b_cell[cidx] = coeffs.b.eval(p.x, p.psi, p.grad);
    eps = std::min(eps, ellipticity_margin_iso(coeffs.beta, fc.a_cell[cidx], fc.c_cell[cidx],
                                               fc.b_cell[cidx], n));
  }
  fc.epsilon = eps;
  return fc;
}

double field_ellipticity_margin(CoefficientSet& coeffs, const GridSpec& grid,
                                const CellField* psi) {
  const FrozenCoefficients fc = freeze(coeffs, grid, psi);
  coeffs.epsilon = fc.epsilon;
  return fc.epsilon;
}

double max_divergence(const VectorCoefficient& vf, const GridSpec& grid, const CellField* psi) {
  StateView sv(grid, psi);
  FaceField F = FaceField::zeros(grid);
  for (int axis = 0; axis < grid.dimension; ++axis) {
    const std::size_t nf = grid.num_faces(axis);
    for (std::size_t f = 0; f < nf; ++f) {
      const PointSample p = face_sample(grid, sv, axis, f);
      F.comp[axis][f] = vf.eval(p.x, p.psi, p.grad)[axis];
    }
  }
  return max_abs(divergence(F));
}

double max_boundary_normal(const VectorCoefficient& vf, const GridSpec& grid,
                           const CellField* psi) {
  StateView sv(grid, psi);
  double m = 0.0;
  for_each_boundary_face(grid, [&](const BoundaryFace& bf) {
    const PointSample p = face_sample(grid, sv, bf.axis, bf.face);
    m = std::max(m, std::abs(vf.eval(p.x, p.psi, p.grad)[bf.axis]));
  });
  return m;
}

// ---------------------------------------------------------------------------
// Extensions
// ---------------------------------------------------------------------------

Vec3 extend_divergence_free(const BallVectorSample& sample, const Vec3& x, double quad_tol) {
  const int n = sample.n;
  if (n != 2 && n != 3) throw std::invalid_argument("extension defined for n in {2,3}");
  const double rk = sample.radius;
  const double r = norm(x, n);
  if (r <= rk * (1.0 + 1e-14)) return sample.eval(x);

  Vec3 xi{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) xi[i] = x[i] / r;

  Vec3 inner_pt{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) inner_pt[i] = (rk * rk / r) * xi[i];
  const Vec3 a_in = sample.eval(inner_pt);

  Vec3 sphere_pt{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) sphere_pt[i] = rk * xi[i];
  const double R_init = 2.0 * dot(sample.eval(sphere_pt), xi, n);

  const auto integrand = [&](double s) {
    Vec3 p{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) p[i] = (rk * rk / s) * xi[i];
    return std::pow(s, n - 2) * dot(sample.eval(p), xi, n);
  };
  const QuadResult q = adaptive_simpson(integrand, rk, r, quad_tol, 40);
  if (!q.converged) throw QuadratureError(q.achieved_tol);

  const double rpow = std::pow(r, n - 1);
  const double R = std::pow(rk, n - 1) / rpow * R_init + 2.0 * (n - 1) / rpow * q.value;

  const double axi = dot(a_in, xi, n);
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) out[i] = a_in[i] - 2.0 * axi * xi[i] + R * xi[i];
  return out;
}

double extend_by_reflection(const BallScalarSample& sample, const Vec3& x) {
  const int n = sample.n;
  const double rk = sample.radius;
  const double r2 = dot(x, x, n);
  if (r2 <= rk * rk * (1.0 + 1e-14)) return sample.eval(x);
  Vec3 p{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) p[i] = rk * rk * x[i] / r2;
  return sample.eval(p);
}

double deviation_bound(const std::function<Vec3(const Vec3&)>& field, const Vec3& base, int n,
                       double query_radius, int points_per_axis) {
  const int npts = std::max(points_per_axis, 2);
  double sup = 0.0;
  const auto probe = [&](const Vec3& x) {
    const Vec3 v = field(x);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) d2 += (v[i] - base[i]) * (v[i] - base[i]);
    sup = std::max(sup, std::sqrt(d2));
  };
  for (int i = 0; i < npts; ++i) {
    const double xi = -query_radius + 2.0 * query_radius * i / (npts - 1);
    for (int j = 0; j < npts; ++j) {
      const double xj = -query_radius + 2.0 * query_radius * j / (npts - 1);
      if (n == 2) {
        probe({xi, xj, 0.0});
      } else {
        for (int k = 0; k < npts; ++k) {
          const double xk = -query_radius + 2.0 * query_radius * k / (npts - 1);
          probe({xi, xj, xk});
        }
      }
    }
  }
  return sup;
}

}  // namespace chg
