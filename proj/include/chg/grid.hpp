#pragma once
// Uniform cell-centered finite-volume mesh on a rectangle (1D or 2D) with
// face-staggered fluxes and Neumann closure.
//
// The discrete gradient/divergence pair satisfies an exact summation-by-parts
// identity: for any cell field u and any face field F that vanishes on
// boundary faces,
//
//     inner(gradient(u), F) + inner(u, divergence(F)) = 0
//
// up to roundoff. Every conservation statement downstream (mass ledger,
// energy pairing, mean identities) reduces to this identity plus telescoping
// of boundary fluxes, so it holds to machine precision by construction.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chg {

enum class BcKind { neumann_homogeneous, neumann_data };

struct GridSpec {
  int dimension = 1;
  std::array<double, 2> extents{1.0, 1.0};   // physical side lengths
  std::array<int, 2> cells{4, 1};            // cells per axis (1 on unused axis)
  std::array<double, 2> spacing{0.25, 1.0};  // h per axis; spacing*cells == extents
  BcKind bc_kind = BcKind::neumann_homogeneous;

  std::size_t num_cells() const {
    return static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(dimension == 2 ? cells[1] : 1);
  }
  double cell_volume() const { return dimension == 2 ? spacing[0] * spacing[1] : spacing[0]; }

  // Face counts. Axis 0 faces: (nx+1) per row, ny rows. Axis 1: nx per row, ny+1 rows.
  std::size_t num_faces(int axis) const {
    const int nx = cells[0];
    const int ny = dimension == 2 ? cells[1] : 1;
    if (axis == 0) return static_cast<std::size_t>(nx + 1) * ny;
    return static_cast<std::size_t>(nx) * (ny + 1);
  }
  // Measure of one face (counting measure in 1D).
  double face_area(int axis) const {
    if (dimension == 1) return 1.0;
    return axis == 0 ? spacing[1] : spacing[0];
  }

  std::size_t cell_index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * cells[0] + ix;
  }
  std::array<double, 2> cell_center(std::size_t idx) const {
    const int nx = cells[0];
    const int ix = static_cast<int>(idx % nx);
    const int iy = static_cast<int>(idx / nx);
    return {(ix + 0.5) * spacing[0], dimension == 2 ? (iy + 0.5) * spacing[1] : 0.0};
  }
  std::array<double, 2> face_center(int axis, std::size_t f) const {
    const int nx = cells[0];
    if (axis == 0) {
      const int ix = static_cast<int>(f % (nx + 1));
      const int iy = static_cast<int>(f / (nx + 1));
      return {ix * spacing[0], dimension == 2 ? (iy + 0.5) * spacing[1] : 0.0};
    }
    const int ix = static_cast<int>(f % nx);
    const int iy = static_cast<int>(f / nx);
    return {(ix + 0.5) * spacing[0], iy * spacing[1]};
  }
  bool is_boundary_face(int axis, std::size_t f) const {
    const int nx = cells[0];
    const int ny = dimension == 2 ? cells[1] : 1;
    if (axis == 0) {
      const int ix = static_cast<int>(f % (nx + 1));
      return ix == 0 || ix == nx;
    }
    const int iy = static_cast<int>(f / nx);
    return iy == 0 || iy == ny;
  }
  bool same_mesh(const GridSpec& o) const {
    return dimension == o.dimension && cells == o.cells && extents == o.extents;
  }
};

// dimension in {1,2}, extents > 0, cells >= 4 per used axis.
GridSpec make_grid(int dimension, std::span<const double> extents, std::span<const int> cells,
                   BcKind bc_kind = BcKind::neumann_homogeneous);

struct CellField {
  GridSpec grid;
  std::vector<double> v;

  static CellField zeros(const GridSpec& g) { return CellField{g, std::vector<double>(g.num_cells(), 0.0)}; }
  template <class F>
  static CellField from_function(const GridSpec& g, F&& f) {
    CellField u = zeros(g);
    for (std::size_t i = 0; i < u.v.size(); ++i) {
      const auto x = g.cell_center(i);
      u.v[i] = f(x[0], x[1]);
    }
    return u;
  }
};

struct FaceField {
  GridSpec grid;
  std::array<std::vector<double>, 2> comp;  // per-axis face-normal components

  static FaceField zeros(const GridSpec& g) {
    FaceField F;
    F.grid = g;
    F.comp[0].assign(g.num_faces(0), 0.0);
    if (g.dimension == 2) F.comp[1].assign(g.num_faces(1), 0.0);
    return F;
  }
};

// One boundary face: axis, side (0 = low, 1 = high), flat face index, center, measure.
struct BoundaryFace {
  int axis;
  int side;
  std::size_t face;
  std::array<double, 2> center;
  double area;
};
void for_each_boundary_face(const GridSpec& g, const std::function<void(const BoundaryFace&)>& fn);

// Interior faces carry (u_right - u_left)/h; boundary faces carry the Neumann
// datum (zero by default). `boundary` receives (axis, side, face) and returns
// the face-normal component (already signed along +axis).
FaceField gradient(const CellField& u);
FaceField gradient(const CellField& u,
                   const std::function<double(const BoundaryFace&)>& boundary);

CellField divergence(const FaceField& F);

// divergence(gradient(u)) by composition, not a separate stencil.
CellField laplacian(const CellField& u);
CellField laplacian(const CellField& u,
                    const std::function<double(const BoundaryFace&)>& boundary);

double integrate(const CellField& u);
double inner(const CellField& u, const CellField& w);
double inner(const FaceField& F, const FaceField& G);
double l2_norm(const CellField& u);
double l2_norm(const FaceField& F);
double max_abs(const CellField& u);

// Signed outward boundary flux sum (the right side of the discrete divergence
// theorem): sum over boundary faces of +-F * face area.
double boundary_flux_sum(const FaceField& F);

// First nontrivial Neumann eigenvalue of -Laplace on the rectangle: (pi/L_max)^2.
double neumann_lambda1(const GridSpec& g);

// Plain-loop reference implementations of the hot operators, kept for tests
// and the benchmark tool.
namespace serial {
FaceField gradient(const CellField& u);
CellField divergence(const FaceField& F);
double integrate(const CellField& u);
double inner(const CellField& u, const CellField& w);
double inner(const FaceField& F, const FaceField& G);
}  // namespace serial

}  // namespace chg
