#include "chg/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "chg/kernels.hpp"

namespace chg {

GridSpec make_grid(int dimension, std::span<const double> extents, std::span<const int> cells,
                   BcKind bc_kind) {
  if (dimension != 1 && dimension != 2) {
    throw std::invalid_argument("make_grid: dimension must be 1 or 2");
  }
  if (static_cast<int>(extents.size()) < dimension || static_cast<int>(cells.size()) < dimension) {
    throw std::invalid_argument("make_grid: extents/cells shorter than dimension");
  }
  GridSpec g;
  g.dimension = dimension;
  g.bc_kind = bc_kind;
  g.extents = {1.0, 1.0};
  g.cells = {1, 1};
  g.spacing = {1.0, 1.0};
  for (int d = 0; d < dimension; ++d) {
    if (!(extents[d] > 0.0)) {
      throw std::invalid_argument("make_grid: extents must be positive (axis " + std::to_string(d) + ")");
    }
    if (cells[d] < 4) {
      throw std::invalid_argument("make_grid: need at least 4 cells per axis (axis " +
                                  std::to_string(d) + ")");
    }
    g.cells[d] = cells[d];
    g.spacing[d] = extents[d] / cells[d];
    // Store the product so spacing*cells == extents holds exactly as stored.
    g.extents[d] = g.spacing[d] * cells[d];
  }
  return g;
}

void for_each_boundary_face(const GridSpec& g, const std::function<void(const BoundaryFace&)>& fn) {
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  // Axis 0: left/right columns.
  for (int iy = 0; iy < ny; ++iy) {
    for (int side = 0; side < 2; ++side) {
      const std::size_t f = static_cast<std::size_t>(iy) * (nx + 1) + (side == 0 ? 0 : nx);
      fn(BoundaryFace{0, side, f, g.face_center(0, f), g.face_area(0)});
    }
  }
  if (g.dimension == 2) {
    for (int ix = 0; ix < nx; ++ix) {
      for (int side = 0; side < 2; ++side) {
        const std::size_t f = static_cast<std::size_t>(side == 0 ? 0 : ny) * nx + ix;
        fn(BoundaryFace{1, side, f, g.face_center(1, f), g.face_area(1)});
      }
    }
  }
}

FaceField gradient(const CellField& u) {
  return gradient(u, nullptr);
}

FaceField gradient(const CellField& u, const std::function<double(const BoundaryFace&)>& boundary) {
  const GridSpec& g = u.grid;
  FaceField F = FaceField::zeros(g);
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  const double inv_hx = 1.0 / g.spacing[0];
  kernels::parallel_rows(ny, nx, [&](std::size_t iy) {
    const double* uc = u.v.data() + iy * nx;
    double* fx = F.comp[0].data() + iy * (nx + 1);
    for (int ix = 1; ix < nx; ++ix) fx[ix] = (uc[ix] - uc[ix - 1]) * inv_hx;
  });
  if (g.dimension == 2) {
    const double inv_hy = 1.0 / g.spacing[1];
    kernels::parallel_rows(ny - 1, nx, [&](std::size_t row) {
      const std::size_t iy = row + 1;
      const double* uc = u.v.data() + iy * nx;
      double* fy = F.comp[1].data() + iy * nx;
      for (int ix = 0; ix < nx; ++ix) fy[ix] = (uc[ix] - uc[ix - nx]) * inv_hy;
    });
  }
  if (boundary) {
    for_each_boundary_face(g, [&](const BoundaryFace& bf) { F.comp[bf.axis][bf.face] = boundary(bf); });
  }
  return F;
}

CellField divergence(const FaceField& F) {
  const GridSpec& g = F.grid;
  CellField d = CellField::zeros(g);
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  const double inv_hx = 1.0 / g.spacing[0];
  if (g.dimension == 1) {
    kernels::parallel_for(d.v.size(), [&](std::size_t c) {
      d.v[c] = (F.comp[0][c + 1] - F.comp[0][c]) * inv_hx;
    });
    return d;
  }
  const double inv_hy = 1.0 / g.spacing[1];
  kernels::parallel_rows(ny, nx, [&](std::size_t iy) {
    const double* fx = F.comp[0].data() + iy * (nx + 1);
    const double* fy = F.comp[1].data() + iy * nx;
    double* dc = d.v.data() + iy * nx;
    for (int ix = 0; ix < nx; ++ix) {
      dc[ix] = (fx[ix + 1] - fx[ix]) * inv_hx + (fy[ix + nx] - fy[ix]) * inv_hy;
    }
  });
  return d;
}

CellField laplacian(const CellField& u) { return divergence(gradient(u)); }

CellField laplacian(const CellField& u, const std::function<double(const BoundaryFace&)>& boundary) {
  return divergence(gradient(u, boundary));
}

double integrate(const CellField& u) {
  return kernels::sum(u.v) * u.grid.cell_volume();
}

double inner(const CellField& u, const CellField& w) {
  if (!u.grid.same_mesh(w.grid)) throw std::logic_error("inner: mesh mismatch");
  return kernels::dot(u.v, w.v) * u.grid.cell_volume();
}

double inner(const FaceField& F, const FaceField& G) {
  if (!F.grid.same_mesh(G.grid)) throw std::logic_error("inner: mesh mismatch");
  double s = kernels::dot(F.comp[0], G.comp[0]);
  if (F.grid.dimension == 2) s += kernels::dot(F.comp[1], G.comp[1]);
  return s * F.grid.cell_volume();
}

double l2_norm(const CellField& u) { return std::sqrt(inner(u, u)); }
double l2_norm(const FaceField& F) { return std::sqrt(inner(F, F)); }
double max_abs(const CellField& u) { return kernels::max_abs(u.v); }

double boundary_flux_sum(const FaceField& F) {
  double s = 0.0;
  for_each_boundary_face(F.grid, [&](const BoundaryFace& bf) {
    const double sign = bf.side == 0 ? -1.0 : 1.0;  // outward normal
    s += sign * F.comp[bf.axis][bf.face] * bf.area;
  });
  return s;
}

double neumann_lambda1(const GridSpec& g) {
  double lmax = g.extents[0];
  if (g.dimension == 2) lmax = std::max(lmax, g.extents[1]);
  const double k = M_PI / lmax;
  return k * k;
}

namespace serial {

FaceField gradient(const CellField& u) {
  const GridSpec& g = u.grid;
  FaceField F = FaceField::zeros(g);
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 1; ix < nx; ++ix) {
      const std::size_t c = static_cast<std::size_t>(iy) * nx + ix;
      F.comp[0][static_cast<std::size_t>(iy) * (nx + 1) + ix] = (u.v[c] - u.v[c - 1]) / g.spacing[0];
    }
  }
  if (g.dimension == 2) {
    for (int iy = 1; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t c = static_cast<std::size_t>(iy) * nx + ix;
        F.comp[1][static_cast<std::size_t>(iy) * nx + ix] = (u.v[c] - u.v[c - nx]) / g.spacing[1];
      }
    }
  }
  return F;
}

CellField divergence(const FaceField& F) {
  const GridSpec& g = F.grid;
  CellField d = CellField::zeros(g);
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t c = static_cast<std::size_t>(iy) * nx + ix;
      double s = (F.comp[0][static_cast<std::size_t>(iy) * (nx + 1) + ix + 1] -
                  F.comp[0][static_cast<std::size_t>(iy) * (nx + 1) + ix]) /
                 g.spacing[0];
      if (g.dimension == 2) {
        s += (F.comp[1][static_cast<std::size_t>(iy + 1) * nx + ix] -
              F.comp[1][static_cast<std::size_t>(iy) * nx + ix]) /
             g.spacing[1];
      }
      d.v[c] = s;
    }
  }
  return d;
}

double integrate(const CellField& u) {
  return kernels::serial::sum(u.v) * u.grid.cell_volume();
}

double inner(const CellField& u, const CellField& w) {
  return kernels::serial::dot(u.v, w.v) * u.grid.cell_volume();
}

double inner(const FaceField& F, const FaceField& G) {
  double s = kernels::serial::dot(F.comp[0], G.comp[0]);
  if (F.grid.dimension == 2) s += kernels::serial::dot(F.comp[1], G.comp[1]);
  return s * F.grid.cell_volume();
}

}  // namespace serial

}  // namespace chg
