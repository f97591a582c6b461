#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "chg/grid.hpp"
#include "doctest.h"

using namespace chg;

namespace {
GridSpec grid1d(int n, double L = 1.0) {
  const double ext[] = {L};
  const int cells[] = {n};
  return make_grid(1, ext, cells);
}
GridSpec grid2d(int nx, int ny, double Lx = 1.0, double Ly = 1.0) {
  const double ext[] = {Lx, Ly};
  const int cells[] = {nx, ny};
  return make_grid(2, ext, cells);
}

CellField random_field(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CellField f = CellField::zeros(g);
  for (auto& v : f.v) v = u(rng);
  return f;
}

FaceField random_interior_faces(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FaceField F = FaceField::zeros(g);
  for (int axis = 0; axis < g.dimension; ++axis) {
    for (std::size_t f = 0; f < F.comp[axis].size(); ++f) {
      if (!g.is_boundary_face(axis, f)) F.comp[axis][f] = u(rng);
    }
  }
  return F;
}
}  // namespace

TEST_CASE("make_grid computes spacing and validates input") {
  const GridSpec g = grid1d(8);
  CHECK(g.spacing[0] == 0.125);
  CHECK(g.spacing[0] * g.cells[0] == g.extents[0]);  // exact as stored

  const GridSpec g2 = grid2d(8, 16, 1.0, 2.0);
  CHECK(g2.spacing[0] == 0.125);
  CHECK(g2.spacing[1] == 0.125);
  CHECK(g2.num_cells() == 128);

  const double ext[] = {1.0};
  const int bad_cells[] = {2};
  CHECK_THROWS_AS((void)make_grid(1, ext, bad_cells), std::invalid_argument);
  const double bad_ext[] = {-1.0};
  const int cells[] = {8};
  CHECK_THROWS_AS((void)make_grid(1, bad_ext, cells), std::invalid_argument);
  CHECK_THROWS_AS((void)make_grid(3, ext, cells), std::invalid_argument);
}

TEST_CASE("gradient of constant and linear fields") {
  const GridSpec g = grid1d(16);
  const CellField c = CellField::from_function(g, [](double, double) { return 3.7; });
  const FaceField Gc = gradient(c);
  for (double v : Gc.comp[0]) CHECK(v == 0.0);

  const CellField lin = CellField::from_function(g, [](double x, double) { return x; });
  const FaceField Gl = gradient(lin);
  for (std::size_t f = 0; f < Gl.comp[0].size(); ++f) {
    if (g.is_boundary_face(0, f)) {
      CHECK(Gl.comp[0][f] == 0.0);
    } else {
      CHECK(Gl.comp[0][f] == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("gradient converges at second order on cos(pi x)") {
  // max-norm error of interior faces against -pi sin(pi x) drops ~4x per refinement
  double prev_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int n = 32 << k;
    const GridSpec g = grid1d(n);
    const CellField u =
        CellField::from_function(g, [](double x, double) { return std::cos(M_PI * x); });
    const FaceField G = gradient(u);
    double err = 0.0;
    for (std::size_t f = 0; f < G.comp[0].size(); ++f) {
      if (g.is_boundary_face(0, f)) continue;
      const double x = g.face_center(0, f)[0];
      err = std::max(err, std::abs(G.comp[0][f] + M_PI * std::sin(M_PI * x)));
    }
    if (k > 0) {
      const double rate = prev_err / err;
      CHECK(rate > 3.4);
      CHECK(rate < 4.6);
    }
    prev_err = err;
  }
}

TEST_CASE("divergence theorem is exact") {
  std::mt19937_64 rng(7);
  const GridSpec g = grid2d(12, 9);
  FaceField F = random_interior_faces(g, rng);
  // interior-only faces: total divergence integrates to zero
  CHECK(std::abs(integrate(divergence(F))) < 1e-13);
  // now add boundary fluxes and compare against the signed boundary sum
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for_each_boundary_face(g, [&](const BoundaryFace& bf) { F.comp[bf.axis][bf.face] = u(rng); });
  CHECK(integrate(divergence(F)) == doctest::Approx(boundary_flux_sum(F)).epsilon(1e-12));
}

TEST_CASE("gradient/divergence adjointness on random fields") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const GridSpec g = trial % 2 == 0 ? grid1d(64) : grid2d(16, 12, 1.0, 1.5);
    const CellField u = random_field(g, rng);
    const FaceField F = random_interior_faces(g, rng);
    const double lhs = inner(gradient(u), F);
    const double rhs = -inner(u, divergence(F));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("laplacian is the composition and converges at second order") {
  const GridSpec g = grid1d(16);
  const CellField c = CellField::from_function(g, [](double, double) { return 2.0; });
  for (double v : laplacian(c).v) CHECK(v == 0.0);

  // linear field with clamped zero boundary flux: boundary cells see the clamp
  const CellField lin = CellField::from_function(g, [](double x, double) { return x; });
  const CellField L = laplacian(lin);
  CHECK(L.v[0] != 0.0);
  CHECK(L.v[g.num_cells() - 1] != 0.0);
  for (std::size_t i = 1; i + 1 < g.num_cells(); ++i) CHECK(L.v[i] == doctest::Approx(0.0));

  double prev_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int n = 32 << k;
    const GridSpec gk = grid1d(n);
    const CellField u =
        CellField::from_function(gk, [](double x, double) { return std::cos(M_PI * x); });
    const CellField lap = laplacian(u);
    double err = 0.0;
    for (std::size_t i = 0; i < gk.num_cells(); ++i) {
      const double x = gk.cell_center(i)[0];
      err = std::max(err, std::abs(lap.v[i] + M_PI * M_PI * std::cos(M_PI * x)));
    }
    if (k > 0) {
      const double order = std::log2(prev_err / err);
      CHECK(order > 1.8);
      CHECK(order < 2.2);
    }
    prev_err = err;
  }
}

TEST_CASE("integrate and inner basics") {
  const GridSpec g = grid1d(256);
  const CellField ones = CellField::from_function(g, [](double, double) { return 1.0; });
  CHECK(integrate(ones) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(integrate(CellField::zeros(g)) == 0.0);
  const CellField xs = CellField::from_function(g, [](double x, double) { return x; });
  CHECK(integrate(xs) == doctest::Approx(0.5).epsilon(1e-14));  // midpoint symmetry

  const GridSpec sq = grid2d(8, 8);
  const CellField ones2 = CellField::from_function(sq, [](double, double) { return 1.0; });
  CHECK(inner(ones2, ones2) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  const CellField r = random_field(sq, rng);
  CHECK(inner(r, r) >= 0.0);
}

TEST_CASE("neumann_lambda1 on rectangles") {
  CHECK(neumann_lambda1(grid1d(8, 1.0)) == doctest::Approx(M_PI * M_PI));
  CHECK(neumann_lambda1(grid1d(8, 2.0)) == doctest::Approx(M_PI * M_PI / 4.0));
  CHECK(neumann_lambda1(grid2d(8, 8, 1.0, 1.0)) == doctest::Approx(M_PI * M_PI));
}

TEST_CASE("parallel kernels match the serial reference") {
  std::mt19937_64 rng(11);
  const GridSpec g = grid2d(37, 29, 1.0, 0.7);
  const CellField u = random_field(g, rng);
  const CellField w = random_field(g, rng);
  const FaceField F = random_interior_faces(g, rng);
  const FaceField G = random_interior_faces(g, rng);

  const FaceField Gp = gradient(u);
  const FaceField Gs = serial::gradient(u);
  for (int axis = 0; axis < 2; ++axis) {
    for (std::size_t f = 0; f < Gp.comp[axis].size(); ++f) {
      CHECK(Gp.comp[axis][f] == doctest::Approx(Gs.comp[axis][f]).epsilon(1e-14));
    }
  }
  const CellField Dp = divergence(F);
  const CellField Ds = serial::divergence(F);
  for (std::size_t i = 0; i < Dp.v.size(); ++i)
    CHECK(Dp.v[i] == doctest::Approx(Ds.v[i]).epsilon(1e-13));

  CHECK(integrate(u) == doctest::Approx(serial::integrate(u)).epsilon(1e-13));
  CHECK(inner(u, w) == doctest::Approx(serial::inner(u, w)).epsilon(1e-13));
  CHECK(inner(F, G) == doctest::Approx(serial::inner(F, G)).epsilon(1e-13));
}
