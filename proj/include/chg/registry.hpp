#pragma once
// Built-in registries for configuration specs: coefficient field families,
// initial data (with their declared boundary traces), volumetric sources,
// and boundary data. Specs are spelled `name` or `name(arg, ...)`; no code
// loading. Unknown names raise BuiltinError listing the registry.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chg/coefficients.hpp"
#include "chg/config.hpp"
#include "chg/grid.hpp"
#include "chg/solver.hpp"

namespace chg {

struct BuiltinError : std::runtime_error {
  explicit BuiltinError(const std::string& what) : std::runtime_error(what) {}
};

struct SpecCall {
  std::string name;
  std::vector<double> args;
};
SpecCall parse_spec(const std::string& spec);

// Vector coefficient families. Several need the domain extents, hence the grid.
//   zero | constant(ax[,ay]) | rotation(omega[,x0,y0]) | shear_sine(omega)
//   | stream_sine(omega) | stream_sine_psi(omega)
// stream_sine is divergence-free and tangential on the rectangle (the
// admissible family); stream_sine_psi scales it by (1 + psi^2) and is meant
// for quasilinear runs frozen at uniform states.
VectorCoefficient make_vector_coefficient(const std::string& spec, const GridSpec& grid);

//   constant(b0) | cosine_bump(b0, amp) | b_psi_quadratic(b0, amp)
ScalarCoefficient make_scalar_coefficient(const std::string& spec, const GridSpec& grid);

// Initial data plus the declared normal trace on the boundary (used by the
// compatibility check against h2 at t = 0).
struct InitialData {
  CellField psi0;
  std::function<double(const BoundaryFace&)> normal;  // null = zero trace
};
//   uniform(m) | cosine(amp[,mean]) | noise(mean, amp) | linear(slope) | manufactured
// noise uses mt19937_64 seeded with `seed` and uniform(-1,1) cell values.
InitialData make_initial(const std::string& spec, const GridSpec& grid, std::uint64_t seed);

//   zero | constant(v)   (plus `manufactured`, resolved by make_manufactured)
std::function<double(double, double, double)> make_source(const std::string& spec);

//   zero | constant(v) | side(axis, side, v)
std::function<double(double, const BoundaryFace&)> make_boundary_source(const std::string& spec);

// validation-only lookups used by the config parser
bool known_vector_coefficient(const std::string& spec);
bool known_scalar_coefficient(const std::string& spec);
bool known_initial(const std::string& spec);
bool known_source(const std::string& spec);
bool known_boundary_source(const std::string& spec);
std::string registry_listing();

// The documented manufactured-solution case on the unit square:
//   psi*(t,x,y) = exp(-t) cos(pi x) cos(pi y),  mu*(x,y) = cos(pi x) cos(pi y),
// with stream_sine advection a, c and constant mobility; f and g come from
// substituting into the equations, h1 = h2 = 0 by construction.
struct ManufacturedCase {
  SourceData data;
  CellField psi0;
  std::function<double(double, double, double)> exact_psi;  // (t, x, y)
  std::function<double(double, double)> exact_mu;           // (x, y)
};
// Requires dimension 2, a/c in {zero, stream_sine}, constant b.
ManufacturedCase make_manufactured(const RunConfig& cfg, const GridSpec& grid,
                                   const PotentialSpec& pot);

PotentialSpec make_potential(const RunConfig& cfg);
CoefficientSet make_coefficients(const RunConfig& cfg, const GridSpec& grid);
GridSpec make_grid_from(const RunConfig& cfg);

}  // namespace chg
