#include "chg/registry.hpp"

#include <cmath>
#include <random>

namespace chg {

SpecCall parse_spec(const std::string& spec) {
  SpecCall out;
  const auto open = spec.find('(');
  if (open == std::string::npos) {
    out.name = spec;
    return out;
  }
  if (spec.back() != ')') throw BuiltinError("malformed spec '" + spec + "'");
  out.name = spec.substr(0, open);
  std::string args = spec.substr(open + 1, spec.size() - open - 2);
  std::size_t pos = 0;
  while (pos < args.size()) {
    auto comma = args.find(',', pos);
    if (comma == std::string::npos) comma = args.size();
    const std::string item = args.substr(pos, comma - pos);
    try {
      out.args.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw BuiltinError("malformed numeric argument in '" + spec + "'");
    }
    pos = comma + 1;
  }
  return out;
}

namespace {
double arg_or(const SpecCall& s, std::size_t i, double fallback) {
  return i < s.args.size() ? s.args[i] : fallback;
}
}  // namespace

std::string registry_listing() {
  return "registry: vector fields {zero, constant, rotation, shear_sine, stream_sine, "
         "stream_sine_psi}; mobilities {constant, cosine_bump, b_psi_quadratic}; initial data "
         "{uniform, cosine, noise, linear, manufactured}; sources {zero, constant, manufactured}; "
         "boundary data {zero, constant, side}";
}

VectorCoefficient make_vector_coefficient(const std::string& spec, const GridSpec& grid) {
  const SpecCall s = parse_spec(spec);
  const double Lx = grid.extents[0];
  const double Ly = grid.dimension == 2 ? grid.extents[1] : 1.0;
  VectorCoefficient v;
  v.name = spec;
  if (s.name == "zero") {
    return VectorCoefficient::zero();
  }
  if (s.name == "constant") {
    v = VectorCoefficient::constant(arg_or(s, 0, 0.0), arg_or(s, 1, 0.0));
    v.name = spec;
    return v;
  }
  if (s.name == "rotation") {
    const double om = arg_or(s, 0, 1.0), x0 = arg_or(s, 1, 0.0), y0 = arg_or(s, 2, 0.0);
    v.eval = [=](const Vec3& x, double, const Vec3&) {
      return Vec3{-om * (x[1] - y0), om * (x[0] - x0), 0.0};
    };
    return v;
  }
  if (s.name == "shear_sine") {
    const double om = arg_or(s, 0, 0.1);
    v.eval = [=](const Vec3& x, double, const Vec3&) {
      return Vec3{om * std::sin(2 * M_PI * x[1] / Ly), om * std::sin(2 * M_PI * x[0] / Lx), 0.0};
    };
    return v;
  }
  if (s.name == "stream_sine") {
    const double om = arg_or(s, 0, 0.1);
    v.eval = [=](const Vec3& x, double, const Vec3&) {
      return Vec3{om * M_PI / Ly * std::sin(M_PI * x[0] / Lx) * std::cos(M_PI * x[1] / Ly),
                  -om * M_PI / Lx * std::cos(M_PI * x[0] / Lx) * std::sin(M_PI * x[1] / Ly), 0.0};
    };
    return v;
  }
  if (s.name == "stream_sine_psi") {
    const double om = arg_or(s, 0, 0.1);
    v.state_dependent = true;
    v.eval = [=](const Vec3& x, double psi, const Vec3&) {
      const double scale = om * (1.0 + psi * psi);
      return Vec3{scale * M_PI / Ly * std::sin(M_PI * x[0] / Lx) * std::cos(M_PI * x[1] / Ly),
                  -scale * M_PI / Lx * std::cos(M_PI * x[0] / Lx) * std::sin(M_PI * x[1] / Ly),
                  0.0};
    };
    return v;
  }
  throw BuiltinError("unknown vector field '" + spec + "'; " + registry_listing());
}

ScalarCoefficient make_scalar_coefficient(const std::string& spec, const GridSpec& grid) {
  const SpecCall s = parse_spec(spec);
  const double Lx = grid.extents[0];
  const double Ly = grid.dimension == 2 ? grid.extents[1] : 1.0;
  ScalarCoefficient b;
  b.name = spec;
  if (s.name == "constant") {
    b.eval = [v = arg_or(s, 0, 1.0)](const Vec3&, double, const Vec3&) { return v; };
    return b;
  }
  if (s.name == "cosine_bump") {
    const double b0 = arg_or(s, 0, 1.0), amp = arg_or(s, 1, 0.1);
    b.eval = [=, dim = grid.dimension](const Vec3& x, double, const Vec3&) {
      double v = b0 + amp * std::cos(M_PI * x[0] / Lx);
      if (dim == 2) v = b0 + amp * std::cos(M_PI * x[0] / Lx) * std::cos(M_PI * x[1] / Ly);
      return v;
    };
    return b;
  }
  if (s.name == "b_psi_quadratic") {
    const double b0 = arg_or(s, 0, 1.0), amp = arg_or(s, 1, 0.5);
    b.state_dependent = true;
    b.eval = [=](const Vec3&, double psi, const Vec3&) { return b0 + amp * psi * psi; };
    return b;
  }
  throw BuiltinError("unknown mobility '" + spec + "'; " + registry_listing());
}

InitialData make_initial(const std::string& spec, const GridSpec& grid, std::uint64_t seed) {
  const SpecCall s = parse_spec(spec);
  const double Lx = grid.extents[0];
  const double Ly = grid.dimension == 2 ? grid.extents[1] : 1.0;
  InitialData out;
  if (s.name == "uniform") {
    const double m = arg_or(s, 0, 0.0);
    out.psi0 = CellField::from_function(grid, [m](double, double) { return m; });
    return out;
  }
  if (s.name == "cosine") {
    const double amp = arg_or(s, 0, 0.1), mean = arg_or(s, 1, 0.0);
    out.psi0 = CellField::from_function(grid, [=, dim = grid.dimension](double x, double y) {
      double v = std::cos(M_PI * x / Lx);
      if (dim == 2) v *= std::cos(M_PI * y / Ly);
      return mean + amp * v;
    });
    return out;
  }
  if (s.name == "noise") {
    const double mean = arg_or(s, 0, 0.0), amp = arg_or(s, 1, 0.01);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    out.psi0 = CellField::zeros(grid);
    for (auto& v : out.psi0.v) v = mean + amp * u(rng);
    return out;
  }
  if (s.name == "linear") {
    const double slope = arg_or(s, 0, 1.0);
    out.psi0 = CellField::from_function(grid, [slope](double x, double) { return slope * x; });
    out.normal = [slope](const BoundaryFace& bf) {
      return bf.axis == 0 ? slope * (bf.side == 0 ? -1.0 : 1.0) : 0.0;
    };
    return out;
  }
  if (s.name == "manufactured") {
    out.psi0 = CellField::from_function(grid, [=](double x, double y) {
      return std::cos(M_PI * x / Lx) * (grid.dimension == 2 ? std::cos(M_PI * y / Ly) : 1.0);
    });
    return out;
  }
  throw BuiltinError("unknown initial data '" + spec + "'; " + registry_listing());
}

std::function<double(double, double, double)> make_source(const std::string& spec) {
  const SpecCall s = parse_spec(spec);
  if (s.name == "zero") return nullptr;
  if (s.name == "constant") {
    const double v = arg_or(s, 0, 0.0);
    return [v](double, double, double) { return v; };
  }
  throw BuiltinError("unknown source '" + spec + "'; " + registry_listing());
}

std::function<double(double, const BoundaryFace&)> make_boundary_source(const std::string& spec) {
  const SpecCall s = parse_spec(spec);
  if (s.name == "zero") return nullptr;
  if (s.name == "constant") {
    const double v = arg_or(s, 0, 0.0);
    return [v](double, const BoundaryFace&) { return v; };
  }
  if (s.name == "side") {
    const int axis = static_cast<int>(arg_or(s, 0, 0));
    const int side = static_cast<int>(arg_or(s, 1, 1));
    const double v = arg_or(s, 2, 0.0);
    return [=](double, const BoundaryFace& bf) {
      return (bf.axis == axis && bf.side == side) ? v : 0.0;
    };
  }
  throw BuiltinError("unknown boundary data '" + spec + "'; " + registry_listing());
}

bool known_vector_coefficient(const std::string& spec) {
  try {
    const SpecCall s = parse_spec(spec);
    for (const char* n :
         {"zero", "constant", "rotation", "shear_sine", "stream_sine", "stream_sine_psi"}) {
      if (s.name == n) return true;
    }
  } catch (const BuiltinError&) {
  }
  return false;
}
bool known_scalar_coefficient(const std::string& spec) {
  try {
    const SpecCall s = parse_spec(spec);
    for (const char* n : {"constant", "cosine_bump", "b_psi_quadratic"}) {
      if (s.name == n) return true;
    }
  } catch (const BuiltinError&) {
  }
  return false;
}
bool known_initial(const std::string& spec) {
  try {
    const SpecCall s = parse_spec(spec);
    for (const char* n : {"uniform", "cosine", "noise", "linear", "manufactured"}) {
      if (s.name == n) return true;
    }
  } catch (const BuiltinError&) {
  }
  return false;
}
bool known_source(const std::string& spec) {
  try {
    const SpecCall s = parse_spec(spec);
    return s.name == "zero" || s.name == "constant";
  } catch (const BuiltinError&) {
    return false;
  }
}
bool known_boundary_source(const std::string& spec) {
  try {
    const SpecCall s = parse_spec(spec);
    return s.name == "zero" || s.name == "constant" || s.name == "side";
  } catch (const BuiltinError&) {
    return false;
  }
}

GridSpec make_grid_from(const RunConfig& cfg) {
  return make_grid(cfg.dimension, cfg.extents, cfg.cells);
}

PotentialSpec make_potential(const RunConfig& cfg) {
  PotentialSpec p;
  if (cfg.potential_kind == "double_well") {
    p = PotentialSpec::double_well();
  } else if (cfg.potential_kind == "quartic") {
    p = PotentialSpec::quartic(cfg.potential_coeffs);
  } else {
    p = PotentialSpec::polynomial(cfg.potential_coeffs);
  }
  p.stabilization = cfg.stabilization;
  p.scan_radius = cfg.scan_radius;
  return p;
}

CoefficientSet make_coefficients(const RunConfig& cfg, const GridSpec& grid) {
  CoefficientSet cs;
  cs.beta = cfg.beta;
  cs.a = make_vector_coefficient(cfg.a_spec, grid);
  cs.c = make_vector_coefficient(cfg.c_spec, grid);
  cs.b = make_scalar_coefficient(cfg.b_spec, grid);
  return cs;
}

ManufacturedCase make_manufactured(const RunConfig& cfg, const GridSpec& grid,
                                   const PotentialSpec& pot) {
  if (grid.dimension != 2) throw BuiltinError("manufactured case needs a 2D grid");
  const SpecCall sa = parse_spec(cfg.a_spec);
  const SpecCall sc = parse_spec(cfg.c_spec);
  const SpecCall sb = parse_spec(cfg.b_spec);
  if ((sa.name != "stream_sine" && sa.name != "zero") ||
      (sc.name != "stream_sine" && sc.name != "zero") || sb.name != "constant") {
    throw BuiltinError(
        "manufactured case needs a, c in {zero, stream_sine} and a constant mobility");
  }
  const double oa = sa.name == "zero" ? 0.0 : arg_or(sa, 0, 0.1);
  const double oc = sc.name == "zero" ? 0.0 : arg_or(sc, 0, 0.1);
  const double b0 = arg_or(sb, 0, 1.0);
  const double beta = cfg.beta;
  const double Lx = grid.extents[0], Ly = grid.extents[1];
  const double kx = M_PI / Lx, ky = M_PI / Ly;
  const double k2 = kx * kx + ky * ky;

  auto C = [=](double x, double y) { return std::cos(kx * x) * std::cos(ky * y); };
  // (stream_sine(o) . grad C)(x, y); the stream field is o*pi-scaled
  auto adotgradC = [=](double o, double x, double y) {
    const double sx = std::sin(kx * x), cx = std::cos(kx * x);
    const double sy = std::sin(ky * y), cy = std::cos(ky * y);
    const double a1 = o * M_PI / Ly * sx * cy;
    const double a2 = -o * M_PI / Lx * cx * sy;
    return a1 * (-kx * sx * cy) + a2 * (-ky * cx * sy);
  };

  ManufacturedCase mc;
  mc.exact_psi = [=](double t, double x, double y) { return std::exp(-t) * C(x, y); };
  mc.exact_mu = [=](double x, double y) { return C(x, y); };
  mc.psi0 = CellField::from_function(grid, C);
  mc.data.f = [=](double t, double x, double y) {
    // dpsi/dt - a.grad(dpsi/dt) - b lap mu
    return -std::exp(-t) * C(x, y) + std::exp(-t) * adotgradC(oa, x, y) + b0 * k2 * C(x, y);
  };
  mc.data.g = [=](double t, double x, double y) {
    // mu - c.grad mu - beta dpsi/dt + lap psi - Phi'(psi)
    const double psi = std::exp(-t) * C(x, y);
    return C(x, y) - adotgradC(oc, x, y) + beta * std::exp(-t) * C(x, y) -
           k2 * std::exp(-t) * C(x, y) - eval(pot, psi).dphi;
  };
  return mc;
}

}  // namespace chg
