#include "chg/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chg/coefficients.hpp"
#include "chg/kernels.hpp"

namespace chg {

double SymbolParams::ellipticity() const { return ellipticity_margin(beta, a, c, B.data(), n); }

Complex determinant_symbol(const SymbolParams& p, Complex lambda, const Vec3& xi) {
  const double axi = dot(p.a, xi, p.n);
  const double cxi = dot(p.c, xi, p.n);
  const double bq = p.b_quad(xi);
  const double xi2 = dot(xi, xi, p.n);
  const Complex i(0.0, 1.0);
  return lambda * (1.0 - i * axi) * (1.0 - i * cxi) + bq * (p.beta * lambda + xi2);
}

SymbolSplit symbol_split(const SymbolParams& p, Complex lambda, const Vec3& xi) {
  const double axi = dot(p.a, xi, p.n);
  const double cxi = dot(p.c, xi, p.n);
  const double bq = p.b_quad(xi);
  const double xi2 = dot(xi, xi, p.n);
  SymbolSplit s;
  s.z1 = Complex(1.0 - axi * cxi + p.beta * bq, -(axi + cxi));
  s.z2 = bq * xi2 / lambda;  // expanding det M: the |xi|^2 flux term carries no beta
  return s;
}

double angle_sum_constant(double phi1, double phi2) {
  const double arg = 1.0 + std::cos(phi1 - phi2);
  return (1.0 / std::sqrt(2.0)) * std::min(1.0, std::sqrt(std::max(arg, 0.0)));
}

SectorGrid SectorGrid::make(int n_dim, double phi, int n_rays, int n_lambda_moduli, int n_xi_dirs,
                            int n_xi_moduli) {
  SectorGrid g;
  g.phi = phi;
  const double lo = 1e-3, hi = 1e3;
  auto log_space = [&](int k, int count) {
    return lo * std::pow(hi / lo, count > 1 ? static_cast<double>(k) / (count - 1) : 0.5);
  };
  for (int r = 0; r < n_rays; ++r) {
    const double arg = n_rays > 1 ? -phi + 2.0 * phi * r / (n_rays - 1) : 0.0;
    for (int k = 0; k < n_lambda_moduli; ++k) {
      const double rho = log_space(k, n_lambda_moduli);
      g.lambdas.push_back(std::polar(rho, arg));
    }
  }
  std::vector<Vec3> dirs;
  if (n_dim == 1) {
    dirs.push_back({1.0, 0.0, 0.0});
    dirs.push_back({-1.0, 0.0, 0.0});
  } else if (n_dim == 2) {
    for (int d = 0; d < n_xi_dirs; ++d) {
      const double th = 2.0 * M_PI * d / n_xi_dirs;
      dirs.push_back({std::cos(th), std::sin(th), 0.0});
    }
  } else {
    // Fibonacci sphere
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int d = 0; d < n_xi_dirs; ++d) {
      const double z = 1.0 - 2.0 * (d + 0.5) / n_xi_dirs;
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.push_back({rr * std::cos(ga * d), rr * std::sin(ga * d), z});
    }
  }
  for (const auto& d : dirs) {
    for (int k = 0; k < n_xi_moduli; ++k) {
      const double rho = log_space(k, n_xi_moduli);
      g.xis.push_back({rho * d[0], rho * d[1], rho * d[2]});
    }
  }
  return g;
}

AngleScan max_symbol_angle(const SymbolParams& p, const std::vector<Vec3>& xis) {
  AngleScan out;
  for (const auto& xi : xis) {
    // z1 does not depend on lambda; any lambda works here.
    const auto s = symbol_split(p, Complex(1.0, 0.0), xi);
    const double ang = std::abs(std::arg(s.z1));
    if (ang > out.sigma) {
      out.sigma = ang;
      out.argmax_xi = xi;
    }
  }
  out.pass = out.sigma < 0.5 * M_PI;
  return out;
}

ParabolicityScan parabolicity_scan(const SymbolParams& p, const SectorGrid& grid) {
  const std::size_t nl = grid.lambdas.size();
  const std::size_t nx = grid.xis.size();
  std::vector<double> ratio(nl * nx), absm(nl * nx);
  kernels::parallel_for(nl * nx, [&](std::size_t k) {
    const Complex lam = grid.lambdas[k / nx];
    const Vec3& xi = grid.xis[k % nx];
    const double xi2 = dot(xi, xi, p.n);
    const double majorant = std::abs(lam) * (1.0 + xi2) + xi2 * xi2;
    const double m = std::abs(determinant_symbol(p, lam, xi));
    ratio[k] = m / majorant;
    absm[k] = m;
  });
  ParabolicityScan out;
  out.c_min = std::numeric_limits<double>::infinity();
  out.min_abs_m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ratio.size(); ++k) {
    if (ratio[k] < out.c_min) {
      out.c_min = ratio[k];
      out.argmin_lambda = grid.lambdas[k / nx];
      out.argmin_xi = grid.xis[k % nx];
    }
    out.c_hi = std::max(out.c_hi, ratio[k]);
    out.min_abs_m = std::min(out.min_abs_m, absm[k]);
  }
  return out;
}

Complex multiplier_symbol(const SymbolParams& p, Complex lambda, const Vec3& xi) {
  const double xi2 = dot(xi, xi, p.n);
  return (lambda * (1.0 + xi2) + xi2 * xi2) / determinant_symbol(p, lambda, xi);
}

namespace {

// |d^alpha S-hat| by centered differences with per-direction step h.
double deriv_abs(const SymbolParams& p, Complex lam, const Vec3& xi, const std::array<int, 2>& al,
                 double h) {
  auto S = [&](double dx, double dy) {
    Vec3 q = xi;
    q[0] += dx;
    if (p.n > 1) q[1] += dy;
    return multiplier_symbol(p, lam, q);
  };
  const int order = al[0] + al[1];
  if (order == 0) return std::abs(S(0, 0));
  if (order == 1) {
    const bool x = al[0] == 1;
    return std::abs(S(x ? h : 0, x ? 0 : h) - S(x ? -h : 0, x ? 0 : -h)) / (2.0 * h);
  }
  if (al[0] == 2 || al[1] == 2) {
    const bool x = al[0] == 2;
    return std::abs(S(x ? h : 0, x ? 0 : h) - 2.0 * S(0, 0) + S(x ? -h : 0, x ? 0 : -h)) / (h * h);
  }
  // mixed (1,1)
  return std::abs(S(h, h) - S(h, -h) - S(-h, h) + S(-h, -h)) / (4.0 * h * h);
}

std::vector<std::array<int, 2>> multi_indices(int n_dim) {
  if (n_dim == 1) return {{0, 0}, {1, 0}, {2, 0}};
  return {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
}

}  // namespace

MikhlinScan mikhlin_scan(const SymbolParams& p, const SectorGrid& grid, double step_scale) {
  if (p.n > 2) throw std::invalid_argument("mikhlin_scan supports n <= 2");
  MikhlinScan out;
  const auto alphas = multi_indices(p.n);
  const std::size_t nl = grid.lambdas.size();
  const std::size_t nx = grid.xis.size();
  for (const auto& al : alphas) {
    MikhlinEntry e;
    e.alpha = al;
    e.sup_per_lambda.assign(nl, 0.0);
    const int order = al[0] + al[1];
    for (int pass = 0; pass < 2; ++pass) {
      const double scale = pass == 0 ? step_scale : 0.5 * step_scale;
      std::vector<double> sup_l(nl, 0.0);
      kernels::parallel_for(nl, [&](std::size_t li) {
        double s = 0.0;
        for (std::size_t xk = 0; xk < nx; ++xk) {
          const Vec3& xi = grid.xis[xk];
          const double xin = norm(xi, p.n);
          const double h = scale * (1.0 + xin);
          const double v = std::pow(xin, order) * deriv_abs(p, grid.lambdas[li], xi, al, h);
          s = std::max(s, v);
        }
        sup_l[li] = s;
      });
      double overall = 0.0;
      for (double v : sup_l) overall = std::max(overall, v);
      if (pass == 0) {
        e.sup_per_lambda = sup_l;
        e.sup = overall;
      } else {
        e.sup_halved_step = overall;
      }
    }
    const double big = std::max(e.sup, e.sup_halved_step);
    // entries at the finite-difference noise floor count as (numerically zero and) stable
    e.stable = std::isfinite(e.sup) && (big < 1e-6 || std::abs(e.sup - e.sup_halved_step) / big < 0.05);
    out.entries.push_back(std::move(e));
  }
  out.pass = true;
  for (const auto& e : out.entries) out.pass = out.pass && e.stable && std::isfinite(e.sup);
  return out;
}

double largest_stable_phi(const SymbolParams& p, int n_dim, int bisection_steps) {
  double lo = 0.5 * M_PI * 1.0001;
  double hi = M_PI * 0.9999;
  auto positive = [&](double phi) {
    const SectorGrid g = SectorGrid::make(n_dim, phi, 16, 15, 8, 15);
    return parabolicity_scan(p, g).c_min > 1e-12;
  };
  if (!positive(lo)) return 0.5 * M_PI;  // no margin beyond the half plane at this resolution
  if (positive(hi)) return hi;
  for (int it = 0; it < bisection_steps; ++it) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace chg
