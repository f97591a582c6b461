#include "chg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "chg/kernels.hpp"

namespace chg {

bool DiagnosticsRecord::finite() const {
  for (double v : {mass, energy, dE_dt, diss_beta, diss_cross, diss_mobility, mean_mu,
                   mean_mu_residual, energy_identity_residual, stationary_residual,
                   mass_balance_residual, rate_psi, grad_mu_norm}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double energy(const CellField& psi, const PotentialSpec& pot) {
  const FaceField G = gradient(psi);
  const double grad_part = 0.5 * inner(G, G);
  const double phi_part = kernels::indexed_sum(psi.v.size(), [&](std::size_t i) {
                            return eval(pot, psi.v[i]).phi;
                          }) *
                          psi.grid.cell_volume();
  return grad_part + phi_part;
}

double stationary_residual(const CellField& psi, const PotentialSpec& pot) {
  const CellField lap = laplacian(psi);
  CellField r = CellField::zeros(psi.grid);
  kernels::parallel_for(r.v.size(), [&](std::size_t i) { r.v[i] = eval(pot, psi.v[i]).dphi; });
  const double mean_dphi = integrate(r) / (psi.grid.extents[0] *
                                           (psi.grid.dimension == 2 ? psi.grid.extents[1] : 1.0));
  kernels::parallel_for(r.v.size(), [&](std::size_t i) { r.v[i] += -lap.v[i] - mean_dphi; });
  return l2_norm(r);
}

bool dissipation_check(const DiagnosticsRecord& rec, double epsilon, bool homogeneous_data) {
  if (!homogeneous_data) return true;  // inequality only claimed for homogeneous data
  const double rate2 = rec.rate_psi * rec.rate_psi + rec.grad_mu_norm * rec.grad_mu_norm;
  return rec.dE_dt <= -epsilon * rate2 + 10.0 * rec.energy_identity_residual + 1e-14;
}

namespace {

// Face-average of a cell field with zero boundary faces (no flux of the
// advective coefficients through the boundary).
void face_average_into(const GridSpec& g, const double* u, FaceField& out) {
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  kernels::parallel_rows(ny, nx, [&](std::size_t iy) {
    const double* uc = u + iy * nx;
    double* fx = out.comp[0].data() + iy * (nx + 1);
    fx[0] = 0.0;
    fx[nx] = 0.0;
    for (int ix = 1; ix < nx; ++ix) fx[ix] = 0.5 * (uc[ix] + uc[ix - 1]);
  });
  if (g.dimension == 2) {
    kernels::parallel_rows(ny - 1, nx, [&](std::size_t row) {
      const std::size_t iy = row + 1;
      const double* uc = u + iy * nx;
      double* fy = out.comp[1].data() + iy * nx;
      for (int ix = 0; ix < nx; ++ix) fy[ix] = 0.5 * (uc[ix] + uc[ix - nx]);
    });
  }
}

// Interior gradient with zero boundary faces.
void gradient_into(const GridSpec& g, const double* u, FaceField& out) {
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  const double ihx = 1.0 / g.spacing[0];
  kernels::parallel_rows(ny, nx, [&](std::size_t iy) {
    const double* uc = u + iy * nx;
    double* fx = out.comp[0].data() + iy * (nx + 1);
    fx[0] = 0.0;
    fx[nx] = 0.0;
    for (int ix = 1; ix < nx; ++ix) fx[ix] = (uc[ix] - uc[ix - 1]) * ihx;
  });
  if (g.dimension == 2) {
    const double ihy = 1.0 / g.spacing[1];
    kernels::parallel_rows(ny - 1, nx, [&](std::size_t row) {
      const std::size_t iy = row + 1;
      const double* uc = u + iy * nx;
      double* fy = out.comp[1].data() + iy * nx;
      for (int ix = 0; ix < nx; ++ix) fy[ix] = (uc[ix] - uc[ix - nx]) * ihy;
    });
  }
}

void scale_faces(const GridSpec& g, const FaceField& coeff, FaceField& F) {
  for (int axis = 0; axis < g.dimension; ++axis) {
    kernels::parallel_for(F.comp[axis].size(),
                          [&](std::size_t f) { F.comp[axis][f] *= coeff.comp[axis][f]; });
  }
}

void divergence_add(const GridSpec& g, const FaceField& F, double scale, double* y) {
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  const double ihx = 1.0 / g.spacing[0];
  if (g.dimension == 1) {
    kernels::parallel_for(g.num_cells(), [&](std::size_t c) {
      y[c] += scale * (F.comp[0][c + 1] - F.comp[0][c]) * ihx;
    });
    return;
  }
  const double ihy = 1.0 / g.spacing[1];
  kernels::parallel_rows(ny, nx, [&](std::size_t iy) {
    const double* fx = F.comp[0].data() + iy * (nx + 1);
    const double* fy = F.comp[1].data() + iy * nx;
    double* yc = y + iy * nx;
    for (int ix = 0; ix < nx; ++ix) {
      yc[ix] += scale * ((fx[ix + 1] - fx[ix]) * ihx + (fy[ix + nx] - fy[ix]) * ihy);
    }
  });
}

// Boundary-data faces as axis components: outward value times outward sign.
FaceField boundary_data_faces(const GridSpec& g,
                              const std::function<double(double, const BoundaryFace&)>& h,
                              double t) {
  FaceField F = FaceField::zeros(g);
  if (h) {
    for_each_boundary_face(g, [&](const BoundaryFace& bf) {
      F.comp[bf.axis][bf.face] = (bf.side == 0 ? -1.0 : 1.0) * h(t, bf);
    });
  }
  return F;
}

double source_integral(const GridSpec& g,
                       const std::function<double(double, double, double)>& f, double t) {
  if (!f) return 0.0;
  return kernels::indexed_sum(g.num_cells(),
                              [&](std::size_t c) {
                                const auto x = g.cell_center(c);
                                return f(t, x[0], x[1]);
                              }) *
         g.cell_volume();
}

double boundary_integral(const GridSpec& g,
                         const std::function<double(double, const BoundaryFace&)>& h, double t) {
  if (!h) return 0.0;
  double s = 0.0;
  for_each_boundary_face(g, [&](const BoundaryFace& bf) { s += h(t, bf) * bf.area; });
  return s;
}

// Sum over boundary faces of datum * adjacent-cell value * face area.
double boundary_pairing(const GridSpec& g,
                        const std::function<double(double, const BoundaryFace&)>& h, double t,
                        const std::vector<double>& cell_vals) {
  if (!h) return 0.0;
  const int nx = g.cells[0];
  const int ny = g.dimension == 2 ? g.cells[1] : 1;
  double s = 0.0;
  for_each_boundary_face(g, [&](const BoundaryFace& bf) {
    std::size_t adj;
    if (bf.axis == 0) {
      const int iy = static_cast<int>(bf.face / (nx + 1));
      adj = static_cast<std::size_t>(iy) * nx + (bf.side == 0 ? 0 : nx - 1);
    } else {
      const int ix = static_cast<int>(bf.face % nx);
      adj = static_cast<std::size_t>(bf.side == 0 ? 0 : ny - 1) * nx + ix;
    }
    s += h(t, bf) * cell_vals[adj] * bf.area;
  });
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stepper
// ---------------------------------------------------------------------------

Stepper::Stepper(const GridSpec& grid, const CoefficientSet& coeffs, const PotentialSpec& pot,
                 const StepOptions& opt)
    : grid_(grid), coeffs_(coeffs), pot_(pot), opt_(opt) {
  if (opt_.tau <= 0.0) throw std::invalid_argument("time step must be positive");
  if (opt_.picard_iters < 1 || opt_.picard_iters > 10) {
    throw std::invalid_argument("picard_iters must lie in [1,10]");
  }
  stab_ = stabilization_slope(pot_);
  const bool state_dep =
      coeffs_.a.state_dependent || coeffs_.c.state_dependent || coeffs_.b.state_dependent;
  if (state_dep && !opt_.quasilinear) {
    throw ValidationError("state-dependent coefficients require quasilinear mode");
  }
  if (!state_dep) {
    refreeze(nullptr);  // x-only coefficients freeze once
  }
}

void Stepper::refreeze(const CellField* psi) {
  frozen_ = std::make_shared<const FrozenCoefficients>(freeze(coeffs_, grid_, psi));
  epsilon_ = frozen_->epsilon;
  if (grid_.dimension == 1) {
    band_ = std::make_unique<BandedMatrix>(assemble_banded(*frozen_));
    band_->factor();
  }
}

void Stepper::apply_operator(const FrozenCoefficients& fc, const double* x, double* y) const {
  const std::size_t nc = grid_.num_cells();
  const double* xpsi = x;
  const double* xmu = x + nc;
  FaceField Fa = FaceField::zeros(grid_);
  FaceField Fb = FaceField::zeros(grid_);
  FaceField Fc = FaceField::zeros(grid_);
  FaceField Gp = FaceField::zeros(grid_);
  face_average_into(grid_, xpsi, Fa);
  scale_faces(grid_, fc.a_normal, Fa);
  gradient_into(grid_, xmu, Fb);
  scale_faces(grid_, fc.b_face, Fb);
  face_average_into(grid_, xmu, Fc);
  scale_faces(grid_, fc.c_normal, Fc);
  gradient_into(grid_, xpsi, Gp);

  const double inv_tau = 1.0 / opt_.tau;
  const double zcoef = fc.beta * inv_tau + stab_;
  kernels::parallel_for(nc, [&](std::size_t c) {
    y[c] = inv_tau * xpsi[c];
    y[nc + c] = -zcoef * xpsi[c] + xmu[c];
  });
  divergence_add(grid_, Fa, -inv_tau, y);
  divergence_add(grid_, Fb, -1.0, y);
  divergence_add(grid_, Gp, 1.0, y + nc);
  divergence_add(grid_, Fc, -1.0, y + nc);
}

BandedMatrix Stepper::assemble_banded(const FrozenCoefficients& fc) const {
  // Interleaved ordering (psi_0, mu_0, psi_1, mu_1, ...) keeps the bandwidth
  // at 3; entries are probed from the matrix-free operator so the two paths
  // cannot drift apart.
  if (grid_.dimension != 1) throw std::logic_error("banded assembly is the 1D path");
  const int nc = static_cast<int>(grid_.num_cells());
  const int n = 2 * nc;
  BandedMatrix A(n, 3, 3);
  std::vector<double> x(n, 0.0), y(n, 0.0);
  auto to_inter = [nc](int block) { return block < nc ? 2 * block : 2 * (block - nc) + 1; };
  for (int jblock = 0; jblock < n; ++jblock) {
    x.assign(n, 0.0);
    x[jblock] = 1.0;
    apply_operator(fc, x.data(), y.data());
    const int j = to_inter(jblock);
    for (int iblock = 0; iblock < n; ++iblock) {
      if (y[iblock] != 0.0) {
        A.at(to_inter(iblock), j) = y[iblock];
      }
    }
  }
  return A;
}

std::vector<double> Stepper::assemble_rhs(const SolverState& state, const CellField& psi_lin,
                                          const SourceData& data, double t_next,
                                          const FrozenCoefficients& fc) const {
  const std::size_t nc = grid_.num_cells();
  std::vector<double> rhs(2 * nc, 0.0);
  const double inv_tau = 1.0 / opt_.tau;

  // (1/tau)(psi^n - div(a avg psi^n))
  FaceField Fa = FaceField::zeros(grid_);
  face_average_into(grid_, state.psi.v.data(), Fa);
  scale_faces(grid_, fc.a_normal, Fa);
  kernels::parallel_for(nc, [&](std::size_t c) { rhs[c] = inv_tau * state.psi.v[c]; });
  divergence_add(grid_, Fa, -inv_tau, rhs.data());

  // volumetric sources and the explicit potential split
  kernels::parallel_for(nc, [&](std::size_t c) {
    const auto x = grid_.cell_center(c);
    if (data.f) rhs[c] += data.f(t_next, x[0], x[1]);
    double r2 = eval(pot_, psi_lin.v[c]).dphi - stab_ * psi_lin.v[c] -
                fc.beta * inv_tau * state.psi.v[c];
    if (data.g) r2 += data.g(t_next, x[0], x[1]);
    rhs[nc + c] = r2;
  });

  // boundary data enter through the divergence of their face values
  if (data.h1) {
    const FaceField H1 = boundary_data_faces(grid_, data.h1, t_next);
    divergence_add(grid_, H1, 1.0, rhs.data());
  }
  if (data.h2) {
    const FaceField H2 = boundary_data_faces(grid_, data.h2, t_next);
    divergence_add(grid_, H2, -1.0, rhs.data() + nc);
  }
  return rhs;
}

std::vector<double> Stepper::solve_linear(const std::vector<double>& rhs,
                                          const SolverState& guess) {
  const std::size_t nc = grid_.num_cells();
  const std::size_t n = 2 * nc;
  std::vector<double> x(n, 0.0);
  if (grid_.dimension == 1) {
    // permute block -> interleaved, back-substitute, permute back
    std::vector<double> r(n);
    for (std::size_t c = 0; c < nc; ++c) {
      r[2 * c] = rhs[c];
      r[2 * c + 1] = rhs[nc + c];
    }
    band_->solve(r);
    for (std::size_t c = 0; c < nc; ++c) {
      x[c] = r[2 * c];
      x[nc + c] = r[2 * c + 1];
    }
    return x;
  }
  if (!precond_) {
    const double b_mean = kernels::sum(frozen_->b_cell) / static_cast<double>(nc);
    precond_ = std::make_unique<CosineBlockSolver>(grid_, opt_.tau, coeffs_.beta, stab_, b_mean);
  }
  std::memcpy(x.data(), guess.psi.v.data(), nc * sizeof(double));
  std::memcpy(x.data() + nc, guess.mu.v.data(), nc * sizeof(double));
  const auto& fc = *frozen_;
  const GmresResult res = gmres(
      n, [&](const double* in, double* out) { apply_operator(fc, in, out); },
      [&](const double* in, double* out) { precond_->solve(in, out); }, rhs, x, opt_.gmres);
  if (!res.converged) {
    throw SolveError("step solve did not converge (relative residual " +
                         std::to_string(res.rel_residual) + ")",
                     res.rel_residual);
  }
  return x;
}

SolverState Stepper::init_state(const CellField& psi0, const SourceData& data,
                                const std::function<double(const BoundaryFace&)>& psi0_normal) {
  if (!psi0.grid.same_mesh(grid_)) throw std::invalid_argument("psi0 grid mismatch");

  if (opt_.quasilinear) refreeze(&psi0);
  if (!frozen_) refreeze(&psi0);
  if (!(frozen_->epsilon > 0.0)) {
    throw ValidationError("ellipticity margin is not positive (min " +
                          std::to_string(frozen_->epsilon) + ")");
  }
  coeffs_.epsilon = frozen_->epsilon;

  // Neumann compatibility of the initial trace against h2(0).
  double compat = 0.0;
  for_each_boundary_face(grid_, [&](const BoundaryFace& bf) {
    const double lhs = psi0_normal ? psi0_normal(bf) : 0.0;
    const double rhs = data.h2 ? data.h2(0.0, bf) : 0.0;
    compat = std::max(compat, std::abs(lhs - rhs));
  });
  if (compat > 1e-8) {
    throw ValidationError("initial normal derivative incompatible with h2(0): max deviation " +
                          std::to_string(compat));
  }

  if (opt_.quasilinear) {
    for (const VectorCoefficient* vc : {&coeffs_.a, &coeffs_.c}) {
      const double dv = max_divergence(*vc, grid_, &psi0);
      const double tg = max_boundary_normal(*vc, grid_, &psi0);
      if (dv > 1e-8 || tg > 1e-8) {
        throw ValidationError("frozen coefficient field violates divergence-free/tangency "
                              "conditions (div " +
                              std::to_string(dv) + ", normal " + std::to_string(tg) + ")");
      }
    }
  }

  // mu from one elliptic solve with dpsi/dt = 0:
  //   mu - div(c avg mu) = g(0) + Phi'(psi0) - lap(psi0) - div_bc(h2(0)).
  const std::size_t nc = grid_.num_cells();
  std::vector<double> rhs(nc, 0.0);
  {
    FaceField Gp = FaceField::zeros(grid_);
    gradient_into(grid_, psi0.v.data(), Gp);
    kernels::parallel_for(nc, [&](std::size_t c) {
      const auto x = grid_.cell_center(c);
      rhs[c] = eval(pot_, psi0.v[c]).dphi;
      if (data.g) rhs[c] += data.g(0.0, x[0], x[1]);
    });
    divergence_add(grid_, Gp, -1.0, rhs.data());
    if (data.h2) {
      const FaceField H2 = boundary_data_faces(grid_, data.h2, 0.0);
      divergence_add(grid_, H2, -1.0, rhs.data());
    }
  }
  const auto& fc = *frozen_;
  auto apply_mu = [&](const double* in, double* out) {
    FaceField Fc = FaceField::zeros(grid_);
    face_average_into(grid_, in, Fc);
    scale_faces(grid_, fc.c_normal, Fc);
    kernels::parallel_for(nc, [&](std::size_t c) { out[c] = in[c]; });
    divergence_add(grid_, Fc, -1.0, out);
  };
  std::vector<double> mu(nc, 0.0);
  if (grid_.dimension == 1) {
    BandedMatrix M(static_cast<int>(nc), 1, 1);
    std::vector<double> e(nc, 0.0), col(nc, 0.0);
    for (std::size_t j = 0; j < nc; ++j) {
      e.assign(nc, 0.0);
      e[j] = 1.0;
      apply_mu(e.data(), col.data());
      for (std::size_t i = (j == 0 ? 0 : j - 1); i <= std::min(nc - 1, j + 1); ++i) {
        if (col[i] != 0.0) M.at(static_cast<int>(i), static_cast<int>(j)) = col[i];
      }
    }
    M.factor();
    mu = rhs;
    M.solve(mu);
  } else {
    GmresOptions go = opt_.gmres;
    const GmresResult res = gmres(nc, apply_mu, nullptr, rhs, mu, go);
    if (!res.converged) {
      throw SolveError("initial elliptic solve did not converge", res.rel_residual);
    }
  }

  SolverState s;
  s.t = 0.0;
  s.psi = psi0;
  s.mu = CellField{grid_, std::move(mu)};
  s.dpsi_dt = CellField::zeros(grid_);
  s.frozen = frozen_;
  mass0_ = integrate(psi0);
  accumulated_source_ = 0.0;
  step_count_ = 0;
  return s;
}

std::pair<SolverState, DiagnosticsRecord> Stepper::step(const SolverState& state,
                                                        const SourceData& data) {
  if (opt_.quasilinear) refreeze(&state.psi);
  const auto& fc = *frozen_;
  const double t_next = state.t + opt_.tau;
  const std::size_t nc = grid_.num_cells();

  std::vector<double> rhs = assemble_rhs(state, state.psi, data, t_next, fc);
  std::vector<double> x = solve_linear(rhs, state);

  if (opt_.picard_iters > 1) {
    CellField psi_lin{grid_, std::vector<double>(x.begin(), x.begin() + nc)};
    for (int it = 1; it < opt_.picard_iters; ++it) {
      rhs = assemble_rhs(state, psi_lin, data, t_next, fc);
      std::vector<double> xn = solve_linear(rhs, state);
      double change = 0.0;
      for (std::size_t c = 0; c < nc; ++c) change = std::max(change, std::abs(xn[c] - psi_lin.v[c]));
      psi_lin.v.assign(xn.begin(), xn.begin() + nc);
      x = std::move(xn);
      if (change <= opt_.picard_tol) break;
    }
  }

  SolverState next;
  next.t = t_next;
  next.psi = CellField{grid_, std::vector<double>(x.begin(), x.begin() + nc)};
  next.mu = CellField{grid_, std::vector<double>(x.begin() + nc, x.end())};
  next.dpsi_dt = CellField::zeros(grid_);
  const double inv_tau = 1.0 / opt_.tau;
  kernels::parallel_for(nc, [&](std::size_t c) {
    next.dpsi_dt.v[c] = (next.psi.v[c] - state.psi.v[c]) * inv_tau;
  });
  next.frozen = frozen_;

  ++step_count_;
  accumulated_source_ +=
      opt_.tau * (source_integral(grid_, data.f, t_next) + boundary_integral(grid_, data.h1, t_next));

  DiagnosticsRecord rec = diagnose(state, next, data);
  rec.step = step_count_;
  if (!rec.finite()) {
    throw SolveError("non-finite state after step " + std::to_string(step_count_), 0.0);
  }
  return {std::move(next), rec};
}

DiagnosticsRecord Stepper::diagnose(const SolverState& old_state, const SolverState& new_state,
                                    const SourceData& data) const {
  const auto& fc = *new_state.frozen;
  const std::size_t nc = grid_.num_cells();
  const double t1 = new_state.t;
  const double volume = grid_.extents[0] * (grid_.dimension == 2 ? grid_.extents[1] : 1.0);
  const CellField& v = new_state.dpsi_dt;

  DiagnosticsRecord rec;
  rec.t = t1;
  rec.mass = integrate(new_state.psi);
  rec.energy = energy(new_state.psi, pot_);
  const double e0 = energy(old_state.psi, pot_);
  rec.dE_dt = (rec.energy - e0) / opt_.tau;

  rec.diss_beta = fc.beta * inner(v, v);
  rec.rate_psi = std::sqrt(inner(v, v));

  FaceField Gm = FaceField::zeros(grid_);
  gradient_into(grid_, new_state.mu.v.data(), Gm);
  rec.grad_mu_norm = l2_norm(Gm);
  FaceField bGm = Gm;
  scale_faces(grid_, fc.b_face, bGm);
  rec.diss_mobility = inner(bGm, Gm);

  // discrete cross pairing: <a avg v, grad mu> + <div(c avg mu), v>
  FaceField Av = FaceField::zeros(grid_);
  face_average_into(grid_, v.v.data(), Av);
  scale_faces(grid_, fc.a_normal, Av);
  FaceField Cm = FaceField::zeros(grid_);
  face_average_into(grid_, new_state.mu.v.data(), Cm);
  scale_faces(grid_, fc.c_normal, Cm);
  rec.diss_cross = inner(Av, Gm) + inner(divergence(Cm), v);

  rec.mean_mu = integrate(new_state.mu) / volume;

  // mean identity: int mu = int[Phi'(psi^n) + S dpsi] + int g + beta(int f + bsum h1) - bsum h2
  const double int_mu = integrate(new_state.mu);
  const double int_phi_stab =
      kernels::indexed_sum(nc,
                           [&](std::size_t c) {
                             return eval(pot_, old_state.psi.v[c]).dphi +
                                    stab_ * (new_state.psi.v[c] - old_state.psi.v[c]);
                           }) *
      grid_.cell_volume();
  const double int_f = source_integral(grid_, data.f, t1);
  const double int_g = source_integral(grid_, data.g, t1);
  const double bsum_h1 = boundary_integral(grid_, data.h1, t1);
  const double bsum_h2 = boundary_integral(grid_, data.h2, t1);
  rec.mean_mu_residual =
      std::abs(int_mu - int_phi_stab - int_g - fc.beta * (int_f + bsum_h1) + bsum_h2);

  // energy identity with the scheme's numerical-dissipation terms on the left
  FaceField Gv = FaceField::zeros(grid_);
  gradient_into(grid_, v.v.data(), Gv);
  const double extra = opt_.tau * (stab_ * inner(v, v) + 0.5 * inner(Gv, Gv));
  double rhs_data = 0.0;
  if (data.f) {
    rhs_data += kernels::indexed_sum(nc,
                                     [&](std::size_t c) {
                                       const auto x = grid_.cell_center(c);
                                       return data.f(t1, x[0], x[1]) * new_state.mu.v[c];
                                     }) *
                grid_.cell_volume();
  }
  if (data.g) {
    rhs_data -= kernels::indexed_sum(nc,
                                     [&](std::size_t c) {
                                       const auto x = grid_.cell_center(c);
                                       return data.g(t1, x[0], x[1]) * v.v[c];
                                     }) *
                grid_.cell_volume();
  }
  rhs_data += boundary_pairing(grid_, data.h1, t1, new_state.mu.v);
  rhs_data += boundary_pairing(grid_, data.h2, t1, v.v);
  rec.energy_identity_residual = std::abs(rec.dE_dt + rec.diss_beta + rec.diss_cross +
                                          rec.diss_mobility + extra - rhs_data);

  rec.stationary_residual = stationary_residual(new_state.psi, pot_);
  rec.mass_balance_residual = std::abs(rec.mass - mass0_ - accumulated_source_);
  return rec;
}

// ---------------------------------------------------------------------------
// SteadyDetector
// ---------------------------------------------------------------------------

SteadyDetector::SteadyDetector(double tol_rate, double tol_station, int consecutive)
    : tol_rate_(tol_rate), tol_station_(tol_station), required_(consecutive) {}

std::optional<EquilibriumReport> SteadyDetector::feed(const SolverState& state,
                                                      const DiagnosticsRecord& rec,
                                                      const PotentialSpec& pot) {
  energy_tail_.emplace_back(rec.t, rec.energy);
  if (energy_tail_.size() > 4000) energy_tail_.erase(energy_tail_.begin());

  if (rec.rate_psi < tol_rate_ && rec.grad_mu_norm < tol_rate_) {
    ++count_;
  } else {
    count_ = 0;
  }
  // rates at machine level mean an exact fixed point; no need to wait
  const bool machine_zero = rec.rate_psi < 1e-13 && rec.grad_mu_norm < 1e-13;
  if (count_ < required_ && !machine_zero) return std::nullopt;

  EquilibriumReport rep;
  rep.step = rec.step;
  rep.t = rec.t;
  rep.psi_inf = state.psi;
  rep.mu_inf_field = state.mu;
  const double volume =
      state.psi.grid.extents[0] * (state.psi.grid.dimension == 2 ? state.psi.grid.extents[1] : 1.0);
  rep.mu_inf = integrate(state.mu) / volume;
  double dev = 0.0;
  for (double m : state.mu.v) dev = std::max(dev, std::abs(m - rep.mu_inf));
  rep.max_mu_deviation = dev;
  rep.stationary_res = stationary_residual(state.psi, pot);
  rep.rate_psi = rec.rate_psi;
  rep.grad_mu_norm = rec.grad_mu_norm;
  rep.certified = rep.stationary_res <= tol_station_;

  // trailing-energy decay exponent, reporting only
  const double e_end = energy_tail_.back().second;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int npts = 0;
  for (const auto& [t, e] : energy_tail_) {
    const double d = e - e_end;
    if (d > 1e-16 * std::max(1.0, std::abs(e_end))) {
      const double y = std::log(d);
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
      ++npts;
    }
  }
  if (npts > 2 && sxx * npts - sx * sx > 0.0) {
    rep.decay_exponent = -(npts * sxy - sx * sy) / (npts * sxx - sx * sx);
  }
  return rep;
}

}  // namespace chg
