#include "chg/linsolve.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "chg/kernels.hpp"

namespace chg {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1) {
  ab_.assign(static_cast<std::size_t>(ldab_) * n_, 0.0);
  ipiv_.assign(n_, 0);
}

double& BandedMatrix::at(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_) {
    throw std::out_of_range("BandedMatrix::at outside band");
  }
  factored_ = false;
  return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

double BandedMatrix::entry(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_) return 0.0;
  return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

void BandedMatrix::clear() {
  std::fill(ab_.begin(), ab_.end(), 0.0);
  factored_ = false;
}

void BandedMatrix::factor() {
  const lapack_int info =
      LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
  if (info != 0) throw std::runtime_error("banded LU failed (singular step matrix?)");
  factored_ = true;
}

void BandedMatrix::solve(std::span<double> rhs) const {
  if (!factored_) throw std::logic_error("BandedMatrix::solve before factor");
  if (static_cast<int>(rhs.size()) != n_) throw std::invalid_argument("rhs size mismatch");
  const lapack_int info =
      LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ldab_,
                     const_cast<int*>(ipiv_.data()), rhs.data(), n_);
  if (info != 0) throw std::runtime_error("banded back-substitution failed");
}

namespace {
double vec_norm(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }
}  // namespace

GmresResult gmres(std::size_t n, const std::function<void(const double*, double*)>& apply_op,
                  const std::function<void(const double*, double*)>& apply_precond,
                  std::span<const double> rhs, std::span<double> x, const GmresOptions& opt) {
  const int m = opt.restart;
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n, 0.0));
  std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
  std::vector<double> cs(m, 0.0), sn(m, 0.0), s(m + 1, 0.0);
  std::vector<double> w(n, 0.0), z(n, 0.0), r(n, 0.0);

  const double bnorm = std::max(vec_norm(rhs), 1e-300);
  GmresResult res;

  auto precond = [&](const double* in, double* out) {
    if (apply_precond) {
      apply_precond(in, out);
    } else {
      std::memcpy(out, in, n * sizeof(double));
    }
  };

  int total_iters = 0;
  while (total_iters < opt.max_iters) {
    // r = b - A x
    apply_op(x.data(), w.data());
    kernels::parallel_for(n, [&](std::size_t i) { r[i] = rhs[i] - w[i]; });
    const double rnorm = vec_norm(r);
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= opt.rel_tol) {
      res.converged = true;
      res.iterations = total_iters;
      return res;
    }
    kernels::parallel_for(n, [&](std::size_t i) { V[0][i] = r[i] / rnorm; });
    std::fill(s.begin(), s.end(), 0.0);
    s[0] = rnorm;

    int k = 0;
    for (; k < m && total_iters < opt.max_iters; ++k, ++total_iters) {
      precond(V[k].data(), z.data());
      apply_op(z.data(), w.data());
      // modified Gram-Schmidt
      for (int j = 0; j <= k; ++j) {
        const double hjk = kernels::dot(w, V[j]);
        H[static_cast<std::size_t>(j) * m + k] = hjk;
        kernels::parallel_for(n, [&](std::size_t i) { w[i] -= hjk * V[j][i]; });
      }
      const double hk1 = vec_norm(w);
      H[static_cast<std::size_t>(k + 1) * m + k] = hk1;
      if (hk1 > 0.0) {
        kernels::parallel_for(n, [&](std::size_t i) { V[k + 1][i] = w[i] / hk1; });
      }
      // Givens rotations
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H[static_cast<std::size_t>(j) * m + k] +
                         sn[j] * H[static_cast<std::size_t>(j + 1) * m + k];
        H[static_cast<std::size_t>(j + 1) * m + k] =
            -sn[j] * H[static_cast<std::size_t>(j) * m + k] +
            cs[j] * H[static_cast<std::size_t>(j + 1) * m + k];
        H[static_cast<std::size_t>(j) * m + k] = t;
      }
      const double hkk = H[static_cast<std::size_t>(k) * m + k];
      const double denom = std::hypot(hkk, hk1);
      if (denom == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = hkk / denom;
        sn[k] = hk1 / denom;
      }
      H[static_cast<std::size_t>(k) * m + k] = cs[k] * hkk + sn[k] * hk1;
      H[static_cast<std::size_t>(k + 1) * m + k] = 0.0;
      s[k + 1] = -sn[k] * s[k];
      s[k] = cs[k] * s[k];
      if (std::abs(s[k + 1]) / bnorm <= 0.2 * opt.rel_tol) {
        ++k;
        ++total_iters;
        break;
      }
    }
    // back-solve the small triangular system, update x
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double t = s[i];
      for (int j = i + 1; j < k; ++j) t -= H[static_cast<std::size_t>(i) * m + j] * y[j];
      y[i] = t / H[static_cast<std::size_t>(i) * m + i];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < k; ++j) {
      kernels::parallel_for(n, [&](std::size_t i) { w[i] += y[j] * V[j][i]; });
    }
    precond(w.data(), z.data());
    kernels::parallel_for(n, [&](std::size_t i) { x[i] += z[i]; });
  }
  apply_op(x.data(), w.data());
  kernels::parallel_for(n, [&](std::size_t i) { r[i] = rhs[i] - w[i]; });
  res.rel_residual = vec_norm(r) / bnorm;
  res.converged = res.rel_residual <= opt.rel_tol;
  res.iterations = total_iters;
  return res;
}

// ---------------------------------------------------------------------------
// CosineBlockSolver
// ---------------------------------------------------------------------------

namespace {
std::mutex fftw_plan_mutex;  // fftw planning is not thread-safe
}

CosineBlockSolver::CosineBlockSolver(const GridSpec& grid, double tau, double beta, double stab,
                                     double b_mean)
    : ncells_(grid.num_cells()), tau_(tau), beta_(beta), stab_(stab), b_mean_(b_mean) {
  const int nx = grid.cells[0];
  const int ny = grid.dimension == 2 ? grid.cells[1] : 1;
  eig_.assign(ncells_, 0.0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double sx = std::sin(0.5 * M_PI * ix / nx);
      double lam = 4.0 / (grid.spacing[0] * grid.spacing[0]) * sx * sx;
      if (grid.dimension == 2) {
        const double sy = std::sin(0.5 * M_PI * iy / ny);
        lam += 4.0 / (grid.spacing[1] * grid.spacing[1]) * sy * sy;
      }
      eig_[static_cast<std::size_t>(iy) * nx + ix] = lam;
    }
  }
  work1_.assign(ncells_, 0.0);
  work2_.assign(ncells_, 0.0);

  std::lock_guard<std::mutex> lock(fftw_plan_mutex);
  if (grid.dimension == 1) {
    plan_fwd_ = fftw_plan_r2r_1d(nx, work1_.data(), work1_.data(), FFTW_REDFT10, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_r2r_1d(nx, work1_.data(), work1_.data(), FFTW_REDFT01, FFTW_ESTIMATE);
    norm_ = 1.0 / (2.0 * nx);
  } else {
    plan_fwd_ = fftw_plan_r2r_2d(ny, nx, work1_.data(), work1_.data(), FFTW_REDFT10, FFTW_REDFT10,
                                 FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_r2r_2d(ny, nx, work1_.data(), work1_.data(), FFTW_REDFT01, FFTW_REDFT01,
                                 FFTW_ESTIMATE);
    norm_ = 1.0 / (4.0 * nx * ny);
  }
}

CosineBlockSolver::~CosineBlockSolver() {
  std::lock_guard<std::mutex> lock(fftw_plan_mutex);
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void CosineBlockSolver::solve(const double* rhs, double* out) const {
  // forward transforms of both blocks
  std::memcpy(work1_.data(), rhs, ncells_ * sizeof(double));
  fftw_execute_r2r(static_cast<fftw_plan>(plan_fwd_), work1_.data(), work1_.data());
  std::vector<double>& r1 = const_cast<std::vector<double>&>(work2_);
  std::memcpy(r1.data(), work1_.data(), ncells_ * sizeof(double));

  std::memcpy(work1_.data(), rhs + ncells_, ncells_ * sizeof(double));
  fftw_execute_r2r(static_cast<fftw_plan>(plan_fwd_), work1_.data(), work1_.data());

  // per-mode 2x2 solve:
  //   [ 1/tau              b l ] [psi]   [r1]
  //   [ -(beta/tau+S+l)    1   ] [mu ] = [r2]
  for (std::size_t k = 0; k < ncells_; ++k) {
    const double l = eig_[k];
    const double a11 = 1.0 / tau_;
    const double a12 = b_mean_ * l;
    const double a21 = -(beta_ / tau_ + stab_ + l);
    const double det = a11 - a12 * a21;
    const double rr1 = r1[k];
    const double rr2 = work1_[k];
    r1[k] = (rr1 - a12 * rr2) / det;
    work1_[k] = (a11 * rr2 - a21 * rr1) / det;
  }

  // inverse transforms
  fftw_execute_r2r(static_cast<fftw_plan>(plan_bwd_), work1_.data(), work1_.data());
  for (std::size_t k = 0; k < ncells_; ++k) out[ncells_ + k] = work1_[k] * norm_;
  std::memcpy(work1_.data(), r1.data(), ncells_ * sizeof(double));
  fftw_execute_r2r(static_cast<fftw_plan>(plan_bwd_), work1_.data(), work1_.data());
  for (std::size_t k = 0; k < ncells_; ++k) out[k] = work1_[k] * norm_;
}

}  // namespace chg
