#pragma once
// Linear-solver backends for the coupled step systems: a partial-pivoted
// banded LU for the 1D direct path, restarted GMRES for 2D, and an exact
// constant-coefficient block solver (DCT-diagonalized) used as the GMRES
// preconditioner.

#include <functional>
#include <span>
#include <vector>

#include "chg/grid.hpp"

namespace chg {

// General banded matrix in LAPACK band storage with LU via dgbtrf/dgbtrs.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  double& at(int i, int j);          // |i-j| must fit in the bands
  double entry(int i, int j) const;  // 0 outside the bands
  void clear();

  void factor();
  void solve(std::span<double> rhs) const;  // in place; requires factor()

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
  bool factored_ = false;
};

struct GmresOptions {
  int restart = 40;
  int max_iters = 4000;
  double rel_tol = 1e-10;
};
struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double rel_residual = 0.0;
};

// Right-preconditioned restarted GMRES on a matrix-free operator.
// apply_op(x, y): y = A x. apply_precond(x, y): y = M^{-1} x (identity if null).
GmresResult gmres(std::size_t n, const std::function<void(const double*, double*)>& apply_op,
                  const std::function<void(const double*, double*)>& apply_precond,
                  std::span<const double> rhs, std::span<double> x, const GmresOptions& opt);

// Exact inverse of the coupled step operator with a = c = 0 and constant
// mobility on the Neumann rectangle. The cell-centered zero-flux Laplacian is
// diagonal in the DCT-II basis with per-axis eigenvalues
// (4/h^2) sin^2(pi k / 2N), so each mode reduces to a 2x2 solve.
// Vector layout: [psi cells..., mu cells...].
class CosineBlockSolver {
 public:
  CosineBlockSolver(const GridSpec& grid, double tau, double beta, double stab, double b_mean);
  ~CosineBlockSolver();
  CosineBlockSolver(const CosineBlockSolver&) = delete;
  CosineBlockSolver& operator=(const CosineBlockSolver&) = delete;

  void solve(const double* rhs, double* out) const;
  std::size_t unknowns() const { return 2 * ncells_; }

 private:
  std::size_t ncells_;
  double tau_, beta_, stab_, b_mean_;
  std::vector<double> eig_;  // -Laplacian eigenvalue per cell-ordered mode
  mutable std::vector<double> work1_, work2_;
  void* plan_fwd_ = nullptr;  // fftw plans on the work buffers
  void* plan_bwd_ = nullptr;
  double norm_ = 1.0;
};

}  // namespace chg
