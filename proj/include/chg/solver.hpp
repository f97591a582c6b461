#pragma once
// Time stepping for the coupled order-parameter / chemical-potential system,
// semilinear or quasilinear (coefficients re-frozen at the previous state
// each step), plus the discrete ledgers: mass, energy, dissipation split,
// mean identities, stationarity, and steady-state detection.
//
// Scheme: linearly-implicit stabilized Euler. Advective terms are kept in
// conservative form (div(a dpsi), div(c mu)) with boundary fluxes of a and c
// clamped to zero, so the discrete mass and mean identities telescope
// exactly; the validators report how far a supplied coefficient field is
// from divergence-free/tangential, but the ledgers do not depend on it.

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chg/coefficients.hpp"
#include "chg/grid.hpp"
#include "chg/linsolve.hpp"
#include "chg/potential.hpp"

namespace chg {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};
struct SolveError : std::runtime_error {
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), rel_residual(residual) {}
  double rel_residual = 0.0;
};

// Volumetric sources f, g and boundary flux data h1 (mobility flux) and h2
// (order-parameter normal derivative), all as outward-normal values.
struct SourceData {
  std::function<double(double t, double x, double y)> f;  // null means zero
  std::function<double(double t, double x, double y)> g;
  std::function<double(double t, const BoundaryFace&)> h1;
  std::function<double(double t, const BoundaryFace&)> h2;

  bool homogeneous() const { return !f && !g && !h1 && !h2; }
  static SourceData none() { return SourceData{}; }
};

struct SolverState {
  double t = 0.0;
  CellField psi;
  CellField mu;
  CellField dpsi_dt;  // (psi^{n+1} - psi^n)/tau of the last accepted step
  std::shared_ptr<const FrozenCoefficients> frozen;
};

struct DiagnosticsRecord {
  long step = 0;
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double dE_dt = 0.0;
  double diss_beta = 0.0;      // beta |dpsi/dt|_2^2
  double diss_cross = 0.0;     // discrete (a+c | dpsi/dt grad mu) pairing
  double diss_mobility = 0.0;  // (b grad mu | grad mu)_2
  double mean_mu = 0.0;
  double mean_mu_residual = 0.0;
  double energy_identity_residual = 0.0;
  double stationary_residual = 0.0;
  double mass_balance_residual = 0.0;
  // detector inputs, not part of the CSV ledger
  double rate_psi = 0.0;      // |dpsi/dt|_2
  double grad_mu_norm = 0.0;  // |grad mu|_2

  bool finite() const;
};

struct StepOptions {
  double tau = 1e-3;
  bool quasilinear = false;
  int picard_iters = 1;  // 1 = plain stabilized step; up to 10 refreshes of Phi'
  double picard_tol = 1e-10;
  GmresOptions gmres;  // 2D path
};

// E(u) = 1/2 |grad u|_2^2 + integral of Phi(u).
double energy(const CellField& psi, const PotentialSpec& pot);

// L2 norm of -lap(psi) + Phi'(psi) - mean(Phi'(psi)).
double stationary_residual(const CellField& psi, const PotentialSpec& pot);

// Quantified dissipation verdict: with homogeneous data,
// dE/dt <= -eps (|dpsi/dt|^2 + |grad mu|^2) + 10 * energy identity residual.
// Returns true (pass) for non-homogeneous data (inequality not claimed).
bool dissipation_check(const DiagnosticsRecord& rec, double epsilon, bool homogeneous_data);

// Drives a trajectory. Owns the frozen coefficients and the factorized step
// operator (semilinear mode factors once; quasilinear mode re-freezes and
// re-factors each step), plus the running mass ledger.
class Stepper {
 public:
  Stepper(const GridSpec& grid, const CoefficientSet& coeffs, const PotentialSpec& pot,
          const StepOptions& opt);

  // Validates the initial data (ellipticity margin > 0, Neumann compatibility
  // of h2 at t=0 against the declared normal trace of psi0, and for
  // quasilinear runs divergence-freeness/tangency of the frozen fields within
  // 1e-8), then initializes mu by one elliptic solve with dpsi/dt = 0.
  SolverState init_state(const CellField& psi0, const SourceData& data,
                         const std::function<double(const BoundaryFace&)>& psi0_normal = nullptr);

  std::pair<SolverState, DiagnosticsRecord> step(const SolverState& state, const SourceData& data);

  const GridSpec& grid() const { return grid_; }
  const PotentialSpec& potential() const { return pot_; }
  double stabilization() const { return stab_; }
  double epsilon() const { return epsilon_; }
  double initial_mass() const { return mass0_; }

  // The step operator applied to x = [psi; mu] (frozen coefficients of the
  // current state). Exposed for assembly checks and the iterative path.
  void apply_operator(const FrozenCoefficients& fc, const double* x, double* y) const;

  // Dense-equivalent banded assembly of the same operator (1D), built by
  // probing apply_operator with unit vectors.
  BandedMatrix assemble_banded(const FrozenCoefficients& fc) const;

  // Right side for one step from `state` with data at t + tau; the Phi' term
  // is evaluated at `psi_lin` (Picard refreshes pass later iterates).
  std::vector<double> assemble_rhs(const SolverState& state, const CellField& psi_lin,
                                   const SourceData& data, double t_next,
                                   const FrozenCoefficients& fc) const;

 private:
  GridSpec grid_;
  CoefficientSet coeffs_;
  PotentialSpec pot_;
  StepOptions opt_;
  double stab_ = 0.0;
  double epsilon_ = 0.0;
  double mass0_ = 0.0;
  double accumulated_source_ = 0.0;
  long step_count_ = 0;
  std::shared_ptr<const FrozenCoefficients> frozen_;
  std::unique_ptr<BandedMatrix> band_;  // 1D cached factorization
  std::unique_ptr<CosineBlockSolver> precond_;

  void refreeze(const CellField* psi);
  std::vector<double> solve_linear(const std::vector<double>& rhs, const SolverState& guess);
  DiagnosticsRecord diagnose(const SolverState& old_state, const SolverState& new_state,
                             const SourceData& data) const;
};

struct EquilibriumReport {
  long step = 0;
  double t = 0.0;
  CellField psi_inf;
  CellField mu_inf_field;
  double mu_inf = 0.0;            // mean chemical potential
  double max_mu_deviation = 0.0;  // max |mu - mu_inf|
  double stationary_res = 0.0;
  double rate_psi = 0.0;
  double grad_mu_norm = 0.0;
  bool certified = false;         // stationary_res <= tol_station
  double decay_exponent = 0.0;    // fitted from the trailing energy tail; reporting only
};

// Declares equilibrium once |dpsi/dt|_2 and |grad mu|_2 stay below tol_rate
// for `consecutive` steps. Absence of detection is a valid outcome.
class SteadyDetector {
 public:
  SteadyDetector(double tol_rate, double tol_station, int consecutive = 50);
  std::optional<EquilibriumReport> feed(const SolverState& state, const DiagnosticsRecord& rec,
                                        const PotentialSpec& pot);

 private:
  double tol_rate_, tol_station_;
  int required_, count_ = 0;
  std::vector<std::pair<double, double>> energy_tail_;  // (t, E)
};

}  // namespace chg
