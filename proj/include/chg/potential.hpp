#pragma once
// Physical potentials: polynomial families with derivatives up to third
// order, the stabilized splitting used by the time stepper, and desk-scale
// growth certificates (finite scan plus exact degree bookkeeping).

#include <string>
#include <vector>

namespace chg {

enum class PotentialKind { double_well, quartic_general, polynomial };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::double_well;
  std::vector<double> coeffs;   // ascending powers; canonical polynomial form
  double stabilization = -1.0;  // S; negative requests the default (max Phi'' on [-1.5,1.5])
  double scan_radius = 10.0;

  static PotentialSpec double_well();                          // (s^2-1)^2/4
  static PotentialSpec quartic(const std::vector<double>& c);  // degree-4 coefficients
  static PotentialSpec polynomial(const std::vector<double>& c);
};

struct PotentialValues {
  double phi, dphi, d2phi, d3phi;
};

PotentialValues eval(const PotentialSpec& spec, double s);
int degree(const PotentialSpec& spec);

// Resolved stabilization constant: spec.stabilization if set, otherwise
// max of Phi'' over [-1.5, 1.5] (clamped at 0).
double stabilization_slope(const PotentialSpec& spec);

// Explicit/stabilized treatment of Phi': the stepper uses
// Phi'(s_old) + S (s_new - s_old). Returns (Phi'(s_old), S).
struct SplitValues {
  double value;
  double slope;
};
SplitValues split_linearized(const PotentialSpec& spec, double s_old);

// Phi~(s) = Phi(s + c): exact Taylor shift of the coefficients.
PotentialSpec shifted(const PotentialSpec& spec, double c);

// Growth-condition certificate. Exponents are exact degree arithmetic for
// polynomials; constants and witnesses come from a scan of [-R, R]. A
// certificate is a finite check, not a proof; the scanned range is recorded.
struct GrowthReport {
  double scan_radius = 0.0;
  int n_dim = 0;

  // Phi(s) >= -(eta/2) s^2 - c0, eta below the first Neumann eigenvalue.
  bool lower_bound_pass = false;
  double eta = 0.0;
  double eta_min = 0.0;  // smallest admissible eta (degree arithmetic)
  double c0 = 0.0;
  double lower_witness = 0.0;

  // |Phi'(s)| <= (c1 Phi + c2 s^2 + c3)^theta, theta in (0,1).
  bool gradient_pass = false;
  double theta = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double gradient_witness = 0.0;

  // |Phi''(s)| <= C (1 + |s|^alpha), alpha < 4 when n = 3.
  bool hessian_pass = false;
  double alpha = 0.0;
  double hessian_const = 0.0;
  double hessian_witness = 0.0;

  // |Phi'''(s)| <= C (1 + |s|^gamma), gamma < 3 when n = 3.
  bool third_pass = false;
  double gamma = 0.0;
  double third_const = 0.0;
  double third_witness = 0.0;

  // Real-analyticity is required by the convergence theory; polynomials are
  // analytic by construction, anything else would be an assumed flag.
  bool analytic = true;

  bool all_pass() const { return lower_bound_pass && gradient_pass && hessian_pass && third_pass; }
  std::string to_string() const;
};

// eta: requested lower-bound coefficient; lambda1: first nontrivial Neumann
// eigenvalue of the run's grid (pass +inf when there is no grid context).
GrowthReport validate_growth(const PotentialSpec& spec, double scan_radius, int n_dim, double eta,
                             double lambda1);

}  // namespace chg
