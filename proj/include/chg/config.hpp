#pragma once
// Run configuration: the `[section]` / `key = value` text format, its parser
// (errors carry line numbers), and the canonical printer used for
// round-tripping. Values: booleans true|false, reals in decimal or
// scientific notation, vectors as comma lists, built-in field specs as
// name or name(arg, ...). `#` starts a comment.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chg {

struct SymbolScanConfig {
  double beta = 1.0;
  std::vector<double> a{0.0, 0.0};
  std::vector<double> c{0.0, 0.0};
  std::vector<double> B{1.0, 0.0, 0.0, 1.0};  // row-major n x n
  int n = 2;
  double phi = 1.7278759594743864;  // 0.55 pi
  int rays = 24;
  int lambda_moduli = 25;
  int xi_dirs = 16;
  int xi_moduli = 25;

  bool operator==(const SymbolScanConfig&) const = default;
};

struct ExtendConfig {
  std::string field = "rotation(1)";
  double radius = 1.0;
  double annulus_factor = 3.0;
  int samples = 48;

  bool operator==(const ExtendConfig&) const = default;
};

struct RunConfig {
  // [grid]
  int dimension = 1;
  std::vector<double> extents{1.0};
  std::vector<int> cells{256};

  // [coefficients]
  std::string mode = "semilinear";
  double beta = 1.0;
  std::string a_spec = "zero";
  std::string c_spec = "zero";
  std::string b_spec = "constant(1)";

  // [potential]
  std::string potential_kind = "double_well";
  std::vector<double> potential_coeffs;
  double stabilization = -1.0;  // negative = automatic
  double scan_radius = 10.0;
  double eta = -1.0;  // negative = half the first Neumann eigenvalue

  // [time]
  double tau = 1e-3;
  long steps = 100;
  double steady_tol_rate = 1e-8;
  double steady_tol_station = 1e-6;
  int steady_consecutive = 50;
  int picard_iters = 1;

  // [data]
  std::string psi0_spec = "uniform(0)";
  std::string f_spec = "zero";
  std::string g_spec = "zero";
  std::string h1_spec = "zero";
  std::string h2_spec = "zero";
  bool shift_mean = false;
  bool manufactured = false;

  // [output]
  std::string out_dir = "out";
  long snapshot_every = 0;
  std::uint64_t seed = 1;

  SymbolScanConfig symbol;
  ExtendConfig extend;

  bool operator==(const RunConfig&) const = default;
};

struct ParseError {
  int line = 0;  // 0 when the error is not tied to a specific line
  std::string message;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<ParseError> errors;
  bool ok() const { return config.has_value(); }
};

ParseResult parse_config(const std::string& text);
std::string print_config(const RunConfig& cfg);

// 17 significant digits: round-trip exact for doubles.
std::string fmt17(double v);

}  // namespace chg
