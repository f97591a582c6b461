#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chg/commands.hpp"
#include "chg/config.hpp"
#include "chg/registry.hpp"
#include "doctest.h"

using namespace chg;
namespace fs = std::filesystem;

namespace {
const char* kMinimal = R"(# minimal 1D run
[grid]
dimension = 1
extents = 1.0
cells = 64

[time]
tau = 1e-3
steps = 10
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("minimal config parses with defaults filled") {
  const ParseResult r = parse_config(kMinimal);
  REQUIRE(r.ok());
  CHECK(r.config->dimension == 1);
  CHECK(r.config->cells == std::vector<int>{64});
  CHECK(r.config->mode == "semilinear");
  CHECK(r.config->b_spec == "constant(1)");
  CHECK(r.config->psi0_spec == "uniform(0)");
  CHECK(r.config->seed == 1);
}

TEST_CASE("negative tau is rejected with its line number") {
  std::string text = kMinimal;
  text.replace(text.find("tau = 1e-3"), 10, "tau = -0.1");
  const ParseResult r = parse_config(text);
  REQUIRE_FALSE(r.ok());
  bool found = false;
  for (const auto& e : r.errors) {
    if (e.message.find("time.tau must be positive") != std::string::npos) {
      found = true;
      CHECK(e.line == 8);  // the tau line in the template
    }
  }
  CHECK(found);
}

TEST_CASE("unknown built-in names the registry") {
  std::string text = std::string(kMinimal) + "\n[coefficients]\na = vortex99(1.0)\n";
  const ParseResult r = parse_config(text);
  REQUIRE_FALSE(r.ok());
  bool found = false;
  for (const auto& e : r.errors) {
    if (e.message.find("vortex99") != std::string::npos &&
        e.message.find("registry") != std::string::npos) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("unknown keys and malformed lines are reported") {
  std::string text = std::string(kMinimal) + "\n[time]\n";  // duplicate section is fine to reopen?
  // reopening a section is treated as the same section; a bogus key errors:
  text = std::string(kMinimal) + "\n[output]\nbanana = 7\n";
  const ParseResult r = parse_config(text);
  REQUIRE_FALSE(r.ok());
  CHECK(r.errors.front().message.find("unknown key output.banana") != std::string::npos);

  const ParseResult r2 = parse_config("[grid\ndimension = 1\n");
  CHECK_FALSE(r2.ok());
}

TEST_CASE("print/parse round trip is the identity") {
  ParseResult base = parse_config(kMinimal);
  REQUIRE(base.ok());
  RunConfig cfg = *base.config;
  cfg.a_spec = "stream_sine(0.1)";
  cfg.tau = 1.2345678901234567e-3;
  cfg.seed = 987654321;
  cfg.symbol.phi = 1.73;
  cfg.extend.radius = 0.75;
  const std::string text = print_config(cfg);
  const ParseResult again = parse_config(text);
  REQUIRE(again.ok());
  CHECK(*again.config == cfg);
}

TEST_CASE("simulate is deterministic: same config and seed give identical bytes") {
  const std::string base = R"([grid]
dimension = 1
extents = 4.0
cells = 64

[time]
tau = 1e-3
steps = 50

[data]
psi0 = noise(0.1, 0.05)

[output]
seed = 777
)";
  const ParseResult r = parse_config(base);
  REQUIRE(r.ok());
  CommandOptions opt;
  opt.quiet = true;

  RunConfig c1 = *r.config;
  c1.out_dir = (fs::temp_directory_path() / "chg_det_a").string();
  RunConfig c2 = *r.config;
  c2.out_dir = (fs::temp_directory_path() / "chg_det_b").string();
  fs::remove_all(c1.out_dir);
  fs::remove_all(c2.out_dir);
  CHECK(cmd_simulate(c1, opt) == 0);
  CHECK(cmd_simulate(c2, opt) == 0);
  CHECK(slurp(fs::path(c1.out_dir) / "diagnostics.csv") ==
        slurp(fs::path(c2.out_dir) / "diagnostics.csv"));
  CHECK(slurp(fs::path(c1.out_dir) / "snapshot_final.csv") ==
        slurp(fs::path(c2.out_dir) / "snapshot_final.csv"));

  // a different seed changes the trajectory
  RunConfig c3 = *r.config;
  c3.seed = 778;
  c3.out_dir = (fs::temp_directory_path() / "chg_det_c").string();
  fs::remove_all(c3.out_dir);
  CHECK(cmd_simulate(c3, opt) == 0);
  CHECK(slurp(fs::path(c1.out_dir) / "diagnostics.csv") !=
        slurp(fs::path(c3.out_dir) / "diagnostics.csv"));
}

TEST_CASE("exit codes: uniform run 0, hypothesis violation 2, config error 4") {
  CommandOptions opt;
  opt.quiet = true;

  ParseResult ok = parse_config(kMinimal);
  REQUIRE(ok.ok());
  RunConfig cfg = *ok.config;
  cfg.psi0_spec = "uniform(0.3)";
  cfg.out_dir = (fs::temp_directory_path() / "chg_exit0").string();
  CHECK(cmd_simulate(cfg, opt) == 0);

  RunConfig bad = cfg;
  bad.a_spec = "constant(3.0)";  // ellipticity margin -0.5
  bad.out_dir = (fs::temp_directory_path() / "chg_exit2").string();
  CHECK(cmd_simulate(bad, opt) == 2);

  // compat violation also rejects (exit 2)
  RunConfig lin = cfg;
  lin.psi0_spec = "linear(1.0)";
  lin.out_dir = (fs::temp_directory_path() / "chg_exit2b").string();
  CHECK(cmd_simulate(lin, opt) == 2);

  CHECK_FALSE(parse_config("[grid]\ndimension = 5\n[time]\ntau = 1e-3\nsteps = 1\n").ok());
}

TEST_CASE("check command reports pass for defaults and fail for bad mobility") {
  CommandOptions opt;
  opt.quiet = true;
  ParseResult ok = parse_config(kMinimal);
  REQUIRE(ok.ok());
  RunConfig cfg = *ok.config;
  cfg.out_dir = (fs::temp_directory_path() / "chg_check0").string();
  CHECK(cmd_check(cfg, opt) == 0);

  RunConfig bad = cfg;
  bad.b_spec = "cosine_bump(0.1, 1.0)";  // dips below zero
  bad.out_dir = (fs::temp_directory_path() / "chg_check2").string();
  CHECK(cmd_check(bad, opt) == 2);
  const std::string csv = slurp(fs::path(bad.out_dir) / "checks.csv");
  CHECK(csv.find("mobility_min") != std::string::npos);
  CHECK(csv.find("fail") != std::string::npos);
}

TEST_CASE("symbol-scan and extend commands produce their reports") {
  CommandOptions opt;
  opt.quiet = true;
  ParseResult ok = parse_config(kMinimal);
  REQUIRE(ok.ok());
  RunConfig cfg = *ok.config;
  cfg.symbol.rays = 8;
  cfg.symbol.lambda_moduli = 9;
  cfg.symbol.xi_dirs = 8;
  cfg.symbol.xi_moduli = 9;
  cfg.out_dir = (fs::temp_directory_path() / "chg_scan").string();
  CHECK(cmd_symbol_scan(cfg, opt) == 0);
  const std::string csv = slurp(fs::path(cfg.out_dir) / "symbol_scan.csv");
  CHECK(csv.find("c_min") != std::string::npos);
  CHECK(csv.find("sigma") != std::string::npos);

  RunConfig ext = *ok.config;
  ext.extend.samples = 16;
  ext.out_dir = (fs::temp_directory_path() / "chg_ext").string();
  CHECK(cmd_extend(ext, opt) == 0);
  CHECK(slurp(fs::path(ext.out_dir) / "extend_report.csv").find("observed_order") !=
        std::string::npos);
}

TEST_CASE("sweep runs three values, isolates a failing row, orders rows") {
  const std::string tmpl = R"([grid]
dimension = 2
extents = 1.0, 1.0
cells = 12, 12

[coefficients]
a = stream_sine(0.0)

[time]
tau = 1e-2
steps = 5

[data]
psi0 = noise(0.1, 0.05)

[output]
seed = 5
)";
  CommandOptions opt;
  opt.quiet = true;
  opt.out_dir_override = (fs::temp_directory_path() / "chg_sweep").string();
  fs::remove_all(opt.out_dir_override);
  // unsorted values; one of them breaks the ellipticity hypothesis
  const int rc = cmd_sweep(tmpl, "coefficients.a",
                           {"stream_sine(0.1)", "stream_sine(0)", "stream_sine(2.5)"}, opt);
  CHECK(rc == 2);  // one row failed
  std::ifstream in(fs::path(opt.out_dir_override) / "sweep.csv");
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].find("stream_sine(0)") != std::string::npos);
  CHECK(rows[0].find(",ok,") != std::string::npos);
  CHECK(rows[1].find("stream_sine(0.1)") != std::string::npos);
  CHECK(rows[1].find(",ok,") != std::string::npos);
  CHECK(rows[2].find("stream_sine(2.5)") != std::string::npos);
  CHECK(rows[2].find("failed(2)") != std::string::npos);
}

TEST_CASE("shift_mean recenters the trajectory on the mean-zero space") {
  CommandOptions opt;
  opt.quiet = true;
  ParseResult ok = parse_config(kMinimal);
  REQUIRE(ok.ok());
  RunConfig cfg = *ok.config;
  cfg.psi0_spec = "cosine(0.2, 0.3)";
  cfg.shift_mean = true;
  cfg.out_dir = (fs::temp_directory_path() / "chg_shift").string();
  fs::remove_all(cfg.out_dir);
  CHECK(cmd_simulate(cfg, opt) == 0);
  // every diagnostics row keeps mass at zero
  std::ifstream in(fs::path(cfg.out_dir) / "diagnostics.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(',', line.find(',') + 1);
    const auto b = line.find(',', a + 1);
    CHECK(std::abs(std::stod(line.substr(a + 1, b - a - 1))) < 1e-12);
  }
}
