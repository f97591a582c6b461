#include "chg/config.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "chg/registry.hpp"

namespace chg {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool used = false;
};
using Section = std::map<std::string, RawEntry>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Cursor {
  std::map<std::string, Section> sections;
  std::vector<ParseError>* errors;

  void fail(int line, const std::string& msg) { errors->push_back({line, msg}); }

  bool has(const std::string& sec, const std::string& key) {
    auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }
  RawEntry* entry(const std::string& sec, const std::string& key) {
    auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }
  int line_of(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    if (s == sections.end()) return 0;
    auto k = s->second.find(key);
    return k == s->second.end() ? 0 : k->second.line;
  }

  void get_real(const std::string& sec, const std::string& key, double& out) {
    RawEntry* e = entry(sec, key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("trailing characters");
      out = v;
    } catch (const std::exception&) {
      fail(e->line, sec + "." + key + ": expected a real number, got '" + e->value + "'");
    }
  }
  void get_long(const std::string& sec, const std::string& key, long& out) {
    RawEntry* e = entry(sec, key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const long v = std::stol(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("trailing characters");
      out = v;
    } catch (const std::exception&) {
      fail(e->line, sec + "." + key + ": expected an integer, got '" + e->value + "'");
    }
  }
  void get_int(const std::string& sec, const std::string& key, int& out) {
    long v = out;
    get_long(sec, key, v);
    out = static_cast<int>(v);
  }
  void get_u64(const std::string& sec, const std::string& key, std::uint64_t& out) {
    RawEntry* e = entry(sec, key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("trailing characters");
      out = v;
    } catch (const std::exception&) {
      fail(e->line, sec + "." + key + ": expected an unsigned integer, got '" + e->value + "'");
    }
  }
  void get_bool(const std::string& sec, const std::string& key, bool& out) {
    RawEntry* e = entry(sec, key);
    if (!e) return;
    if (e->value == "true") {
      out = true;
    } else if (e->value == "false") {
      out = false;
    } else {
      fail(e->line, sec + "." + key + ": expected true or false, got '" + e->value + "'");
    }
  }
  void get_string(const std::string& sec, const std::string& key, std::string& out) {
    RawEntry* e = entry(sec, key);
    if (!e) return;
    out = e->value;
  }
  void get_reals(const std::string& sec, const std::string& key, std::vector<double>& out) {
    RawEntry* e = entry(sec, key);
    if (!e) return;
    std::vector<double> vals;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        fail(e->line, sec + "." + key + ": expected a comma list of reals, got '" + e->value + "'");
        return;
      }
    }
    if (vals.empty()) {
      fail(e->line, sec + "." + key + ": empty list");
      return;
    }
    out = vals;
  }
  void get_ints(const std::string& sec, const std::string& key, std::vector<int>& out) {
    if (!has(sec, key)) return;
    const int line = line_of(sec, key);
    std::vector<double> vals;
    get_reals(sec, key, vals);
    if (vals.empty()) return;
    std::vector<int> ints;
    for (double v : vals) {
      if (v != std::floor(v)) {
        fail(line, sec + "." + key + ": expected integers");
        return;
      }
      ints.push_back(static_cast<int>(v));
    }
    out = ints;
  }
};

const char* const known_sections[] = {"grid", "coefficients", "potential", "time",
                                      "data", "output",       "symbol",    "extend"};

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  std::vector<ParseError>& errors = result.errors;

  Cursor cur;
  cur.errors = &errors;
  {
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    std::string section;
    while (std::getline(ss, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw = raw.substr(0, hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          errors.push_back({lineno, "malformed section header '" + line + "'"});
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        bool known = false;
        for (const char* s : known_sections) known = known || section == s;
        if (!known) {
          errors.push_back({lineno, "unknown section [" + section + "]"});
          section.clear();
          continue;
        }
        cur.sections[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        errors.push_back({lineno, "expected 'key = value', got '" + line + "'"});
        continue;
      }
      if (section.empty()) {
        errors.push_back({lineno, "key outside of any section"});
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        errors.push_back({lineno, "empty key or value"});
        continue;
      }
      if (!cur.sections[section].emplace(key, RawEntry{value, lineno}).second) {
        errors.push_back({lineno, "duplicate key " + section + "." + key});
      }
    }
  }

  RunConfig cfg;

  for (const char* sec : {"grid", "time"}) {
    if (!cur.sections.count(sec)) {
      errors.push_back({0, std::string("missing mandatory section [") + sec + "]"});
    }
  }

  cur.get_int("grid", "dimension", cfg.dimension);
  if (cfg.dimension == 2) {
    cfg.extents = {1.0, 1.0};
    cfg.cells = {64, 64};
  }
  cur.get_reals("grid", "extents", cfg.extents);
  cur.get_ints("grid", "cells", cfg.cells);

  cur.get_string("coefficients", "mode", cfg.mode);
  cur.get_real("coefficients", "beta", cfg.beta);
  cur.get_string("coefficients", "a", cfg.a_spec);
  cur.get_string("coefficients", "c", cfg.c_spec);
  cur.get_string("coefficients", "b", cfg.b_spec);

  cur.get_string("potential", "kind", cfg.potential_kind);
  cur.get_reals("potential", "coeffs", cfg.potential_coeffs);
  cur.get_real("potential", "stabilization", cfg.stabilization);
  cur.get_real("potential", "scan_radius", cfg.scan_radius);
  cur.get_real("potential", "eta", cfg.eta);

  cur.get_real("time", "tau", cfg.tau);
  cur.get_long("time", "steps", cfg.steps);
  cur.get_real("time", "steady_tol_rate", cfg.steady_tol_rate);
  cur.get_real("time", "steady_tol_station", cfg.steady_tol_station);
  cur.get_int("time", "steady_consecutive", cfg.steady_consecutive);
  cur.get_int("time", "picard_iters", cfg.picard_iters);

  cur.get_string("data", "psi0", cfg.psi0_spec);
  cur.get_string("data", "f", cfg.f_spec);
  cur.get_string("data", "g", cfg.g_spec);
  cur.get_string("data", "h1", cfg.h1_spec);
  cur.get_string("data", "h2", cfg.h2_spec);
  cur.get_bool("data", "shift_mean", cfg.shift_mean);
  cur.get_bool("data", "manufactured", cfg.manufactured);

  cur.get_string("output", "out_dir", cfg.out_dir);
  cur.get_long("output", "snapshot_every", cfg.snapshot_every);
  cur.get_u64("output", "seed", cfg.seed);

  cur.get_real("symbol", "beta", cfg.symbol.beta);
  cur.get_reals("symbol", "a", cfg.symbol.a);
  cur.get_reals("symbol", "c", cfg.symbol.c);
  cur.get_reals("symbol", "B", cfg.symbol.B);
  cur.get_int("symbol", "n", cfg.symbol.n);
  cur.get_real("symbol", "phi", cfg.symbol.phi);
  cur.get_int("symbol", "rays", cfg.symbol.rays);
  cur.get_int("symbol", "lambda_moduli", cfg.symbol.lambda_moduli);
  cur.get_int("symbol", "xi_dirs", cfg.symbol.xi_dirs);
  cur.get_int("symbol", "xi_moduli", cfg.symbol.xi_moduli);

  cur.get_string("extend", "field", cfg.extend.field);
  cur.get_real("extend", "radius", cfg.extend.radius);
  cur.get_real("extend", "annulus_factor", cfg.extend.annulus_factor);
  cur.get_int("extend", "samples", cfg.extend.samples);

  for (const auto& [sec, entries] : cur.sections) {
    for (const auto& [key, e] : entries) {
      if (!e.used) errors.push_back({e.line, "unknown key " + sec + "." + key});
    }
  }

  auto line_of = [&](const char* sec, const char* key) { return cur.line_of(sec, key); };
  if (cfg.dimension != 1 && cfg.dimension != 2) {
    errors.push_back({line_of("grid", "dimension"), "grid.dimension must be 1 or 2"});
  } else {
    if (static_cast<int>(cfg.extents.size()) != cfg.dimension) {
      errors.push_back({line_of("grid", "extents"), "grid.extents must list one length per axis"});
    }
    if (static_cast<int>(cfg.cells.size()) != cfg.dimension) {
      errors.push_back({line_of("grid", "cells"), "grid.cells must list one count per axis"});
    }
  }
  for (double L : cfg.extents) {
    if (!(L > 0.0)) errors.push_back({line_of("grid", "extents"), "grid.extents must be positive"});
  }
  for (int n : cfg.cells) {
    if (n < 4) errors.push_back({line_of("grid", "cells"), "grid.cells needs at least 4 per axis"});
  }
  if (!(cfg.tau > 0.0)) errors.push_back({line_of("time", "tau"), "time.tau must be positive"});
  if (cfg.steps < 1) errors.push_back({line_of("time", "steps"), "time.steps must be at least 1"});
  if (cfg.picard_iters < 1 || cfg.picard_iters > 10) {
    errors.push_back({line_of("time", "picard_iters"), "time.picard_iters must lie in [1,10]"});
  }
  if (cfg.steady_consecutive < 1) {
    errors.push_back(
        {line_of("time", "steady_consecutive"), "time.steady_consecutive must be >= 1"});
  }
  if (cfg.snapshot_every < 0) {
    errors.push_back({line_of("output", "snapshot_every"), "output.snapshot_every must be >= 0"});
  }
  if (cfg.mode != "semilinear" && cfg.mode != "quasilinear") {
    errors.push_back(
        {line_of("coefficients", "mode"), "coefficients.mode must be semilinear or quasilinear"});
  }
  if (cfg.potential_kind != "double_well" && cfg.potential_kind != "quartic" &&
      cfg.potential_kind != "polynomial") {
    errors.push_back({line_of("potential", "kind"),
                      "potential.kind must be double_well, quartic or polynomial"});
  }
  if (cfg.symbol.n != 1 && cfg.symbol.n != 2 && cfg.symbol.n != 3) {
    errors.push_back({line_of("symbol", "n"), "symbol.n must be 1, 2 or 3"});
  } else if (static_cast<int>(cfg.symbol.B.size()) != cfg.symbol.n * cfg.symbol.n) {
    errors.push_back({line_of("symbol", "B"), "symbol.B must list n*n row-major entries"});
  }

  if (!known_vector_coefficient(cfg.a_spec)) {
    errors.push_back({line_of("coefficients", "a"),
                      "unknown built-in '" + cfg.a_spec + "'; " + registry_listing()});
  }
  if (!known_vector_coefficient(cfg.c_spec)) {
    errors.push_back({line_of("coefficients", "c"),
                      "unknown built-in '" + cfg.c_spec + "'; " + registry_listing()});
  }
  if (!known_scalar_coefficient(cfg.b_spec)) {
    errors.push_back({line_of("coefficients", "b"),
                      "unknown built-in '" + cfg.b_spec + "'; " + registry_listing()});
  }
  if (!known_initial(cfg.psi0_spec)) {
    errors.push_back(
        {line_of("data", "psi0"), "unknown built-in '" + cfg.psi0_spec + "'; " + registry_listing()});
  }
  if (cfg.f_spec != "manufactured" && !known_source(cfg.f_spec)) {
    errors.push_back(
        {line_of("data", "f"), "unknown built-in '" + cfg.f_spec + "'; " + registry_listing()});
  }
  if (cfg.g_spec != "manufactured" && !known_source(cfg.g_spec)) {
    errors.push_back(
        {line_of("data", "g"), "unknown built-in '" + cfg.g_spec + "'; " + registry_listing()});
  }
  if (!known_boundary_source(cfg.h1_spec)) {
    errors.push_back(
        {line_of("data", "h1"), "unknown built-in '" + cfg.h1_spec + "'; " + registry_listing()});
  }
  if (!known_boundary_source(cfg.h2_spec)) {
    errors.push_back(
        {line_of("data", "h2"), "unknown built-in '" + cfg.h2_spec + "'; " + registry_listing()});
  }
  if (!known_vector_coefficient(cfg.extend.field)) {
    errors.push_back({line_of("extend", "field"),
                      "unknown built-in '" + cfg.extend.field + "'; " + registry_listing()});
  }
  if (cfg.manufactured && cfg.dimension != 2) {
    errors.push_back(
        {line_of("data", "manufactured"), "manufactured runs need grid.dimension = 2"});
  }

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

std::string print_config(const RunConfig& c) {
  std::ostringstream os;
  auto reals = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v[i]);
    return s;
  };
  auto ints = [&](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
  };
  os << "[grid]\n";
  os << "dimension = " << c.dimension << "\n";
  os << "extents = " << reals(c.extents) << "\n";
  os << "cells = " << ints(c.cells) << "\n\n";
  os << "[coefficients]\n";
  os << "mode = " << c.mode << "\n";
  os << "beta = " << fmt17(c.beta) << "\n";
  os << "a = " << c.a_spec << "\n";
  os << "c = " << c.c_spec << "\n";
  os << "b = " << c.b_spec << "\n\n";
  os << "[potential]\n";
  os << "kind = " << c.potential_kind << "\n";
  if (!c.potential_coeffs.empty()) os << "coeffs = " << reals(c.potential_coeffs) << "\n";
  os << "stabilization = " << fmt17(c.stabilization) << "\n";
  os << "scan_radius = " << fmt17(c.scan_radius) << "\n";
  os << "eta = " << fmt17(c.eta) << "\n\n";
  os << "[time]\n";
  os << "tau = " << fmt17(c.tau) << "\n";
  os << "steps = " << c.steps << "\n";
  os << "steady_tol_rate = " << fmt17(c.steady_tol_rate) << "\n";
  os << "steady_tol_station = " << fmt17(c.steady_tol_station) << "\n";
  os << "steady_consecutive = " << c.steady_consecutive << "\n";
  os << "picard_iters = " << c.picard_iters << "\n\n";
  os << "[data]\n";
  os << "psi0 = " << c.psi0_spec << "\n";
  os << "f = " << c.f_spec << "\n";
  os << "g = " << c.g_spec << "\n";
  os << "h1 = " << c.h1_spec << "\n";
  os << "h2 = " << c.h2_spec << "\n";
  os << "shift_mean = " << (c.shift_mean ? "true" : "false") << "\n";
  os << "manufactured = " << (c.manufactured ? "true" : "false") << "\n\n";
  os << "[output]\n";
  os << "out_dir = " << c.out_dir << "\n";
  os << "snapshot_every = " << c.snapshot_every << "\n";
  os << "seed = " << c.seed << "\n\n";
  os << "[symbol]\n";
  os << "beta = " << fmt17(c.symbol.beta) << "\n";
  os << "a = " << reals(c.symbol.a) << "\n";
  os << "c = " << reals(c.symbol.c) << "\n";
  os << "B = " << reals(c.symbol.B) << "\n";
  os << "n = " << c.symbol.n << "\n";
  os << "phi = " << fmt17(c.symbol.phi) << "\n";
  os << "rays = " << c.symbol.rays << "\n";
  os << "lambda_moduli = " << c.symbol.lambda_moduli << "\n";
  os << "xi_dirs = " << c.symbol.xi_dirs << "\n";
  os << "xi_moduli = " << c.symbol.xi_moduli << "\n\n";
  os << "[extend]\n";
  os << "field = " << c.extend.field << "\n";
  os << "radius = " << fmt17(c.extend.radius) << "\n";
  os << "annulus_factor = " << fmt17(c.extend.annulus_factor) << "\n";
  os << "samples = " << c.extend.samples << "\n";
  return os.str();
}

}  // namespace chg
