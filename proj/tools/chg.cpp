// Command-line front end: simulate | check | symbol-scan | extend | sweep.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "chg/commands.hpp"

namespace {

int load_config(const std::string& path, std::string& text, chg::ParseResult& parsed, bool quiet) {
  std::ifstream in(path);
  if (!in) {
    if (!quiet) std::cerr << "error: cannot open config file '" << path << "'\n";
    return 4;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  parsed = chg::parse_config(text);
  if (!parsed.ok()) {
    if (!quiet) {
      for (const auto& e : parsed.errors) {
        std::cerr << path << ":" << e.line << ": " << e.message << "\n";
      }
    }
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard-Gurtin simulation and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  chg::CommandOptions opt;
  std::string sweep_param;
  std::string sweep_values;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "run configuration file")->required();
    sub->add_option("--out-dir", opt.out_dir_override, "override output.out_dir");
    std::uint64_t seed_tmp = 0;
    sub->add_option_function<std::uint64_t>(
        "--seed", [&opt](const std::uint64_t& s) { opt.seed = s; }, "override output.seed");
    (void)seed_tmp;
    sub->add_option_function<long>(
        "--snapshot-every", [&opt](const long& n) { opt.snapshot_every = n; },
        "override output.snapshot_every");
    sub->add_flag("--quiet", opt.quiet, "suppress console output");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run a simulation with diagnostics ledger");
  add_common(simulate);
  CLI::App* check = app.add_subcommand("check", "validate coefficients, potential and data");
  add_common(check);
  CLI::App* symbol = app.add_subcommand("symbol-scan", "scan the linear-theory symbol bounds");
  add_common(symbol);
  CLI::App* extend = app.add_subcommand("extend", "dump a divergence-preserving field extension");
  add_common(extend);
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep of simulations");
  add_common(sweep);
  sweep->add_option("--param", sweep_param, "parameter axis as section.key")->required();
  sweep->add_option("--values", sweep_values, "comma-separated list of values")->required();

  CLI11_PARSE(app, argc, argv);

  std::string text;
  chg::ParseResult parsed;
  if (const int rc = load_config(config_path, text, parsed, opt.quiet); rc != 0) return rc;

  if (simulate->parsed()) return chg::cmd_simulate(*parsed.config, opt);
  if (check->parsed()) return chg::cmd_check(*parsed.config, opt);
  if (symbol->parsed()) return chg::cmd_symbol_scan(*parsed.config, opt);
  if (extend->parsed()) return chg::cmd_extend(*parsed.config, opt);
  if (sweep->parsed()) {
    std::vector<std::string> values;
    std::stringstream ss(sweep_values);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(item);
    if (values.empty()) {
      if (!opt.quiet) std::cerr << "error: --values list is empty\n";
      return 4;
    }
    return chg::cmd_sweep(text, sweep_param, values, opt);
  }
  return 4;
}
