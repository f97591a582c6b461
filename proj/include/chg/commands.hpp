#pragma once
// Run orchestration behind the CLI subcommands. Exit codes:
//   0 clean completion, 2 validator rejection, 3 solver failure, 4 config error.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chg/config.hpp"

namespace chg {

struct CommandOptions {
  std::string out_dir_override;            // --out-dir
  std::optional<std::uint64_t> seed;       // --seed
  std::optional<long> snapshot_every;      // --snapshot-every
  bool quiet = false;                      // --quiet
};

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt);
int cmd_check(const RunConfig& cfg, const CommandOptions& opt);
int cmd_symbol_scan(const RunConfig& cfg, const CommandOptions& opt);
int cmd_extend(const RunConfig& cfg, const CommandOptions& opt);

// Runs one simulation per value of `param` ("section.key"; the value string
// replaces that key before re-parsing). Rows are ordered by numeric value
// when every value parses as a number, by the given order otherwise; a
// failing run marks its row failed without aborting the others.
int cmd_sweep(const std::string& config_text, const std::string& param,
              const std::vector<std::string>& values, const CommandOptions& opt);

}  // namespace chg
