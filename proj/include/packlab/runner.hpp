#pragma once

// Config-driven experiment runner behind the CLI. Each command reads a
// merged key-value config, writes CSV/JSON outputs plus a summary into
// the output directory, and reports an exit status: 0 when every
// verification flag passed, 1 when a flag failed, 2 for invalid configs,
// 3 for propagated domain errors (DEPTH_EXCEEDED and friends). Wall
// clocks live only in run_meta.json so data outputs stay byte-identical
// across reruns.

#include <string>
#include <vector>

#include "packlab/config.hpp"

namespace packlab {

struct RunOutcome {
  int exit_code = 0;
  bool all_pass = false;
  std::string error_code;  // machine-readable, empty on success
  std::string error_message;
  std::vector<std::string> outputs;
};

extern const std::vector<std::string> kCommands;

bool is_command(const std::string& name);
Config default_config(const std::string& command);
RunOutcome run_command(const std::string& command, Config config);

}  // namespace packlab
