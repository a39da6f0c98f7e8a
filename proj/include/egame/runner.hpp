#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace egame {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,          ///< usage, configuration or input error
  kExitNotConverged = 2,   ///< a solver did not converge
  kExitVerification = 3,   ///< an asserted invariant failed
};

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  ///< overrides the configured seed
  bool quiet = false;
};

/// Command names accepted by run().
const std::vector<std::string>& commands();

/// Executes one command. Reports and CSV files go to options.out_dir
/// together with manifest-<command>.json; progress goes to `log` unless
/// quiet, errors to `err`. Returns an ExitCode.
int run(const std::string& command, const RunOptions& options, std::ostream& log,
        std::ostream& err);

}  // namespace egame
