#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oatk/error.hpp"

namespace oatk::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitParse = 4,
  kExitFormat = 5,
  kExitInvalid = 6,
  kExitNumerical = 7,
  kExitCancelled = 8,
};

int exit_code_for(ErrorCode code) noexcept;

/// Subcommands: simulate, recon, metrics, unmix, bench, serve. Failures
/// print one line `error: code=<name> message="<text>"` to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace oatk::app
