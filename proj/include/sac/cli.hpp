#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sac {

enum ExitCode : int {
  kExitOk = 0,
  kExitDomain = 1,  // hypothesis failure or a failed trajectory / audit
  kExitConfig = 2,
  kExitIo = 3,
};

/// Entry point of the `sac` command line tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sac
