#pragma once

#include <iosfwd>

namespace cxg {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitAudit = 3,
  kExitMultiset = 4,
  kExitStale = 5,
};

int run_cli(int argc, const char* const* argv);

}  // namespace cxg
