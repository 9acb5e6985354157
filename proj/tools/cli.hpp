#pragma once

#include <iosfwd>

#include "emocorpus/error.hpp"

namespace emocorpus::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kProvider = 3,
  kValidation = 4,
};

ExitCode exit_code_for(ErrorCode code);

/// Runs the command line in-process, writing results to `out` and
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emocorpus::cli
