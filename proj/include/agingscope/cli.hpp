#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agingscope/error.hpp"

namespace agingscope::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kBadData = 2, kPrecondition = 3 };

/// Exit code for an error raised by the library.
int exit_code_for(ErrorCode code);

struct RunConfig {
  double alpha = 0.05;
  double horizon_s = 21600.0;
  double threshold_ms = 200.0;
  std::size_t min_gc_samples = 100;
  std::string format;  // "csv" or "json"; empty selects the command default
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
};

/// Runs the command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace agingscope::cli
