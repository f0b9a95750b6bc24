#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gsa::cli {

/// Exit codes of the command-line runner.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,       // bad flags, unreadable or malformed input
  kDegenerate = 2,  // constant output / zero grand value
  kNumerical = 3,   // linear-algebra failure
};

/// Runs the `gsa` command line. args[0] is the program name. Results go to
/// the files named by --out, or to `out` when no file is given; diagnostics,
/// warnings and wall-time go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsa::cli
