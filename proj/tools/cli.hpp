#pragma once

// Command-line front end. Kept out of main() so the tests can drive it
// in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace qprop::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kDegenerate = 3,
  kConvergence = 4,
  kBracket = 5,
};

inline constexpr int kSchemaVersion = 1;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest representation that parses back to the same double; NaN -> "".
std::string format_number(double x);

/// Header row of `olos sweep` output.
inline constexpr const char* kSweepHeader =
    "axis,value,R,z,b1,b2,lower_bound,upper_bound,status";

inline constexpr const char* kStarHeader = "axis,value,p_star,r_star,at_boundary,status";

}  // namespace qprop::cli
