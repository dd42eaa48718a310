#ifndef CLUSTERKIT_TOOLS_CLI_HPP
#define CLUSTERKIT_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace clusterkit::cli {

/// Exit codes.
inline constexpr int kPass = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;

/// Run one command line (without the program name). Reports and data go to
/// `out`, machine-readable errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clusterkit::cli

#endif  // CLUSTERKIT_TOOLS_CLI_HPP
