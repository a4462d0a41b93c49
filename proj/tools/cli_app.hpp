#ifndef CMRW_TOOLS_CLI_APP_HPP
#define CMRW_TOOLS_CLI_APP_HPP

#include <ostream>

namespace cmrw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInput = 2;

/// Entry point of the `cmrw` tool with injectable streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cmrw::cli

#endif  // CMRW_TOOLS_CLI_APP_HPP
