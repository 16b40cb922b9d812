#pragma once

#include <iosfwd>

namespace eolgp {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "EOLGP_OUT_DIR";

/// Entry point of the `eolgp` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eolgp
