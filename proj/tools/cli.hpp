#pragma once

#include <ostream>

namespace stabench::cli {

// Parses argv and dispatches to a subcommand; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stabench::cli
