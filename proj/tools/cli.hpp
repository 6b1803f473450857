#pragma once

#include <ostream>

namespace beckman::cli {

// Runs the command line against the given streams and returns the exit code:
// 0 on success, 1 on a library error, CLI11's code on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace beckman::cli
