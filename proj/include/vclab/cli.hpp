#pragma once

#include <ostream>

namespace vclab {

// Entry point of the vclab tool. Returns the process exit code:
// 0 success, 1 validation error, 2 no transition / divergence, 3 budget exceeded.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vclab
