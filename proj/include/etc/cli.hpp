#pragma once

#include <iosfwd>

namespace etc {

/// Runs the `etc` command line. Returns 0 on success, 1 on solver non-convergence,
/// 2 on usage or configuration errors, 3 on I/O errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace etc
