#pragma once

#include <ostream>

namespace mqlab::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kConvergence = 3 };

/// Parses argv and runs one subcommand. Reports go to `out` unless an
/// --out path is given; diagnostics and usage text go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mqlab::cli
