#pragma once

#include <iosfwd>

#include "sptest/error.hpp"

namespace sptest::cli {

/// 0 success, 1 usage or I/O error, 2 numeric error.
int exit_code_for(ErrorKind kind) noexcept;

/// Entry point of the `sptest` command line. Reports go to --out or `out`;
/// diagnostics go to `err`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sptest::cli
