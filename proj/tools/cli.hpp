#pragma once

#include <iosfwd>

namespace opencat {

/// Runs one `opencat` subcommand. Returns 0 on success, 2 for usage errors,
/// 1 for failures (reported as one JSON line on `err`).
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opencat
