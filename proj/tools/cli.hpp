#pragma once

#include <ostream>

namespace mixl::cli {

/// Entry point of the `mixl` tool. Returns the process exit code: 0 success, 2 usage error,
/// 3 data error, 4 estimation failure. Failures print one JSON line to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixl::cli
