#pragma once

#include <iosfwd>

namespace magloc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kNumericalError = 3 };

/// Entry point for the magloc tool. Progress goes to `out`; failures print
/// one line "error: code=<n> kind=<kind> message=<json string>" to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace magloc::cli
