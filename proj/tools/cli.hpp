#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hashemb::cli {

/// Runs one hashemb command line (without the program name). Returns the
/// process exit code; diagnostics go to `err`, reports to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hashemb::cli
