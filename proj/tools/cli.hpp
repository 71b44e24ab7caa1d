#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace intcens::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNotConverged = 2 };

/// Runs one command line (without the program name). Data goes to `out`
/// unless --out is given; logs and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace intcens::cli
