#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace heppo::cli {

/// Runs one command line (without the program name). Reports go to `out`
/// unless --out is given; diagnostics go to `err`. Returns the exit code:
/// 0 on success, 2 on invalid input, CLI11's code on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace heppo::cli
