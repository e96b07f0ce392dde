#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gmind::cli {

enum ExitCode : int { ok = 0, user_error = 1, internal_error = 2 };

/// Runs one gmind command line (args exclude the program name). Diagnostics
/// go to err as a single line prefixed with "gmind: ".
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int main(int argc, char **argv);

} // namespace gmind::cli
