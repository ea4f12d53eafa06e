#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace expframe::cli {

enum ExitCode : int { ok = 0, validation_error = 1, usage_error = 2 };

/// Runs one command. `args` excludes the program name; "-" paths mean the
/// given streams. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace expframe::cli
