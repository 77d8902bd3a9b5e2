#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rads {

/// Runs one CLI invocation; args excludes the program name. Returns the exit
/// code (0 ok, 1 usage, 2 data, 3 external service).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace rads
