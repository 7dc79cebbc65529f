#pragma once

#include <string>
#include <vector>

namespace phl::cli {

/// Entry point of the `growth` tool. Exit codes: 0 success / certificate
/// pass, 1 certificate fail, 2 configuration error, 3 solver error,
/// 4 unrecognized profile family.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace phl::cli
