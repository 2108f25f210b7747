#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace train::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInternal = 3 };

/// Entry point shared by the executable and the tests.
int main_with(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace train::cli
