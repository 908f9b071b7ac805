#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace randent::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kCapacity = 3, kNumeric = 4 };

/// Runs the command line `args` (without the program name). Data without an
/// --out file goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

std::string sha256_hex(std::string_view bytes);

} // namespace randent::cli
