#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace fairaudit {

enum ExitCode : int { kExitOk = 0, kExitDataError = 1, kExitUsageError = 2 };

/// Entry point of the `fairaudit` executable; args[0] is the program name.
int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace fairaudit
