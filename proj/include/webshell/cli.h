#pragma once

#include <string>
#include <vector>

namespace webshell {

/// Shared entry point for the `webshell` multitool and the `wsh` launcher.
/// args[0] is the subcommand: wsh, webgrep, linkcheck, webcopy,
/// serve-fixtures. Exit codes: 0 success, 1 operational failure, 2 usage
/// error.
int cli_main(const std::vector<std::string>& args);

} // namespace webshell
