#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iontransport {

// Parses arguments (excluding argv[0]) and runs the requested subcommand.
// Results go to `out` unless --out redirects them to a file; diagnostics go
// to `err`. Returns 0 on success, 1 on usage/validation errors, 2 on
// numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace iontransport
