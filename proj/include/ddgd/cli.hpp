#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddgd::cli {

/// Front end for the `run`, `compare`, `sweep`, `spectra` and `certify-eps`
/// subcommands. Returns 0 on success, 1 on validation errors and 2 on
/// numeric or certification failures.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddgd::cli
