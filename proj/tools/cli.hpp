#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bnsens::cli {

/// Default master seed, overridable through the BNSENS_SEED environment variable.
std::uint64_t default_seed();

/// 41-point probability grid used by `analyze` for the expected-error curve.
std::vector<double> error_grid();

/// Link grid {0.05, 0.10, ..., 0.95} used by `analyze` for evidence weights.
std::vector<double> link_grid();

/// Runs the command line. args excludes the program name.
/// Returns 0 on success, 1 for usage, config or format errors, 2 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bnsens::cli
